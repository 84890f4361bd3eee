#include "mfsk/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

#include "mfsk/errors.hpp"
#include "mfsk/rng.hpp"

namespace mfsk {

void TrainConfig::validate() const {
    if (epochs < 1) throw DomainError("epochs must be >= 1");
    if (batch_size < 1) throw DomainError("batch size must be >= 1");
    if (!(lr > 0.0)) throw DomainError("learning rate must be positive");
}

std::vector<int> batch_plan(std::int64_t count, int batch_size) {
    if (count <= 0 || batch_size < 1) return {};
    std::vector<int> sizes;
    for (std::int64_t done = 0; done < count; done += batch_size)
        sizes.push_back(static_cast<int>(std::min<std::int64_t>(batch_size, count - done)));
    if (batch_size > 1 && sizes.size() > 1 && sizes.back() == 1) {
        sizes.pop_back();
        sizes.back() += 1;
    }
    return sizes;
}

TrainResult train(const Dataset& dataset, const TrainConfig& config) {
    config.validate();
    const auto count = dataset.size();
    if (count == 0) throw DomainError("cannot train on an empty dataset");
    if (dataset.labels.size() != count) throw DomainError("every training frame needs a label");

    Architecture arch = config.architecture;
    arch.input_width = static_cast<int>(dataset.samples.rows());
    arch.output_width = dataset.config.alphabet_size;
    TrainResult result{init_model<float>(config.seed, arch), {}};
    DenseModel<float>& model = result.model;
    model.set_mode(Mode::Training);
    AdamState<float> adam = make_adam_state(model, config.lr);

    const std::vector<int> plan = batch_plan(count, config.batch_size);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(count));
    std::int64_t step = 0;

    Matrix<float> inputs;
    Eigen::VectorXi labels;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const auto start = std::chrono::steady_clock::now();
        std::iota(order.begin(), order.end(), Eigen::Index{0});
        if (config.shuffle) {
            Rng rng = Rng::substream(config.seed, stream::kShuffle, static_cast<std::uint64_t>(epoch));
            std::shuffle(order.begin(), order.end(), rng.engine());
        }

        double loss_sum = 0.0;
        double acc_sum = 0.0;
        std::size_t offset = 0;
        for (int b : plan) {
            inputs.resize(dataset.samples.rows(), b);
            labels.resize(b);
            for (int j = 0; j < b; ++j) {
                inputs.col(j) = dataset.samples.col(order[offset + j]);
                labels(j) = dataset.labels(order[offset + j]);
            }
            offset += static_cast<std::size_t>(b);

            const Matrix<float> targets = one_hot<float>(labels, arch.output_width);
            const Matrix<float> probs = model.forward(inputs);
            const double loss = cross_entropy<float>(targets, probs);
            if (!std::isfinite(loss))
                throw NumericError("non-finite training loss at step " + std::to_string(step));

            int correct = 0;
            for (int j = 0; j < b; ++j) {
                Eigen::Index arg = 0;
                probs.col(j).maxCoeff(&arg);
                correct += arg == labels(j);
            }
            const double accuracy = static_cast<double>(correct) / b;

            adam_step(adam, model, model.backward(targets));
            result.history.steps.push_back({step++, epoch, loss, accuracy});
            loss_sum += loss;
            acc_sum += accuracy;
        }

        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const auto n = static_cast<double>(plan.size());
        result.history.epochs.push_back({epoch, loss_sum / n, acc_sum / n, seconds});
        if (config.on_epoch) config.on_epoch(result.history.epochs.back());
    }
    model.set_mode(Mode::Inference);
    return result;
}

namespace {

std::ofstream open_csv(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.precision(9);
    return out;
}

}  // namespace

void write_step_history(const TrainHistory& history, const std::filesystem::path& path) {
    auto out = open_csv(path);
    out << "step,epoch,loss,accuracy\n";
    for (const auto& s : history.steps) out << s.step << ',' << s.epoch << ',' << s.loss << ',' << s.accuracy << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

void write_epoch_history(const TrainHistory& history, const std::filesystem::path& path) {
    auto out = open_csv(path);
    out << "epoch,loss,accuracy,seconds\n";
    for (const auto& e : history.epochs)
        out << e.epoch << ',' << e.loss << ',' << e.accuracy << ',' << e.seconds << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace mfsk
