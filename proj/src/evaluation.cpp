#include "mfsk/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>

#include "mfsk/errors.hpp"
#include "mfsk/rng.hpp"
#include "parallel.hpp"

namespace mfsk {

ConfusionMatrix::ConfusionMatrix(int classes) {
    if (classes < 1) throw DomainError("confusion matrix needs at least one class");
    counts_.setZero(classes, classes);
}

void ConfusionMatrix::add(int truth, int prediction, std::int64_t count) {
    if (truth < 0 || truth >= classes() || prediction < 0 || prediction >= classes())
        throw DomainError("class index out of range");
    counts_(truth, prediction) += count;
}

MetricsReport compute_metrics(const ConfusionMatrix& confusion) {
    const auto& c = confusion.counts();
    const int k = confusion.classes();
    const auto total = static_cast<double>(confusion.total());
    MetricsReport r;
    r.precision.setZero(k);
    r.recall.setZero(k);
    if (total == 0) return r;

    for (int i = 0; i < k; ++i) {
        const auto tp = static_cast<double>(c(i, i));
        const auto predicted = static_cast<double>(c.col(i).sum());
        const auto actual = static_cast<double>(c.row(i).sum());
        r.precision(i) = predicted > 0 ? tp / predicted : 0.0;
        r.recall(i) = actual > 0 ? tp / actual : 0.0;
    }
    r.macro_precision = r.precision.mean();
    r.macro_recall = r.recall.mean();

    // Each wrong prediction is one false positive and one false negative, so
    // pooled FP = pooled FN = errors and both micro averages reduce to the
    // accuracy expression below.
    const auto errors = static_cast<double>(confusion.total() - confusion.correct());
    r.error_rate = errors / total;
    r.accuracy = 1.0 - r.error_rate;
    r.micro_precision = 1.0 - errors / total;
    r.micro_recall = 1.0 - errors / total;
    return r;
}

Eigen::VectorXi predict(const DenseModel<float>& model, const Eigen::Ref<const Eigen::MatrixXf>& samples) {
    constexpr Eigen::Index kChunk = 256;
    const Eigen::Index n = samples.cols();
    Eigen::VectorXi out(n);
    const Eigen::Index chunks = (n + kChunk - 1) / kChunk;
    detail::parallel_for(chunks, [&](std::int64_t c) {
        const Eigen::Index begin = c * kChunk;
        const Eigen::Index width = std::min(kChunk, n - begin);
        const Matrix<float> probs = model.infer(samples.middleCols(begin, width));
        for (Eigen::Index j = 0; j < width; ++j) {
            Eigen::Index arg = 0;
            probs.col(j).maxCoeff(&arg);
            out(begin + j) = static_cast<int>(arg);
        }
    });
    return out;
}

Evaluation evaluate(const DenseModel<float>& model, const Dataset& testset) {
    if (testset.labels.size() != testset.size()) throw DomainError("every test frame needs a label");
    const Eigen::VectorXi predicted = predict(model, testset.samples);
    Evaluation e{ConfusionMatrix(model.output_width()), {}};
    for (Eigen::Index i = 0; i < testset.size(); ++i) e.confusion.add(testset.labels(i), predicted(i));
    e.metrics = compute_metrics(e.confusion);
    return e;
}

std::uint64_t test_set_seed(std::uint64_t seed, std::uint64_t index) {
    return mix64(seed ^ mix64(stream::kTestSet)) ^ mix64(index);
}

std::vector<ErrorRatePoint> nn_ser_curve(const DenseModel<float>& model, std::span<const double> snr_grid_db,
                                         std::int64_t trials_per_point, std::uint64_t seed,
                                         const ModulationConfig& config,
                                         const std::optional<InterferenceSpec>& interference) {
    if (trials_per_point < 1) throw DomainError("trials per point must be positive");
    std::vector<ErrorRatePoint> curve;
    for (std::size_t p = 0; p < snr_grid_db.size(); ++p) {
        const double snr = snr_grid_db[p];
        const Dataset testset =
            build_dataset(trials_per_point, {snr, snr}, test_set_seed(seed, p), config, interference);
        const Evaluation e = evaluate(model, testset);
        curve.push_back(make_error_rate_point(snr, e.metrics.error_rate, config));
    }
    return curve;
}

double crossing_at(std::span<const double> x, std::span<const double> y, double target) {
    if (x.size() != y.size() || x.size() < 2) throw RangeError("need at least two points to interpolate");
    if (!(target > 0.0)) throw DomainError("target BER must be positive");
    if (y[0] <= target) throw RangeError("curve starts below the target BER");
    for (std::size_t i = 1; i < y.size(); ++i) {
        if (y[i] > target) continue;
        const double x0 = x[i - 1], x1 = x[i];
        if (y[i] > 0.0) {
            const double l0 = std::log10(y[i - 1]), l1 = std::log10(y[i]);
            return x0 + (std::log10(target) - l0) * (x1 - x0) / (l1 - l0);
        }
        // A zero-error point has no logarithm; fall back to linear BER.
        return x0 + (target - y[i - 1]) * (x1 - x0) / (y[i] - y[i - 1]);
    }
    throw RangeError("curve never falls below the target BER");
}

double gap_at_ber(std::span<const ErrorRatePoint> curve, double target_ber) {
    std::vector<ErrorRatePoint> sorted(curve.begin(), curve.end());
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.ebn0_db < b.ebn0_db; });
    std::vector<double> x, measured, theory;
    for (const auto& p : sorted) {
        x.push_back(p.ebn0_db);
        measured.push_back(p.ber);
        theory.push_back(p.theoretical_ber);
    }
    return crossing_at(x, measured, target_ber) - crossing_at(x, theory, target_ber);
}

LatencyStats bench_inference(const DenseModel<float>& model, int iterations, const ModulationConfig& config) {
    if (iterations < 100) throw DomainError("benchmark needs at least 100 iterations");
    const Dataset frames = build_dataset(16, {-10.0, -10.0}, 0xbe7c4ULL, config);
    std::vector<double> us;
    us.reserve(static_cast<std::size_t>(iterations));
    volatile float sink = 0.0f;
    for (int w = 0; w < 10; ++w) sink = sink + model.infer(frames.samples.col(w % 16))(0, 0);
    for (int i = 0; i < iterations; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        const Matrix<float> probs = model.infer(frames.samples.col(i % 16));
        const auto t1 = std::chrono::steady_clock::now();
        sink = sink + probs(0, 0);
        us.push_back(std::chrono::duration<double, std::micro>(t1 - t0).count());
    }
    LatencyStats s;
    s.iterations = iterations;
    double sum = 0.0;
    for (double v : us) sum += v;
    s.mean_us = sum / iterations;
    std::sort(us.begin(), us.end());
    s.p95_us = us[static_cast<std::size_t>(std::ceil(0.95 * iterations)) - 1];
    s.real_time = s.mean_us < config.symbol_duration_s * 1e6;
    return s;
}

namespace {

std::ofstream open_csv(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.precision(10);
    return out;
}

}  // namespace

void write_confusion_csv(const ConfusionMatrix& confusion, const std::filesystem::path& path) {
    auto out = open_csv(path);
    out << "truth";
    for (int p = 0; p < confusion.classes(); ++p) out << ",pred_" << p;
    out << '\n';
    for (int t = 0; t < confusion.classes(); ++t) {
        out << t;
        for (int p = 0; p < confusion.classes(); ++p) out << ',' << confusion(t, p);
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path.string());
}

void write_metrics_csv(const MetricsReport& metrics, const std::filesystem::path& path) {
    auto out = open_csv(path);
    out << "class,precision,recall\n";
    for (Eigen::Index i = 0; i < metrics.precision.size(); ++i)
        out << i << ',' << metrics.precision(i) << ',' << metrics.recall(i) << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

void write_summary_csv(const MetricsReport& metrics, const std::filesystem::path& path) {
    auto out = open_csv(path);
    out << "error_rate,accuracy,macro_precision,macro_recall,micro_precision,micro_recall\n";
    out << metrics.error_rate << ',' << metrics.accuracy << ',' << metrics.macro_precision << ','
        << metrics.macro_recall << ',' << metrics.micro_precision << ',' << metrics.micro_recall << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace mfsk
