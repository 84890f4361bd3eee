#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace mfsk {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Batches are stored one sample per column: inputs are features x B,
// predictions are classes x B.

template <typename Scalar>
struct DenseLayer {
    Matrix<Scalar> weights;  // out x in
    Vector<Scalar> bias;     // out

    int in_features() const { return static_cast<int>(weights.cols()); }
    int out_features() const { return static_cast<int>(weights.rows()); }
};

template <typename Scalar>
struct BatchNormLayer {
    Vector<Scalar> gamma;
    Vector<Scalar> beta;
    Vector<Scalar> moving_mean;
    Vector<Scalar> moving_variance;

    explicit BatchNormLayer(int features = 0)
        : gamma(Vector<Scalar>::Ones(features)),
          beta(Vector<Scalar>::Zero(features)),
          moving_mean(Vector<Scalar>::Zero(features)),
          moving_variance(Vector<Scalar>::Ones(features)) {}

    int features() const { return static_cast<int>(gamma.size()); }
};

struct ReluLayer {
    int features = 0;
};

template <typename Scalar>
using Layer = std::variant<BatchNormLayer<Scalar>, DenseLayer<Scalar>, ReluLayer>;

enum class Mode { Training, Inference };

// Where the hidden batch-norm layers sit relative to ReLU. Both placements
// give identical parameter counts.
enum class BatchNormPlacement { AfterActivation, BeforeActivation };

struct Architecture {
    int input_width = 4096;
    std::vector<int> hidden_widths{256, 128};
    int output_width = 64;
    BatchNormPlacement placement = BatchNormPlacement::BeforeActivation;

    static Architecture standard() { return {}; }
};

struct ParameterCounts {
    std::int64_t total = 0;
    std::int64_t trainable = 0;
    std::int64_t non_trainable = 0;
    std::int64_t dense = 0;
    std::int64_t batch_norm_trainable = 0;
    std::int64_t batch_norm_non_trainable = 0;
};

inline constexpr double kBatchNormMomentum = 0.99;
inline constexpr double kBatchNormEpsilon = 1e-3;
inline constexpr double kLogClamp = 1e-7;

// One gradient tensor per trainable tensor, flattened, in stack order
// (BatchNorm: gamma, beta; Dense: weights column-major, bias).
template <typename Scalar>
struct Gradients {
    std::vector<Vector<Scalar>> tensors;
};

// Batch-norm / dense / ReLU stack with a softmax head.
template <typename Scalar>
class DenseModel {
public:
    DenseModel() = default;
    // Throws ShapeError when consecutive layer widths do not chain.
    explicit DenseModel(std::vector<Layer<Scalar>> layers);

    const std::vector<Layer<Scalar>>& layers() const { return layers_; }
    std::vector<Layer<Scalar>>& layers() { return layers_; }

    int input_width() const;
    int output_width() const;

    Mode mode() const { return mode_; }
    void set_mode(Mode mode) { mode_ = mode; }

    ParameterCounts parameter_counts() const;

    // Softmax probabilities. Training mode normalizes with batch statistics,
    // updates moving statistics and caches activations for backward().
    Matrix<Scalar> forward(const Eigen::Ref<const Matrix<Scalar>>& inputs);
    Matrix<Scalar> logits(const Eigen::Ref<const Matrix<Scalar>>& inputs);

    // Inference-mode probabilities using moving statistics, whatever the
    // current mode. Const, so one model can serve many threads.
    Matrix<Scalar> infer(const Eigen::Ref<const Matrix<Scalar>>& inputs) const;

    // Gradients of the mean cross-entropy against one-hot targets for the
    // batch of the last training-mode forward(). Throws StateError otherwise.
    Gradients<Scalar> backward(const Eigen::Ref<const Matrix<Scalar>>& targets);

    // Visits every trainable tensor as a flat mutable view, in gradient order.
    template <typename Fn>
    void for_each_trainable(Fn&& fn);

    template <typename To>
    DenseModel<To> cast() const;

private:
    struct Cache {
        Matrix<Scalar> input;      // Dense: layer input; ReLU: layer input
        Matrix<Scalar> normalized;  // BatchNorm: x_hat
        Vector<Scalar> inv_std;     // BatchNorm
    };

    Matrix<Scalar> run(const Eigen::Ref<const Matrix<Scalar>>& inputs, bool keep_cache);
    Matrix<Scalar> inference_logits(const Eigen::Ref<const Matrix<Scalar>>& inputs) const;
    void check_input(const Eigen::Ref<const Matrix<Scalar>>& inputs) const;

    std::vector<Layer<Scalar>> layers_;
    Mode mode_ = Mode::Inference;
    std::vector<Cache> cache_;
    std::optional<Matrix<Scalar>> cached_probs_;
};

template <typename Scalar>
template <typename Fn>
void DenseModel<Scalar>::for_each_trainable(Fn&& fn) {
    using Flat = Eigen::Map<Vector<Scalar>>;
    for (auto& layer : layers_) {
        if (auto* bn = std::get_if<BatchNormLayer<Scalar>>(&layer)) {
            fn(Flat(bn->gamma.data(), bn->gamma.size()));
            fn(Flat(bn->beta.data(), bn->beta.size()));
        } else if (auto* d = std::get_if<DenseLayer<Scalar>>(&layer)) {
            fn(Flat(d->weights.data(), d->weights.size()));
            fn(Flat(d->bias.data(), d->bias.size()));
        }
    }
}

template <typename Scalar>
template <typename To>
DenseModel<To> DenseModel<Scalar>::cast() const {
    std::vector<Layer<To>> out;
    out.reserve(layers_.size());
    for (const auto& layer : layers_) {
        if (const auto* bn = std::get_if<BatchNormLayer<Scalar>>(&layer)) {
            BatchNormLayer<To> b(bn->features());
            b.gamma = bn->gamma.template cast<To>();
            b.beta = bn->beta.template cast<To>();
            b.moving_mean = bn->moving_mean.template cast<To>();
            b.moving_variance = bn->moving_variance.template cast<To>();
            out.emplace_back(std::move(b));
        } else if (const auto* d = std::get_if<DenseLayer<Scalar>>(&layer)) {
            out.emplace_back(DenseLayer<To>{d->weights.template cast<To>(), d->bias.template cast<To>()});
        } else {
            out.emplace_back(std::get<ReluLayer>(layer));
        }
    }
    DenseModel<To> m(std::move(out));
    m.set_mode(mode_);
    return m;
}

// Builds the stack for `arch`: BatchNorm at the input, then per hidden width
// a Dense + ReLU with a BatchNorm on the chosen side of the ReLU, then the
// output Dense. Dense weights ~ U(-l, l), l = sqrt(6 / (fan_in + fan_out));
// biases 0; gamma 1, beta 0, moving mean 0, moving variance 1.
template <typename Scalar>
DenseModel<Scalar> init_model(std::uint64_t seed, const Architecture& arch = Architecture::standard());

// Column-wise softmax (one probability vector per column).
template <typename Scalar>
Matrix<Scalar> softmax(const Eigen::Ref<const Matrix<Scalar>>& logits);

// Mean over the batch of -sum p log(max(q, kLogClamp)).
template <typename Scalar>
Scalar cross_entropy(const Eigen::Ref<const Matrix<Scalar>>& targets,
                     const Eigen::Ref<const Matrix<Scalar>>& predictions);

// classes x labels.size() one-hot matrix.
template <typename Scalar>
Matrix<Scalar> one_hot(const Eigen::Ref<const Eigen::VectorXi>& labels, int classes);

template <typename Scalar>
struct AdamState {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-7;
    std::int64_t step = 0;
    std::vector<Vector<Scalar>> m;
    std::vector<Vector<Scalar>> v;
};

// Accumulators zero-initialized to the shapes of the model's trainable tensors.
template <typename Scalar>
AdamState<Scalar> make_adam_state(DenseModel<Scalar>& model, double lr = 1e-3);

// One bias-corrected Adam update. Moving statistics are not touched.
template <typename Scalar>
void adam_step(AdamState<Scalar>& state, DenseModel<Scalar>& model, const Gradients<Scalar>& gradients);

// Little-endian "MFSK65NN" container; parameters stored as f32.
void save_model(const DenseModel<float>& model, const std::filesystem::path& path);
DenseModel<float> load_model(const std::filesystem::path& path);

}  // namespace mfsk
