#include "mfsk/nn.hpp"

#include <cmath>
#include <string>

#include "mfsk/errors.hpp"
#include "mfsk/rng.hpp"

namespace mfsk {

namespace {

template <typename Scalar>
int layer_in_width(const Layer<Scalar>& layer) {
    if (const auto* bn = std::get_if<BatchNormLayer<Scalar>>(&layer)) return bn->features();
    if (const auto* d = std::get_if<DenseLayer<Scalar>>(&layer)) return d->in_features();
    return std::get<ReluLayer>(layer).features;
}

template <typename Scalar>
int layer_out_width(const Layer<Scalar>& layer) {
    if (const auto* d = std::get_if<DenseLayer<Scalar>>(&layer)) return d->out_features();
    return layer_in_width(layer);
}

}  // namespace

template <typename Scalar>
DenseModel<Scalar>::DenseModel(std::vector<Layer<Scalar>> layers) : layers_(std::move(layers)) {
    if (layers_.empty()) throw ShapeError("model has no layers");
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        if (layer_in_width(layers_[i]) <= 0) throw ShapeError("layer " + std::to_string(i) + " has no features");
        if (const auto* d = std::get_if<DenseLayer<Scalar>>(&layers_[i]); d && d->bias.size() != d->out_features())
            throw ShapeError("dense bias size mismatch at layer " + std::to_string(i));
        if (const auto* bn = std::get_if<BatchNormLayer<Scalar>>(&layers_[i])) {
            const auto f = bn->gamma.size();
            if (bn->beta.size() != f || bn->moving_mean.size() != f || bn->moving_variance.size() != f)
                throw ShapeError("batch-norm parameter size mismatch at layer " + std::to_string(i));
        }
        if (i > 0 && layer_out_width(layers_[i - 1]) != layer_in_width(layers_[i]))
            throw ShapeError("layer " + std::to_string(i) + " input width does not match previous output");
    }
}

template <typename Scalar>
int DenseModel<Scalar>::input_width() const {
    return layers_.empty() ? 0 : layer_in_width(layers_.front());
}

template <typename Scalar>
int DenseModel<Scalar>::output_width() const {
    return layers_.empty() ? 0 : layer_out_width(layers_.back());
}

template <typename Scalar>
ParameterCounts DenseModel<Scalar>::parameter_counts() const {
    ParameterCounts c;
    for (const auto& layer : layers_) {
        if (const auto* bn = std::get_if<BatchNormLayer<Scalar>>(&layer)) {
            c.batch_norm_trainable += bn->gamma.size() + bn->beta.size();
            c.batch_norm_non_trainable += bn->moving_mean.size() + bn->moving_variance.size();
        } else if (const auto* d = std::get_if<DenseLayer<Scalar>>(&layer)) {
            c.dense += d->weights.size() + d->bias.size();
        }
    }
    c.trainable = c.dense + c.batch_norm_trainable;
    c.non_trainable = c.batch_norm_non_trainable;
    c.total = c.trainable + c.non_trainable;
    return c;
}

template <typename Scalar>
void DenseModel<Scalar>::check_input(const Eigen::Ref<const Matrix<Scalar>>& inputs) const {
    if (layers_.empty()) throw StateError("forward on an empty model");
    if (inputs.rows() != input_width())
        throw ShapeError("input width " + std::to_string(inputs.rows()) + ", model expects " +
                         std::to_string(input_width()));
    if (inputs.cols() == 0) throw DomainError("forward on an empty batch");
}

template <typename Scalar>
Matrix<Scalar> DenseModel<Scalar>::inference_logits(const Eigen::Ref<const Matrix<Scalar>>& inputs) const {
    check_input(inputs);
    const auto eps = static_cast<Scalar>(kBatchNormEpsilon);
    Matrix<Scalar> x = inputs;
    for (const auto& layer : layers_) {
        if (const auto* bn = std::get_if<BatchNormLayer<Scalar>>(&layer)) {
            // Folded into one scale and shift per feature.
            const Vector<Scalar> scale = bn->gamma.array() * (bn->moving_variance.array() + eps).rsqrt();
            const Vector<Scalar> shift = bn->beta.array() - bn->moving_mean.array() * scale.array();
            x.array().colwise() *= scale.array();
            x.colwise() += shift;
        } else if (const auto* d = std::get_if<DenseLayer<Scalar>>(&layer)) {
            Matrix<Scalar> y = d->weights * x;
            y.colwise() += d->bias;
            x = std::move(y);
        } else {
            x = x.cwiseMax(Scalar(0));
        }
    }
    return x;
}

template <typename Scalar>
Matrix<Scalar> DenseModel<Scalar>::infer(const Eigen::Ref<const Matrix<Scalar>>& inputs) const {
    return softmax<Scalar>(inference_logits(inputs));
}

template <typename Scalar>
Matrix<Scalar> DenseModel<Scalar>::run(const Eigen::Ref<const Matrix<Scalar>>& inputs, bool keep_cache) {
    if (mode_ == Mode::Inference) return inference_logits(inputs);
    check_input(inputs);

    const auto batch = static_cast<Scalar>(inputs.cols());
    if (keep_cache) cache_.assign(layers_.size(), Cache{});

    Matrix<Scalar> x = inputs;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        auto& layer = layers_[i];
        if (auto* bn = std::get_if<BatchNormLayer<Scalar>>(&layer)) {
            const auto eps = static_cast<Scalar>(kBatchNormEpsilon);
            const Vector<Scalar> mean = x.rowwise().mean();
            x.colwise() -= mean;
            const Vector<Scalar> var = x.array().square().rowwise().sum() / batch;
            const Vector<Scalar> inv_std = (var.array() + eps).rsqrt();
            x.array().colwise() *= inv_std.array();
            if (keep_cache) {
                cache_[i].normalized = x;
                cache_[i].inv_std = inv_std;
            }
            const auto mom = static_cast<Scalar>(kBatchNormMomentum);
            bn->moving_mean = mom * bn->moving_mean + (Scalar(1) - mom) * mean;
            bn->moving_variance = mom * bn->moving_variance + (Scalar(1) - mom) * var;
            x.array().colwise() *= bn->gamma.array();
            x.colwise() += bn->beta;
        } else if (auto* d = std::get_if<DenseLayer<Scalar>>(&layer)) {
            Matrix<Scalar> y = d->weights * x;
            y.colwise() += d->bias;
            if (keep_cache) cache_[i].input = std::move(x);
            x = std::move(y);
        } else {
            if (keep_cache) cache_[i].input = x;
            x = x.cwiseMax(Scalar(0));
        }
    }
    return x;
}

template <typename Scalar>
Matrix<Scalar> DenseModel<Scalar>::logits(const Eigen::Ref<const Matrix<Scalar>>& inputs) {
    cached_probs_.reset();
    return run(inputs, false);
}

template <typename Scalar>
Matrix<Scalar> DenseModel<Scalar>::forward(const Eigen::Ref<const Matrix<Scalar>>& inputs) {
    const bool training = mode_ == Mode::Training;
    cached_probs_.reset();
    Matrix<Scalar> probs = softmax<Scalar>(run(inputs, training));
    if (training) cached_probs_ = probs;
    return probs;
}

template <typename Scalar>
Gradients<Scalar> DenseModel<Scalar>::backward(const Eigen::Ref<const Matrix<Scalar>>& targets) {
    if (!cached_probs_) throw StateError("backward() requires a preceding training-mode forward()");
    const Matrix<Scalar>& probs = *cached_probs_;
    if (targets.rows() != probs.rows() || targets.cols() != probs.cols())
        throw ShapeError("targets shape does not match the cached forward pass");

    const auto batch = static_cast<Scalar>(probs.cols());
    Matrix<Scalar> grad = (probs - targets) / batch;

    // Filled back to front, then reversed into stack order.
    std::vector<Vector<Scalar>> reversed;
    for (std::size_t idx = layers_.size(); idx-- > 0;) {
        auto& layer = layers_[idx];
        const bool need_input_grad = idx > 0;
        if (auto* bn = std::get_if<BatchNormLayer<Scalar>>(&layer)) {
            const Matrix<Scalar>& xhat = cache_[idx].normalized;
            const Vector<Scalar> dbeta = grad.rowwise().sum();
            const Vector<Scalar> dgamma = grad.cwiseProduct(xhat).rowwise().sum();
            if (need_input_grad) {
                // dx = inv_std / B * (B dxhat - sum(dxhat) - xhat * sum(dxhat xhat)),
                // with dxhat = gamma * dy, so the sums are gamma * dbeta and gamma * dgamma.
                grad.array().colwise() *= bn->gamma.array();
                const Vector<Scalar> sum_d = bn->gamma.cwiseProduct(dbeta);
                const Vector<Scalar> sum_dx = bn->gamma.cwiseProduct(dgamma);
                grad *= batch;
                grad.colwise() -= sum_d;
                grad.array() -= xhat.array().colwise() * sum_dx.array();
                grad.array().colwise() *= (cache_[idx].inv_std.array() / batch);
            }
            reversed.push_back(dbeta);
            reversed.push_back(dgamma);
        } else if (auto* d = std::get_if<DenseLayer<Scalar>>(&layer)) {
            const Matrix<Scalar> dw = grad * cache_[idx].input.transpose();
            reversed.push_back(grad.rowwise().sum());
            reversed.push_back(Eigen::Map<const Vector<Scalar>>(dw.data(), dw.size()));
            if (need_input_grad) grad = d->weights.transpose() * grad;
        } else {
            grad = (cache_[idx].input.array() > Scalar(0)).select(grad, Scalar(0));
        }
    }
    return {std::vector<Vector<Scalar>>(reversed.rbegin(), reversed.rend())};
}

template <typename Scalar>
Matrix<Scalar> softmax(const Eigen::Ref<const Matrix<Scalar>>& logits) {
    Matrix<Scalar> out = logits;
    out.rowwise() -= out.colwise().maxCoeff();
    out = out.array().exp();
    out.array().rowwise() /= out.colwise().sum().array();
    return out;
}

template <typename Scalar>
Scalar cross_entropy(const Eigen::Ref<const Matrix<Scalar>>& targets,
                     const Eigen::Ref<const Matrix<Scalar>>& predictions) {
    if (targets.rows() != predictions.rows() || targets.cols() != predictions.cols())
        throw ShapeError("cross_entropy: targets and predictions differ in shape");
    if (targets.cols() == 0) throw DomainError("cross_entropy of an empty batch");
    const auto clamp = static_cast<Scalar>(kLogClamp);
    const Scalar total = -(targets.array() * predictions.array().max(clamp).min(Scalar(1)).log()).sum();
    return total / static_cast<Scalar>(targets.cols());
}

template <typename Scalar>
Matrix<Scalar> one_hot(const Eigen::Ref<const Eigen::VectorXi>& labels, int classes) {
    Matrix<Scalar> out = Matrix<Scalar>::Zero(classes, labels.size());
    for (Eigen::Index i = 0; i < labels.size(); ++i) {
        if (labels(i) < 0 || labels(i) >= classes) throw DomainError("label out of range");
        out(labels(i), i) = Scalar(1);
    }
    return out;
}

template <typename Scalar>
DenseModel<Scalar> init_model(std::uint64_t seed, const Architecture& arch) {
    if (arch.input_width <= 0 || arch.output_width <= 0) throw DomainError("architecture widths must be positive");
    std::vector<Layer<Scalar>> layers;
    std::uint64_t dense_index = 0;
    auto dense = [&](int in, int out) {
        Rng rng = Rng::substream(seed, stream::kInit, dense_index++);
        const double limit = std::sqrt(6.0 / (in + out));
        DenseLayer<Scalar> d{Matrix<Scalar>(out, in), Vector<Scalar>::Zero(out)};
        // Row-major fill order, matching the on-disk weight layout.
        for (int r = 0; r < out; ++r)
            for (int c = 0; c < in; ++c) d.weights(r, c) = static_cast<Scalar>(rng.uniform(-limit, limit));
        return d;
    };

    layers.emplace_back(BatchNormLayer<Scalar>(arch.input_width));
    int width = arch.input_width;
    for (int hidden : arch.hidden_widths) {
        if (hidden <= 0) throw DomainError("architecture widths must be positive");
        layers.emplace_back(dense(width, hidden));
        if (arch.placement == BatchNormPlacement::BeforeActivation) {
            layers.emplace_back(BatchNormLayer<Scalar>(hidden));
            layers.emplace_back(ReluLayer{hidden});
        } else {
            layers.emplace_back(ReluLayer{hidden});
            layers.emplace_back(BatchNormLayer<Scalar>(hidden));
        }
        width = hidden;
    }
    layers.emplace_back(dense(width, arch.output_width));
    return DenseModel<Scalar>(std::move(layers));
}

template <typename Scalar>
AdamState<Scalar> make_adam_state(DenseModel<Scalar>& model, double lr) {
    AdamState<Scalar> s;
    s.lr = lr;
    model.for_each_trainable([&](auto flat) {
        s.m.push_back(Vector<Scalar>::Zero(flat.size()));
        s.v.push_back(Vector<Scalar>::Zero(flat.size()));
    });
    return s;
}

template <typename Scalar>
void adam_step(AdamState<Scalar>& state, DenseModel<Scalar>& model, const Gradients<Scalar>& gradients) {
    if (gradients.tensors.size() != state.m.size() || state.v.size() != state.m.size())
        throw ShapeError("gradient tensor count does not match optimizer state");
    std::size_t k = 0;
    model.for_each_trainable([&](auto flat) {
        if (k >= gradients.tensors.size() || gradients.tensors[k].size() != flat.size() ||
            state.m[k].size() != flat.size())
            throw ShapeError("gradient shape mismatch at trainable tensor " + std::to_string(k));
        ++k;
    });
    if (k != gradients.tensors.size()) throw ShapeError("gradient tensor count does not match model");

    ++state.step;
    const double t = static_cast<double>(state.step);
    const auto b1 = static_cast<Scalar>(state.beta1);
    const auto b2 = static_cast<Scalar>(state.beta2);
    const auto c1 = static_cast<Scalar>(1.0 / (1.0 - std::pow(state.beta1, t)));
    const auto c2 = static_cast<Scalar>(1.0 / (1.0 - std::pow(state.beta2, t)));
    const auto lr = static_cast<Scalar>(state.lr);
    const auto eps = static_cast<Scalar>(state.epsilon);

    k = 0;
    model.for_each_trainable([&](auto flat) {
        const auto& g = gradients.tensors[k].array();
        auto m = state.m[k].array();
        auto v = state.v[k].array();
        m = b1 * m + (Scalar(1) - b1) * g;
        v = b2 * v + (Scalar(1) - b2) * g.square();
        flat.array() -= lr * (m * c1) / ((v * c2).sqrt() + eps);
        ++k;
    });
}

template class DenseModel<float>;
template class DenseModel<double>;

#define MFSK_INSTANTIATE(S)                                                                                  \
    template DenseModel<S> init_model<S>(std::uint64_t, const Architecture&);                                \
    template Matrix<S> softmax<S>(const Eigen::Ref<const Matrix<S>>&);                                       \
    template S cross_entropy<S>(const Eigen::Ref<const Matrix<S>>&, const Eigen::Ref<const Matrix<S>>&);     \
    template Matrix<S> one_hot<S>(const Eigen::Ref<const Eigen::VectorXi>&, int);                            \
    template AdamState<S> make_adam_state<S>(DenseModel<S>&, double);                                        \
    template void adam_step<S>(AdamState<S>&, DenseModel<S>&, const Gradients<S>&);

MFSK_INSTANTIATE(float)
MFSK_INSTANTIATE(double)

#undef MFSK_INSTANTIATE

}  // namespace mfsk
