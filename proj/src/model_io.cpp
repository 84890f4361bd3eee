#include <string>

#include "binary_io.hpp"
#include "mfsk/nn.hpp"

namespace mfsk {

namespace {

constexpr std::string_view kMagic = "MFSK65NN";
constexpr std::uint16_t kVersion = 1;

enum class LayerKind : std::uint8_t { BatchNorm = 0, Dense = 1, Relu = 2, Softmax = 3 };

// Guards against absurd dimensions in corrupt headers before allocating.
constexpr std::uint32_t kMaxWidth = 1u << 20;
constexpr std::uint32_t kMaxLayers = 1024;

void put_vector(detail::ByteWriter& w, const Vector<float>& v) {
    for (float x : v) w.put(x);
}

Vector<float> get_vector(detail::ByteReader& r, std::uint32_t n) {
    Vector<float> v(n);
    for (std::uint32_t i = 0; i < n; ++i) v(i) = r.get<float>();
    return v;
}

std::uint32_t get_width(detail::ByteReader& r) {
    const auto w = r.get<std::uint32_t>();
    if (w == 0 || w > kMaxWidth) throw FormatError("layer width out of range: " + std::to_string(w));
    return w;
}

}  // namespace

void save_model(const DenseModel<float>& model, const std::filesystem::path& path) {
    detail::ByteWriter w;
    w.put_bytes(kMagic);
    w.put(kVersion);
    const auto& layers = model.layers();
    w.put(static_cast<std::uint32_t>(layers.size() + 1));
    for (const auto& layer : layers) {
        if (const auto* bn = std::get_if<BatchNormLayer<float>>(&layer)) {
            w.put(LayerKind::BatchNorm);
            w.put(static_cast<std::uint32_t>(bn->features()));
        } else if (const auto* d = std::get_if<DenseLayer<float>>(&layer)) {
            w.put(LayerKind::Dense);
            w.put(static_cast<std::uint32_t>(d->in_features()));
            w.put(static_cast<std::uint32_t>(d->out_features()));
        } else {
            w.put(LayerKind::Relu);
            w.put(static_cast<std::uint32_t>(std::get<ReluLayer>(layer).features));
        }
    }
    w.put(LayerKind::Softmax);
    w.put(static_cast<std::uint32_t>(model.output_width()));

    for (const auto& layer : layers) {
        if (const auto* bn = std::get_if<BatchNormLayer<float>>(&layer)) {
            put_vector(w, bn->gamma);
            put_vector(w, bn->beta);
            put_vector(w, bn->moving_mean);
            put_vector(w, bn->moving_variance);
        } else if (const auto* d = std::get_if<DenseLayer<float>>(&layer)) {
            for (Eigen::Index r = 0; r < d->weights.rows(); ++r)
                for (Eigen::Index c = 0; c < d->weights.cols(); ++c) w.put(d->weights(r, c));
            put_vector(w, d->bias);
        }
    }
    w.commit(path);
}

DenseModel<float> load_model(const std::filesystem::path& path) {
    auto r = detail::ByteReader::from_file(path);
    const std::string where = path.string() + ": ";
    if (r.get_bytes(kMagic.size()) != kMagic) throw FormatError(where + "not a model file (bad magic)");
    const auto version = r.get<std::uint16_t>();
    if (version != kVersion) throw FormatError(where + "unsupported model version " + std::to_string(version));

    const auto count = r.get<std::uint32_t>();
    if (count < 2 || count > kMaxLayers) throw FormatError(where + "bad layer count");

    struct Descriptor {
        LayerKind kind;
        std::uint32_t in;
        std::uint32_t out;
    };
    std::vector<Descriptor> table;
    for (std::uint32_t i = 0; i < count; ++i) {
        const auto kind = r.get<std::uint8_t>();
        switch (static_cast<LayerKind>(kind)) {
            case LayerKind::Dense: {
                const auto in = get_width(r);
                table.push_back({LayerKind::Dense, in, get_width(r)});
                break;
            }
            case LayerKind::BatchNorm:
            case LayerKind::Relu:
            case LayerKind::Softmax: {
                const auto f = get_width(r);
                table.push_back({static_cast<LayerKind>(kind), f, f});
                break;
            }
            default:
                throw FormatError(where + "unknown layer kind " + std::to_string(kind));
        }
    }
    if (table.back().kind != LayerKind::Softmax) throw FormatError(where + "layer table must end with softmax");
    for (std::size_t i = 0; i + 1 < table.size(); ++i) {
        if (table[i].kind == LayerKind::Softmax) throw FormatError(where + "softmax only allowed as the last layer");
        if (table[i].out != table[i + 1].in) throw FormatError(where + "layer widths do not chain");
    }

    std::size_t needed = 0;
    for (const auto& d : table) {
        if (d.kind == LayerKind::BatchNorm) needed += 4ull * 4 * d.in;
        if (d.kind == LayerKind::Dense) needed += 4ull * (static_cast<std::size_t>(d.in) * d.out + d.out);
    }
    if (r.remaining() != needed) throw FormatError(where + "parameter payload size mismatch");

    std::vector<Layer<float>> layers;
    for (const auto& d : table) {
        if (d.kind == LayerKind::BatchNorm) {
            BatchNormLayer<float> bn(static_cast<int>(d.in));
            bn.gamma = get_vector(r, d.in);
            bn.beta = get_vector(r, d.in);
            bn.moving_mean = get_vector(r, d.in);
            bn.moving_variance = get_vector(r, d.in);
            if (!(bn.moving_variance.array() > 0.0f).all())
                throw FormatError(where + "batch-norm moving variance must be positive");
            layers.emplace_back(std::move(bn));
        } else if (d.kind == LayerKind::Dense) {
            DenseLayer<float> dense{Matrix<float>(d.out, d.in), Vector<float>()};
            for (std::uint32_t row = 0; row < d.out; ++row)
                for (std::uint32_t col = 0; col < d.in; ++col) dense.weights(row, col) = r.get<float>();
            dense.bias = get_vector(r, d.out);
            layers.emplace_back(std::move(dense));
        } else if (d.kind == LayerKind::Relu) {
            layers.emplace_back(ReluLayer{static_cast<int>(d.in)});
        }
    }
    try {
        DenseModel<float> model(std::move(layers));
        model.set_mode(Mode::Inference);
        return model;
    } catch (const ShapeError& e) {
        throw FormatError(where + e.what());
    }
}

}  // namespace mfsk
