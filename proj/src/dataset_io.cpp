#include <string>

#include "binary_io.hpp"
#include "mfsk/synthesis.hpp"

namespace mfsk {

namespace {
constexpr std::string_view kMagic = "MFSK65DS";
constexpr std::uint16_t kVersion = 1;
}  // namespace

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
    const auto count = dataset.size();
    const auto spr = dataset.samples.rows();
    if (dataset.labels.size() != count || dataset.snr_db.size() != count)
        throw ShapeError("dataset labels/snr do not match frame count");
    if (count > 0xffffffffLL) throw DomainError("dataset too large for the file format");

    detail::ByteWriter w;
    w.put_bytes(kMagic);
    w.put(kVersion);
    w.put(static_cast<std::uint32_t>(count));
    w.put(static_cast<std::uint32_t>(spr));
    w.put(static_cast<std::uint8_t>(dataset.config.spacing_mode));
    for (Eigen::Index i = 0; i < count; ++i) {
        w.put(static_cast<std::uint8_t>(dataset.labels(i)));
        w.put(dataset.snr_db(i));
        for (Eigen::Index n = 0; n < spr; ++n) w.put(dataset.samples(n, i));
    }
    w.commit(path);
}

Dataset load_dataset(const std::filesystem::path& path) {
    auto r = detail::ByteReader::from_file(path);
    if (r.get_bytes(kMagic.size()) != kMagic) throw FormatError(path.string() + ": not a dataset file (bad magic)");
    const auto version = r.get<std::uint16_t>();
    if (version != kVersion) throw FormatError(path.string() + ": unsupported dataset version " + std::to_string(version));
    const auto count = r.get<std::uint32_t>();
    const auto spr = r.get<std::uint32_t>();
    const auto mode = r.get<std::uint8_t>();
    if (mode > static_cast<std::uint8_t>(SpacingMode::PaperLiteral))
        throw FormatError(path.string() + ": unknown spacing mode");

    Dataset ds;
    ds.config = ModulationConfig::jt65a(static_cast<SpacingMode>(mode));
    if (spr != static_cast<std::uint32_t>(ds.config.frame_len))
        throw FormatError(path.string() + ": samples per record must be " + std::to_string(ds.config.frame_len));
    const std::size_t record = 1 + 4 + 4 * static_cast<std::size_t>(spr);
    if (r.remaining() != record * count) throw FormatError(path.string() + ": record payload size mismatch");

    ds.samples.resize(spr, count);
    ds.labels.resize(count);
    ds.snr_db.resize(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        const auto label = r.get<std::uint8_t>();
        if (label >= ds.config.alphabet_size) throw FormatError(path.string() + ": label out of range");
        ds.labels(i) = label;
        ds.snr_db(i) = r.get<float>();
        for (std::uint32_t n = 0; n < spr; ++n) ds.samples(n, i) = r.get<float>();
    }
    return ds;
}

}  // namespace mfsk
