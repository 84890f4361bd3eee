#include "mfsk/modem.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "mfsk/errors.hpp"

namespace mfsk {

ModulationConfig ModulationConfig::jt65a(SpacingMode mode) {
    ModulationConfig c;
    c.spacing_mode = mode;
    c.tone_spacing_hz = mode == SpacingMode::Orthogonal ? c.sample_rate_hz / c.frame_len
                                                        : kPaperToneSpacingHz;
    return c;
}

void ModulationConfig::validate() const {
    if (alphabet_size < 2 || !std::has_single_bit(static_cast<unsigned>(alphabet_size)))
        throw DomainError("alphabet size must be a power of two >= 2");
    if (std::countr_zero(static_cast<unsigned>(alphabet_size)) != bits_per_symbol)
        throw DomainError("bits_per_symbol must equal log2(alphabet_size)");
    if (!(sample_rate_hz > 0.0) || frame_len <= 0 || !(symbol_duration_s > 0.0) || !(bandwidth_hz > 0.0))
        throw DomainError("sample rate, frame length, symbol duration and bandwidth must be positive");
    if (std::abs(frame_duration_s() - symbol_duration_s) > 1e-3)
        throw DomainError("frame_len / sample_rate_hz must match symbol_duration_s within 1 ms");
    if (spacing_mode == SpacingMode::Orthogonal && tone_spacing_hz != bin_spacing_hz())
        throw DomainError("orthogonal spacing must equal sample_rate_hz / frame_len");
    if (!(base_freq_hz > 0.0) || base_freq_hz > bandwidth_hz)
        throw DomainError("sync tone outside (0, W]");
    const double top = tone_frequency(alphabet_size - 1, *this);
    if (!(tone_frequency(0, *this) > 0.0) || top > bandwidth_hz || top >= nyquist_hz())
        throw DomainError("tone grid outside (0, W]");
}

namespace {

void check_symbol(int m, const ModulationConfig& config) {
    if (m < 0 || m >= config.alphabet_size)
        throw DomainError("symbol index " + std::to_string(m) + " out of range");
}

}  // namespace

double tone_frequency(int m, const ModulationConfig& config) {
    check_symbol(m, config);
    if (config.spacing_mode == SpacingMode::Orthogonal) {
        const double bin = config.bin_spacing_hz();
        const double anchor = std::round(config.base_freq_hz / bin);
        return (anchor + m + 2) * bin;
    }
    return config.base_freq_hz + config.tone_spacing_hz * (m + 2);
}

int tone_bin(int m, const ModulationConfig& config) {
    return static_cast<int>(std::lround(tone_frequency(m, config) / config.bin_spacing_hz()));
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double linear_to_db(double ratio) { return 10.0 * std::log10(ratio); }

double snr_to_ebn0(double snr_db, const ModulationConfig& config) {
    return snr_db + linear_to_db(config.bandwidth_hz / config.data_rate_bps());
}

double ebn0_to_snr(double ebn0_db, const ModulationConfig& config) {
    return ebn0_db - linear_to_db(config.bandwidth_hz / config.data_rate_bps());
}

LinkBudget link_budget(double snr_db, const ModulationConfig& config) {
    return {snr_db, snr_to_ebn0(snr_db, config), config.data_rate_bps(), config.bandwidth_hz};
}

double snr_to_es_n0(double snr_db, const ModulationConfig& config) {
    return db_to_linear(snr_db) * config.bandwidth_hz * config.frame_duration_s();
}

double es_n0_to_snr(double es_n0_linear, const ModulationConfig& config) {
    return linear_to_db(es_n0_linear / (config.bandwidth_hz * config.frame_duration_s()));
}

double ser_to_ber(double pe, int alphabet_size) {
    if (!(pe >= 0.0 && pe <= 1.0)) throw DomainError("symbol error rate outside [0, 1]");
    if (alphabet_size < 2) throw DomainError("alphabet size must be >= 2");
    const double m = alphabet_size;
    return pe * (m / 2.0) / (m - 1.0);
}

ErrorRates error_rates(double pe, int alphabet_size) { return {pe, ser_to_ber(pe, alphabet_size)}; }

double theoretical_ber_noncoherent(double ebn0_db) {
    return 0.5 * std::exp(-0.5 * db_to_linear(ebn0_db));
}

double exact_noncoherent_ser(double es_n0_linear, int alphabet_size) {
    using Wide = boost::multiprecision::cpp_bin_float_100;
    if (alphabet_size < 2 || alphabet_size > 256) throw DomainError("alphabet size must be in [2, 256]");
    if (!(es_n0_linear >= 0.0)) throw DomainError("Es/N0 must be non-negative");
    if (std::isinf(es_n0_linear)) return 0.0;

    const int n = alphabet_size - 1;
    const Wide es = es_n0_linear;
    Wide binom = 1;
    Wide sum = 0;
    for (int j = 1; j <= n; ++j) {
        binom = binom * (n - j + 1) / j;
        Wide term = binom / (j + 1) * exp(-es * j / (j + 1));
        sum += (j % 2 == 1) ? term : Wide(-term);
    }
    const double pe = sum.convert_to<double>();
    const double upper = static_cast<double>(n) / alphabet_size;
    return std::clamp(pe, 0.0, upper);
}

}  // namespace mfsk
