#pragma once

#include <cstdint>

namespace mfsk {

enum class SpacingMode : std::uint8_t {
    // Tones sit exactly on DFT bins of the 4096-sample frame (spacing fs/N).
    Orthogonal = 0,
    // Spacing of 2.6817 Hz as printed for JT65A.
    PaperLiteral = 1,
};

inline constexpr double kPaperToneSpacingHz = 2.6817;

struct ModulationConfig {
    double sample_rate_hz = 11025.0;
    int frame_len = 4096;
    int alphabet_size = 64;
    int bits_per_symbol = 6;
    double symbol_duration_s = 0.3715;
    double base_freq_hz = 1270.5;
    double tone_spacing_hz = 11025.0 / 4096.0;
    double bandwidth_hz = 2500.0;
    SpacingMode spacing_mode = SpacingMode::Orthogonal;

    static ModulationConfig jt65a(SpacingMode mode = SpacingMode::Orthogonal);

    double nyquist_hz() const { return sample_rate_hz / 2.0; }
    double frame_duration_s() const { return frame_len / sample_rate_hz; }
    double bin_spacing_hz() const { return sample_rate_hz / frame_len; }
    // R = k / T.
    double data_rate_bps() const { return bits_per_symbol / symbol_duration_s; }

    // Throws DomainError when an invariant does not hold.
    void validate() const;
};

// Frequency of data symbol m. In Orthogonal mode the grid is anchored at the
// DFT bin nearest the sync tone, so every data tone is an exact bin centre.
double tone_frequency(int m, const ModulationConfig& config);

// DFT bin index closest to tone m (exact in Orthogonal mode).
int tone_bin(int m, const ModulationConfig& config);

inline double sync_tone_frequency(const ModulationConfig& config) { return config.base_freq_hz; }

struct LinkBudget {
    double snr_db;
    double ebn0_db;
    double data_rate_bps;
    double bandwidth_hz;
};

struct ErrorRates {
    double ser;
    double ber;
};

double db_to_linear(double db);
double linear_to_db(double ratio);

// Eb/N0 = S/N * W/R, evaluated in dB.
double snr_to_ebn0(double snr_db, const ModulationConfig& config);
double ebn0_to_snr(double ebn0_db, const ModulationConfig& config);
LinkBudget link_budget(double snr_db, const ModulationConfig& config);

// Es/N0 (linear) of one frame for a tone at the given in-band SNR. Uses the
// true frame duration N/fs.
double snr_to_es_n0(double snr_db, const ModulationConfig& config);
double es_n0_to_snr(double es_n0_linear, const ModulationConfig& config);

// Pb = Pe * (M/2)/(M-1).
double ser_to_ber(double pe, int alphabet_size);
ErrorRates error_rates(double pe, int alphabet_size);

// Pb = 1/2 exp(-Eb/N0 / 2), the non-coherent orthogonal limit used as the
// reference curve.
double theoretical_ber_noncoherent(double ebn0_db);

// Symbol error probability of non-coherent orthogonal M-FSK in AWGN.
// The alternating binomial sum cancels catastrophically in double precision
// for M=64, so it is evaluated in 100-digit binary floating point.
// Supports 2 <= M <= 256.
double exact_noncoherent_ser(double es_n0_linear, int alphabet_size);

}  // namespace mfsk
