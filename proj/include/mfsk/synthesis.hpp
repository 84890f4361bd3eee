#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include <Eigen/Core>

#include "mfsk/modem.hpp"
#include "mfsk/rng.hpp"

namespace mfsk {

// Power of a unit-amplitude tone; the reference for every SNR in the project.
inline constexpr double kToneAmplitude = 1.0;
inline constexpr double kSignalPower = kToneAmplitude * kToneAmplitude / 2.0;

// One symbol interval.
struct SignalFrame {
    Eigen::VectorXd samples;
    std::optional<int> label;
    std::optional<double> snr_db;
};

struct InterferenceSpec {
    double narrowband_power_fraction = 0.20;
    double pulse_power_fraction = 0.10;
    double pulse_duty_cycle = 0.01;
    std::uint64_t rng_seed = 0;
    // Narrowband interferer frequency range, re-drawn per frame.
    double narrowband_min_hz = 300.0;
    double narrowband_max_hz = 2500.0;

    void validate() const;
};

// Labeled frames stored column-wise in single precision (the on-disk
// precision), so a dataset survives a file round trip bit-exactly.
struct Dataset {
    ModulationConfig config;
    std::uint64_t seed = 0;
    Eigen::MatrixXf samples;  // frame_len x count
    Eigen::VectorXi labels;
    Eigen::VectorXf snr_db;

    Eigen::Index size() const { return samples.cols(); }
    SignalFrame frame(Eigen::Index i) const;
};

SignalFrame synth_tone(int m, double phase, const ModulationConfig& config);

// Full-band white noise variance that puts the in-band (W) SNR of a unit tone
// at snr_db. Infinite SNR gives zero.
double noise_variance(double snr_db, const ModulationConfig& config);

SignalFrame add_awgn(const SignalFrame& frame, double snr_db, Rng& rng, const ModulationConfig& config);

SignalFrame add_interference(const SignalFrame& frame, double awgn_power, const InterferenceSpec& spec,
                             Rng& rng, const ModulationConfig& config);

struct SnrRange {
    double low;
    double high;
};

struct FrameParameters {
    int label;
    double phase;
    double snr_db;
};

// Label ~ U{0..M-1}, phase ~ U[0, 2pi), SNR ~ U[low, high]: the first draws of
// the frame's substream. `rng` is left positioned for the noise draws.
FrameParameters draw_frame_parameters(Rng& rng, SnrRange snr, const ModulationConfig& config);

// Frame `index` of a dataset with the given seed. Pure in (seed, index).
SignalFrame synth_frame(std::uint64_t seed, std::uint64_t index, SnrRange snr, const ModulationConfig& config,
                        const std::optional<InterferenceSpec>& interference = std::nullopt);

Dataset build_dataset(Eigen::Index count, SnrRange snr, std::uint64_t seed, const ModulationConfig& config,
                      const std::optional<InterferenceSpec>& interference = std::nullopt);

// Little-endian "MFSK65DS" container.
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace mfsk
