#include "mfsk/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mfsk/errors.hpp"
#include "parallel.hpp"

namespace mfsk {

void InterferenceSpec::validate() const {
    if (!(narrowband_power_fraction >= 0.0) || !(pulse_power_fraction >= 0.0))
        throw DomainError("interference power fractions must be >= 0");
    if (!(pulse_duty_cycle > 0.0 && pulse_duty_cycle <= 1.0))
        throw DomainError("pulse duty cycle must be in (0, 1]");
    if (!(narrowband_min_hz >= 0.0 && narrowband_min_hz <= narrowband_max_hz))
        throw DomainError("narrowband interferer range is empty");
}

SignalFrame Dataset::frame(Eigen::Index i) const {
    return {samples.col(i).cast<double>(), labels(i), static_cast<double>(snr_db(i))};
}

SignalFrame synth_tone(int m, double phase, const ModulationConfig& config) {
    if (!std::isfinite(phase)) throw DomainError("tone phase must be finite");
    const double f = tone_frequency(m, config);
    const double w = 2.0 * std::numbers::pi * f / config.sample_rate_hz;
    SignalFrame frame;
    frame.samples.resize(config.frame_len);
    for (int n = 0; n < config.frame_len; ++n) frame.samples(n) = kToneAmplitude * std::cos(w * n + phase);
    frame.label = m;
    return frame;
}

double noise_variance(double snr_db, const ModulationConfig& config) {
    if (std::isinf(snr_db) && snr_db > 0) return 0.0;
    // White noise of variance s2 over [0, fs/2] puts s2 * W / (fs/2) inside W.
    const double in_band_share = config.bandwidth_hz / config.nyquist_hz();
    return kSignalPower / (db_to_linear(snr_db) * in_band_share);
}

SignalFrame add_awgn(const SignalFrame& frame, double snr_db, Rng& rng, const ModulationConfig& config) {
    if (std::isnan(snr_db)) throw DomainError("SNR must not be NaN");
    SignalFrame out = frame;
    out.snr_db = snr_db;
    const double sigma = std::sqrt(noise_variance(snr_db, config));
    if (sigma == 0.0) return out;
    for (auto& x : out.samples) x += rng.normal(0.0, sigma);
    return out;
}

SignalFrame add_interference(const SignalFrame& frame, double awgn_power, const InterferenceSpec& spec, Rng& rng,
                             const ModulationConfig& config) {
    spec.validate();
    if (!(awgn_power > 0.0)) throw DomainError("AWGN power must be positive");
    SignalFrame out = frame;
    const auto n = static_cast<int>(out.samples.size());

    if (spec.narrowband_power_fraction > 0.0) {
        const double amplitude = std::sqrt(2.0 * spec.narrowband_power_fraction * awgn_power);
        const double f = rng.uniform(spec.narrowband_min_hz, spec.narrowband_max_hz);
        const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const double w = 2.0 * std::numbers::pi * f / config.sample_rate_hz;
        for (int i = 0; i < n; ++i) out.samples(i) += amplitude * std::cos(w * i + phase);
    }

    if (spec.pulse_power_fraction > 0.0) {
        // One rectangular burst of white noise; its variance is scaled so the
        // frame-average power equals the requested fraction.
        const int burst = std::clamp(static_cast<int>(std::lround(spec.pulse_duty_cycle * n)), 1, n);
        const int start = rng.uniform_int(0, n - burst);
        const double burst_var = spec.pulse_power_fraction * awgn_power * n / burst;
        const double sigma = std::sqrt(burst_var);
        for (int i = start; i < start + burst; ++i) out.samples(i) += rng.normal(0.0, sigma);
    }
    return out;
}

FrameParameters draw_frame_parameters(Rng& rng, SnrRange snr, const ModulationConfig& config) {
    FrameParameters p;
    p.label = rng.uniform_int(0, config.alphabet_size - 1);
    p.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    p.snr_db = snr.low == snr.high ? snr.low : rng.uniform(snr.low, snr.high);
    return p;
}

SignalFrame synth_frame(std::uint64_t seed, std::uint64_t index, SnrRange snr, const ModulationConfig& config,
                        const std::optional<InterferenceSpec>& interference) {
    Rng rng = Rng::substream(seed, stream::kFrame, index);
    const auto [label, phase, snr_db] = draw_frame_parameters(rng, snr, config);
    SignalFrame frame = add_awgn(synth_tone(label, phase, config), snr_db, rng, config);
    if (interference) {
        Rng irng = Rng::substream(seed ^ mix64(interference->rng_seed), stream::kInterference, index);
        const double awgn_power = noise_variance(snr_db, config);
        if (awgn_power > 0.0) frame = add_interference(frame, awgn_power, *interference, irng, config);
    }
    return frame;
}

Dataset build_dataset(Eigen::Index count, SnrRange snr, std::uint64_t seed, const ModulationConfig& config,
                      const std::optional<InterferenceSpec>& interference) {
    if (count <= 0) throw DomainError("dataset count must be positive");
    if (!(snr.low <= snr.high)) throw DomainError("SNR range must satisfy low <= high");
    config.validate();
    if (interference) interference->validate();

    Dataset ds;
    ds.config = config;
    ds.seed = seed;
    ds.samples.resize(config.frame_len, count);
    ds.labels.resize(count);
    ds.snr_db.resize(count);
    detail::parallel_for(count, [&](std::int64_t i) {
        const SignalFrame f = synth_frame(seed, static_cast<std::uint64_t>(i), snr, config, interference);
        ds.samples.col(i) = f.samples.cast<float>();
        ds.labels(i) = *f.label;
        ds.snr_db(i) = static_cast<float>(*f.snr_db);
    });
    return ds;
}

}  // namespace mfsk
