#include "mfsk/baseline.hpp"

#include <algorithm>
#include <vector>

#include "mfsk/dsp.hpp"
#include "mfsk/rng.hpp"
#include "parallel.hpp"

namespace mfsk {

ToneBinMap ToneBinMap::make(const ModulationConfig& config) {
    ToneBinMap map;
    map.bins.reserve(config.alphabet_size);
    for (int m = 0; m < config.alphabet_size; ++m) map.bins.push_back(tone_bin(m, config));
    return map;
}

bool ToneBinMap::invertible() const {
    std::vector<int> sorted = bins;
    std::sort(sorted.begin(), sorted.end());
    return std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end();
}

int demod_noncoherent(const SignalFrame& frame, const ModulationConfig& config, const ToneBinMap& map) {
    if (frame.samples.size() != config.frame_len) throw ShapeError("frame length does not match configuration");
    const Eigen::VectorXd energy = esd(dft(frame, config));
    int best = 0;
    for (int m = 1; m < static_cast<int>(map.bins.size()); ++m)
        if (energy(map.bins[m]) > energy(map.bins[best])) best = m;
    return best;
}

int demod_noncoherent(const SignalFrame& frame, const ModulationConfig& config) {
    return demod_noncoherent(frame, config, ToneBinMap::make(config));
}

double baseline_ser(double snr_db, std::int64_t trials, std::uint64_t point_seed, const ModulationConfig& config) {
    if (trials <= 0) throw DomainError("trials must be positive");
    const ToneBinMap map = ToneBinMap::make(config);
    std::vector<std::uint8_t> wrong(static_cast<std::size_t>(trials), 0);
    detail::parallel_for(trials, [&](std::int64_t t) {
        const SignalFrame f = synth_frame(point_seed, static_cast<std::uint64_t>(t), {snr_db, snr_db}, config);
        wrong[static_cast<std::size_t>(t)] = demod_noncoherent(f, config, map) != *f.label;
    });
    const auto errors = std::count(wrong.begin(), wrong.end(), std::uint8_t{1});
    return static_cast<double>(errors) / static_cast<double>(trials);
}

std::vector<ErrorRatePoint> baseline_ser_curve(std::span<const double> snr_grid_db, std::int64_t trials_per_point,
                                               std::uint64_t seed, const ModulationConfig& config) {
    if (trials_per_point < 100) throw DomainError("baseline curve needs at least 100 trials per point");
    config.validate();
    std::vector<ErrorRatePoint> curve;
    for (std::size_t p = 0; p < snr_grid_db.size(); ++p) {
        const std::uint64_t point_seed = mix64(seed ^ mix64(stream::kBaseline)) ^ mix64(p);
        const double ser = baseline_ser(snr_grid_db[p], trials_per_point, point_seed, config);
        curve.push_back(make_error_rate_point(snr_grid_db[p], ser, config));
    }
    return curve;
}

}  // namespace mfsk
