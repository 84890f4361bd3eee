#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mfsk/error_rate.hpp"
#include "mfsk/modem.hpp"
#include "mfsk/synthesis.hpp"

namespace mfsk {

// DFT bin read for each symbol: exact bins in Orthogonal mode, nearest bins
// in PaperLiteral mode (which costs a little scalloping loss there).
struct ToneBinMap {
    std::vector<int> bins;

    static ToneBinMap make(const ModulationConfig& config);
    // True when all bins are distinct, i.e. symbol <-> bin is a bijection.
    bool invertible() const;
};

// Non-coherent FFT-bank detector: argmax of tone-bin energy, ties to the
// lowest symbol.
int demod_noncoherent(const SignalFrame& frame, const ModulationConfig& config);
int demod_noncoherent(const SignalFrame& frame, const ModulationConfig& config, const ToneBinMap& map);

// Monte-Carlo SER of the detector at one SNR; frames come from
// synth_frame(point_seed, trial).
double baseline_ser(double snr_db, std::int64_t trials, std::uint64_t point_seed, const ModulationConfig& config);

std::vector<ErrorRatePoint> baseline_ser_curve(std::span<const double> snr_grid_db, std::int64_t trials_per_point,
                                               std::uint64_t seed, const ModulationConfig& config);

}  // namespace mfsk
