#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "mfsk/modem.hpp"

namespace mfsk {

// One point of an SER/BER curve.
struct ErrorRatePoint {
    double snr_db;
    double ebn0_db;
    double ser;
    double ber;
    double theoretical_ber;
};

// Fills Eb/N0, BER (from SER) and the non-coherent reference BER.
ErrorRatePoint make_error_rate_point(double snr_db, double ser, const ModulationConfig& config);

// Standard error of a binomial proportion estimated from `trials` samples.
double binomial_sigma(double p, std::int64_t trials);

// Inclusive grid from..to with the given step (step > 0).
std::vector<double> snr_grid(double from, double to, double step);

// CSV: snr_db,ebn0_db,ser,ber,theoretical_ber
void write_curve_csv(std::span<const ErrorRatePoint> curve, const std::filesystem::path& path);

}  // namespace mfsk
