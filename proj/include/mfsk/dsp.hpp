#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "mfsk/errors.hpp"
#include "mfsk/modem.hpp"
#include "mfsk/synthesis.hpp"

namespace mfsk {

enum class FftDirection { Forward, Inverse };

// Unnormalized in-place radix-2 transform (iterative, bit-reversal first).
// Forward uses exp(-j2pi nk/N); Inverse uses exp(+j2pi nk/N) without the 1/N.
template <typename Scalar>
void fft_radix2(std::span<std::complex<Scalar>> data, FftDirection direction) {
    const std::size_t n = data.size();
    if (n == 0 || !std::has_single_bit(n)) throw DomainError("FFT length must be a power of two");

    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(data[i], data[j]);
    }

    // Twiddle table for the largest stage; stage `len` reads it with stride n/len.
    const Scalar sign = direction == FftDirection::Forward ? Scalar(-1) : Scalar(1);
    std::vector<std::complex<Scalar>> twiddle(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k)
        twiddle[k] = std::polar(Scalar(1), sign * 2 * std::numbers::pi_v<Scalar> * static_cast<Scalar>(k) /
                                               static_cast<Scalar>(n));

    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t half = len / 2;
        const std::size_t stride = n / len;
        for (std::size_t start = 0; start < n; start += len) {
            for (std::size_t k = 0; k < half; ++k) {
                const std::complex<Scalar> t = twiddle[k * stride] * data[start + k + half];
                data[start + k + half] = data[start + k] - t;
                data[start + k] += t;
            }
        }
    }
}

// Discrete amplitude density S_x(kF) = Ts * sum_n x(n Ts) exp(-j2pi nk/N), V/Hz.
struct Spectrum {
    Eigen::VectorXcd bins;
    double bin_spacing_hz = 0.0;  // F = 1 / (N Ts)
    double sample_period_s = 0.0;

    Eigen::Index size() const { return bins.size(); }
};

Spectrum dft(const Eigen::Ref<const Eigen::VectorXd>& samples, double sample_rate_hz);
Spectrum dft(const SignalFrame& frame, const ModulationConfig& config);

// Inverse of dft(): recovers x(n Ts) from S_x(kF).
Eigen::VectorXd inverse_dft(const Spectrum& spectrum);

// |S_x(kF)|^2 per bin, V^2 s/Hz.
Eigen::VectorXd esd(const Spectrum& spectrum);

struct Histogram {
    Eigen::VectorXd edges;  // num_bins + 1 edges spanning [min, max]
    Eigen::VectorXi counts;
};

Histogram histogram(const SignalFrame& frame, int num_bins);

}  // namespace mfsk
