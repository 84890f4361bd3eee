#include "mfsk/dsp.hpp"

#include <string>

namespace mfsk {

Spectrum dft(const Eigen::Ref<const Eigen::VectorXd>& samples, double sample_rate_hz) {
    const auto n = samples.size();
    if (n == 0 || !std::has_single_bit(static_cast<std::size_t>(n)))
        throw DomainError("unsupported frame length " + std::to_string(n) + " (must be a power of two)");
    Spectrum s;
    s.sample_period_s = 1.0 / sample_rate_hz;
    s.bin_spacing_hz = sample_rate_hz / static_cast<double>(n);
    s.bins = samples.cast<std::complex<double>>();
    fft_radix2(std::span(s.bins.data(), static_cast<std::size_t>(n)), FftDirection::Forward);
    s.bins *= s.sample_period_s;
    return s;
}

Spectrum dft(const SignalFrame& frame, const ModulationConfig& config) {
    return dft(frame.samples, config.sample_rate_hz);
}

Eigen::VectorXd inverse_dft(const Spectrum& spectrum) {
    Eigen::VectorXcd work = spectrum.bins;
    fft_radix2(std::span(work.data(), static_cast<std::size_t>(work.size())), FftDirection::Inverse);
    // x = (1/N) * sum S/Ts * exp(+j...), and F = 1/(N Ts) folds both factors.
    return (work * spectrum.bin_spacing_hz).real();
}

Eigen::VectorXd esd(const Spectrum& spectrum) { return spectrum.bins.cwiseAbs2(); }

Histogram histogram(const SignalFrame& frame, int num_bins) {
    if (num_bins < 1) throw DomainError("histogram needs at least one bin");
    const auto& x = frame.samples;
    if (x.size() == 0) throw DomainError("histogram of an empty frame");

    const double lo = x.minCoeff();
    const double hi = x.maxCoeff();
    Histogram h;
    h.edges = Eigen::VectorXd::LinSpaced(num_bins + 1, lo, hi);
    h.counts = Eigen::VectorXi::Zero(num_bins);
    const double width = (hi - lo) / num_bins;
    for (double v : x) {
        int b = width > 0.0 ? static_cast<int>((v - lo) / width) : 0;
        // The maximum lands on the closed right edge of the last bin.
        h.counts(std::clamp(b, 0, num_bins - 1)) += 1;
    }
    return h;
}

}  // namespace mfsk
