#include <doctest.h>

#include <cmath>
#include <random>

#include "mfsk/dsp.hpp"
#include "mfsk/errors.hpp"
#include "mfsk/synthesis.hpp"
#include "support.hpp"

using namespace mfsk;

namespace {

constexpr double kFs = 11025.0;
constexpr double kTs = 1.0 / kFs;

double rel_error(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) { return (a - b).norm() / b.norm(); }

}  // namespace

TEST_CASE("trivial spectra") {
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(4);
    const auto s = dft(ones, kFs);
    CHECK(std::abs(s.bins(0) - std::complex<double>(4 * kTs)) < 1e-18);
    for (int k = 1; k < 4; ++k) CHECK(std::abs(s.bins(k)) < 1e-18);
    CHECK(s.bin_spacing_hz == doctest::Approx(kFs / 4));
    CHECK(s.sample_period_s == kTs);

    for (int n : {1, 2, 8, 4096}) {
        Eigen::VectorXd impulse = Eigen::VectorXd::Zero(n);
        impulse(0) = 1.0;
        const auto si = dft(impulse, kFs);
        for (int k = 0; k < n; ++k) CHECK(std::abs(si.bins(k) - std::complex<double>(kTs)) < 1e-18);
    }

    const auto z = esd(dft(Eigen::VectorXd::Zero(4096), kFs));
    CHECK(z.isZero(0.0));
    CHECK_THROWS_AS(dft(Eigen::VectorXd::Ones(12), kFs), DomainError);
    CHECK_THROWS_AS(dft(Eigen::VectorXd(), kFs), DomainError);
}

TEST_CASE("radix-2 DFT matches brute-force evaluation on 64 random frames") {
    std::mt19937_64 gen(2024);
    double worst = 0.0;
    for (int i = 0; i < 64; ++i) {
        const Eigen::VectorXd x = test::random_frame(gen, 4096);
        worst = std::max(worst, rel_error(dft(x, kFs).bins, test::brute_force_dft(x, kTs)));
    }
    CHECK(worst < 1e-6);
    CHECK(worst < 1e-12);
}

TEST_CASE("Parseval on 100 random frames") {
    std::mt19937_64 gen(7);
    for (int i = 0; i < 100; ++i) {
        const Eigen::VectorXd x = test::random_frame(gen, 4096);
        const auto s = dft(x, kFs);
        const double freq = esd(s).sum() * s.bin_spacing_hz;
        const double time = kTs * x.squaredNorm();
        CHECK(std::abs(freq / time - 1.0) < 1e-6);
    }
}

TEST_CASE("inverse transform reconstructs the frame") {
    std::mt19937_64 gen(3);
    for (int i = 0; i < 10; ++i) {
        const Eigen::VectorXd x = test::random_frame(gen, 4096);
        const Eigen::VectorXd y = inverse_dft(dft(x, kFs));
        CHECK((y - x).norm() / x.norm() < 1e-9);
    }
}

TEST_CASE("linearity") {
    std::mt19937_64 gen(4);
    for (int i = 0; i < 10; ++i) {
        const Eigen::VectorXd x = test::random_frame(gen, 4096);
        const Eigen::VectorXd y = test::random_frame(gen, 4096);
        const double a = 1.7, b = -0.35;
        const Eigen::VectorXcd lhs = dft(Eigen::VectorXd(a * x + b * y), kFs).bins;
        const Eigen::VectorXcd rhs = a * dft(x, kFs).bins + b * dft(y, kFs).bins;
        CHECK(rel_error(lhs, rhs) < 1e-9);
    }
}

TEST_CASE("real input gives conjugate-symmetric bins") {
    std::mt19937_64 gen(5);
    const Eigen::VectorXd x = test::random_frame(gen, 1024);
    const auto s = dft(x, kFs);
    for (int k = 1; k < 1024; ++k) CHECK(std::abs(s.bins(k) - std::conj(s.bins(1024 - k))) < 1e-12);
}

TEST_CASE("clean orthogonal tone has one dominant bin pair") {
    const auto cfg = ModulationConfig::jt65a();
    for (int m : {0, 31, 63}) {
        const auto e = esd(dft(synth_tone(m, 0.4 * m, cfg), cfg));
        const int k = tone_bin(m, cfg);
        const double peak = e(k);
        CHECK(e(4096 - k) == doctest::Approx(peak).epsilon(1e-12));
        Eigen::Index arg;
        e.head(2048).maxCoeff(&arg);
        CHECK(arg == k);
        for (int j = 0; j < 64; ++j)
            if (j != m) CHECK(e(tone_bin(j, cfg)) < 1e-12 * peak);
    }
}

TEST_CASE("fft_radix2 round trip in single precision") {
    std::mt19937_64 gen(9);
    std::normal_distribution<float> d;
    std::vector<std::complex<float>> x(256), y;
    for (auto& v : x) v = {d(gen), d(gen)};
    y = x;
    fft_radix2<float>(y, FftDirection::Forward);
    fft_radix2<float>(y, FftDirection::Inverse);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(y[i] / 256.0f - x[i]) < 1e-5f);
}

TEST_CASE("histogram") {
    SignalFrame constant{Eigen::VectorXd::Constant(4096, 0.25), std::nullopt, std::nullopt};
    const auto h = histogram(constant, 10);
    CHECK(h.edges.size() == 11);
    CHECK(h.counts.maxCoeff() == 4096);
    CHECK(h.counts.sum() == 4096);
    CHECK_THROWS_AS(histogram(constant, 0), DomainError);

    const auto cfg = ModulationConfig::jt65a();
    const auto f = synth_frame(1, 0, {-10.0, -10.0}, cfg);
    const auto hn = histogram(f, 50);
    CHECK(hn.counts.sum() == 4096);
    CHECK(hn.edges(0) == f.samples.minCoeff());
    CHECK(hn.edges(50) == f.samples.maxCoeff());
    CHECK(hn.counts(0) >= 1);
    CHECK(hn.counts(49) >= 1);
}

TEST_CASE("noise-dominated frames pass a coarse normality check") {
    const auto cfg = ModulationConfig::jt65a();
    double s1 = 0, s2 = 0, s3 = 0, s4 = 0;
    std::int64_t n = 0;
    for (int i = 0; i < 245; ++i) {
        const auto f = synth_frame(31, i, {-10.0, -10.0}, cfg);
        for (double v : f.samples) {
            s1 += v;
            s2 += v * v;
            s3 += v * v * v;
            s4 += v * v * v * v;
        }
        n += f.samples.size();
    }
    const double mean = s1 / n;
    const double m2 = s2 / n - mean * mean;
    const double m3 = s3 / n - 3 * mean * s2 / n + 2 * mean * mean * mean;
    const double m4 = s4 / n - 4 * mean * s3 / n + 6 * mean * mean * s2 / n - 3 * std::pow(mean, 4);
    CHECK(n >= 1000000);
    CHECK(std::abs(m3 / std::pow(m2, 1.5)) < 0.1);
    CHECK(std::abs(m4 / (m2 * m2) - 3.0) < 0.2);
}
