#pragma once

#include <cmath>
#include <complex>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>

#include <Eigen/Core>

namespace mfsk::test {

// Direct O(N^2) evaluation of Ts * sum x(n) exp(-j2pi nk/N); the phase index
// n*k is reduced mod N exactly in integers before the trig call.
inline Eigen::VectorXcd brute_force_dft(const Eigen::VectorXd& x, double sample_period) {
    const auto n = x.size();
    Eigen::VectorXcd table(n);
    for (Eigen::Index i = 0; i < n; ++i)
        table(i) = std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
    Eigen::VectorXcd out(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        std::complex<double> acc = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) acc += x(i) * table((i * k) % n);
        out(k) = sample_period * acc;
    }
    return out;
}

// Single DFT coefficient (unscaled) at an integer bin.
inline std::complex<double> dft_bin(const Eigen::VectorXd& x, Eigen::Index k) {
    const auto n = x.size();
    std::complex<double> acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        acc += x(i) * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>((i * k) % n) / n);
    return acc;
}

inline Eigen::VectorXd random_frame(std::mt19937_64& gen, Eigen::Index n) {
    std::normal_distribution<double> d;
    Eigen::VectorXd x(n);
    for (auto& v : x) v = d(gen);
    return x;
}

class TempDir {
public:
    TempDir() {
        path_ = std::filesystem::temp_directory_path() /
                ("mfsk_test_" + std::to_string(std::random_device{}()) + "_" + std::to_string(counter()++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
    const std::filesystem::path& path() const { return path_; }

private:
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::filesystem::path path_;
};

}  // namespace mfsk::test
