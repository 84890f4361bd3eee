#include "mfsk/error_rate.hpp"

#include <cmath>
#include <fstream>

#include "mfsk/errors.hpp"

namespace mfsk {

ErrorRatePoint make_error_rate_point(double snr_db, double ser, const ModulationConfig& config) {
    const double ebn0 = snr_to_ebn0(snr_db, config);
    return {snr_db, ebn0, ser, ser_to_ber(ser, config.alphabet_size), theoretical_ber_noncoherent(ebn0)};
}

double binomial_sigma(double p, std::int64_t trials) {
    if (trials <= 0) throw DomainError("binomial_sigma needs trials > 0");
    return std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
}

std::vector<double> snr_grid(double from, double to, double step) {
    if (!(step > 0.0) || !(from <= to)) throw DomainError("SNR grid needs from <= to and step > 0");
    std::vector<double> grid;
    const auto n = static_cast<long>(std::floor((to - from) / step + 1e-9));
    for (long i = 0; i <= n; ++i) grid.push_back(from + static_cast<double>(i) * step);
    return grid;
}

void write_curve_csv(std::span<const ErrorRatePoint> curve, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.precision(10);
    out << "snr_db,ebn0_db,ser,ber,theoretical_ber\n";
    for (const auto& p : curve)
        out << p.snr_db << ',' << p.ebn0_db << ',' << p.ser << ',' << p.ber << ',' << p.theoretical_ber << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace mfsk
