#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "mfsk/error_rate.hpp"
#include "mfsk/nn.hpp"
#include "mfsk/synthesis.hpp"

namespace mfsk {

// Rows are truth, columns are prediction.
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(int classes = 64);

    void add(int truth, int prediction, std::int64_t count = 1);

    int classes() const { return static_cast<int>(counts_.rows()); }
    std::int64_t total() const { return counts_.sum(); }
    std::int64_t correct() const { return counts_.trace(); }
    std::int64_t operator()(int truth, int prediction) const { return counts_(truth, prediction); }
    const Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>& counts() const { return counts_; }

private:
    Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> counts_;
};

// Precision (recall) of a class with no predictions (no truth samples) is 0.
struct MetricsReport {
    double error_rate = 0.0;
    double accuracy = 0.0;
    Eigen::VectorXd precision;
    Eigen::VectorXd recall;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double micro_precision = 0.0;
    double micro_recall = 0.0;
};

MetricsReport compute_metrics(const ConfusionMatrix& confusion);

struct Evaluation {
    ConfusionMatrix confusion;
    MetricsReport metrics;
};

// argmax class per column of `samples` (frame_len x count).
Eigen::VectorXi predict(const DenseModel<float>& model, const Eigen::Ref<const Eigen::MatrixXf>& samples);

Evaluation evaluate(const DenseModel<float>& model, const Dataset& testset);

std::vector<ErrorRatePoint> nn_ser_curve(const DenseModel<float>& model, std::span<const double> snr_grid_db,
                                         std::int64_t trials_per_point, std::uint64_t seed,
                                         const ModulationConfig& config,
                                         const std::optional<InterferenceSpec>& interference = std::nullopt);

// Seed of the fresh test set for grid point `index`. Tagged so it never
// coincides with a training stream built from the same user seed.
std::uint64_t test_set_seed(std::uint64_t seed, std::uint64_t index);

// Eb/N0 (dB) where the measured BER column crosses target_ber, minus the same
// for the theoretical column. Interpolates log10(BER) linearly in Eb/N0;
// throws RangeError when either column does not bracket the target.
double gap_at_ber(std::span<const ErrorRatePoint> curve, double target_ber);

// Crossing of one (x ascending, y) series; exposed for tests.
double crossing_at(std::span<const double> x, std::span<const double> y, double target);

struct LatencyStats {
    double mean_us = 0.0;
    double p95_us = 0.0;
    int iterations = 0;
    bool real_time = false;  // mean below one symbol interval
};

// Single-frame inference latency, synthesis excluded. Single-threaded.
LatencyStats bench_inference(const DenseModel<float>& model, int iterations, const ModulationConfig& config);

void write_confusion_csv(const ConfusionMatrix& confusion, const std::filesystem::path& path);
// class,precision,recall
void write_metrics_csv(const MetricsReport& metrics, const std::filesystem::path& path);
// error_rate,accuracy,macro_precision,macro_recall,micro_precision,micro_recall
void write_summary_csv(const MetricsReport& metrics, const std::filesystem::path& path);

}  // namespace mfsk
