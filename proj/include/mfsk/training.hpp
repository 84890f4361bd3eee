#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "mfsk/nn.hpp"
#include "mfsk/synthesis.hpp"

namespace mfsk {

struct StepRecord {
    std::int64_t step;  // global, 0-based
    int epoch;
    double loss;
    double accuracy;
};

struct EpochRecord {
    int epoch;
    double loss;      // mean of the epoch's step losses
    double accuracy;  // mean of the epoch's step accuracies
    double seconds;
};

struct TrainHistory {
    std::vector<StepRecord> steps;
    std::vector<EpochRecord> epochs;
};

struct TrainConfig {
    int epochs = 5;
    int batch_size = 32;
    double lr = 1e-3;
    std::uint64_t seed = 0;
    bool shuffle = true;
    Architecture architecture = Architecture::standard();
    std::function<void(const EpochRecord&)> on_epoch;

    void validate() const;
};

// Batch sizes for one epoch over `count` frames. A trailing batch of one
// frame is folded into the previous batch because batch normalization needs
// at least two samples. With batch_size 1 every batch is a single frame.
std::vector<int> batch_plan(std::int64_t count, int batch_size);

struct TrainResult {
    DenseModel<float> model;  // returned in inference mode
    TrainHistory history;
};

// Throws DomainError on an empty dataset, NumericError on a non-finite loss.
TrainResult train(const Dataset& dataset, const TrainConfig& config);

// CSV: step,epoch,loss,accuracy
void write_step_history(const TrainHistory& history, const std::filesystem::path& path);
// CSV: epoch,loss,accuracy,seconds
void write_epoch_history(const TrainHistory& history, const std::filesystem::path& path);

}  // namespace mfsk
