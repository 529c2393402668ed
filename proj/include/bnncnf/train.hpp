#pragma once

#include <cstdint>
#include <vector>

#include "bnncnf/dataset.hpp"
#include "bnncnf/model.hpp"

namespace bnncnf {

struct TrainConfig {
    int epochs = 25;
    int batch_size = 32;
    double learning_rate = 0.01;
    // Softmax temperature on the output logits. With +-1 weights the raw
    // logits step by 2 and saturate the softmax; dividing by ~sqrt(fan-in)
    // keeps useful gradients. Only affects training, never the argmax.
    double temperature = 4.0;
    uint64_t seed = 1;
};

// Straight-through-estimator training: forward uses sign(latent weights),
// gradients pass through where the latent weight is in [-1, 1]. Adam on the
// latent parameters with a cosine learning-rate decay over the epochs.
// Batch-norm running statistics (momentum 0.9) are frozen into the returned
// model. Deterministic for a fixed seed. Throws std::runtime_error naming
// the epoch if the loss diverges to NaN.
BnnModel train(const Dataset& data, const std::vector<int>& arch, const TrainConfig& cfg);

// Fraction of items whose forward_reference label matches the true label.
// Throws on an empty dataset.
double evaluate(const BnnModel& m, const Dataset& data);

}  // namespace bnncnf
