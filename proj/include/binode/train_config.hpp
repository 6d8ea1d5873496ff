#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "binode/errors.hpp"

namespace binode {

// Optimization hyperparameters shared by surface fitting and rollout
// training. `batch_size`/`horizon` apply to rollout training only; surface
// fits are full-batch and use `max_epochs` as the iteration budget.
struct TrainConfig {
    int batch_size = 20;   // B, segments per epoch
    int horizon = 4;       // H, observation steps per segment
    double dt = 0.05;      // integration step; must divide the data spacing
    double learning_rate = 1e-2;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    int max_epochs = 5000;
    std::uint64_t seed = 0;
    // (epoch, extra segments): grows the batch at the given epochs.
    std::vector<std::pair<int, int>> batch_schedule;

    void validate() const {
        if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
        if (horizon < 1) throw ConfigError("horizon must be >= 1");
        if (dt <= 0.0) throw ConfigError("dt must be > 0");
        if (learning_rate < 1e-6 || learning_rate > 1.0)
            throw ConfigError("learning_rate must lie in [1e-6, 1]");
        if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
    }
};

}  // namespace binode
