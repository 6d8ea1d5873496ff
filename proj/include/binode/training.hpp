#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "binode/model.hpp"
#include "binode/odeint.hpp"
#include "binode/ratelaws.hpp"
#include "binode/train_config.hpp"

namespace binode {

// One rollout segment: an observed start state and the following H observed
// states. `t0` is the absolute start time (needed by time-dependent terms).
struct Segment {
    double t0 = 0.0;
    std::vector<double> start;
    std::vector<std::vector<double>> targets;
};

// Draws B segments uniformly over all valid (trajectory, start index) pairs,
// with replacement; deterministic per seed.
std::vector<Segment> sample_segments(std::span<const Trajectory> trajectories, int B,
                                     int H, std::uint64_t seed);

// Mean squared rollout error (1/(B*H)) sum_i sum_h |xhat - x|^2. Targets are
// compared every `steps_per_obs` integration steps of size dt.
double rollout_loss(const BinodeModel& m, std::span<const Segment> segments, double dt,
                    int steps_per_obs = 1);

struct LossGrad {
    double loss = 0.0;
    std::vector<double> grad;  // canonical flat layout
};
LossGrad rollout_loss_gradient(const BinodeModel& m, std::span<const Segment> segments,
                               double dt, int steps_per_obs = 1);
// Variant reusing a scratch tape across calls (cleared, capacity kept).
LossGrad rollout_loss_gradient(const BinodeModel& m, std::span<const Segment> segments,
                               double dt, int steps_per_obs, Tape& scratch);

struct AdamState {
    std::vector<double> m, v;
    long t = 0;
};

// Standard bias-corrected Adam update on the raw parameter vector.
// Throws ConfigError on shape mismatch; the caller is responsible for
// rejecting non-finite gradients.
void adam_step(std::vector<double>& params, std::span<const double> grads,
               AdamState& state, double lr, double beta1, double beta2, double eps);

struct TrainResult {
    BinodeModel model;   // best-loss parameters
    std::vector<double> loss_history;  // per-epoch batch loss
    double best_loss = 0.0;            // dense all-segments loss of `model`
    int best_epoch = -1;
    int rejected_steps = 0;
    bool diverged = false;
    int diverged_epoch = -1;
};

// Rollout training: per epoch, resample segments (epoch-indexed seed), build
// one tape, backpropagate and take an Adam step. The batch schedule adds
// segments at the configured epochs. Because batch losses are noisy, the
// returned parameters are the best iterate under the dense loss over every
// valid segment, evaluated every 100 epochs. On divergence the result
// carries the history up to the failing epoch.
TrainResult train(BinodeModel model, std::span<const Trajectory> data,
                  const TrainConfig& cfg);

// --- architecture sweep ------------------------------------------------------

struct SweepSpec {
    RateLaw target;
    DomainBox domain;
    int samples = 1000;
    std::uint64_t data_seed = 0;

    int max_layers = 7;
    int max_width = 7;
    int restarts = 10;
    int iterations = 2000;
    double learning_rate = 1e-2;
    Activation hidden_activation = Activation::elu;
    OutputActivation output_activation = OutputActivation::softplus;
    std::uint64_t seed = 0;
};

struct SweepCell {
    int layers = 0, width = 0;
    double best_loss = 0.0;
    double mean_runtime_s = 0.0;
    int diverged = 0;  // restarts that ended with non-finite loss
};

// Trains `restarts` independently initialized networks per (layers, width)
// cell and records the best final loss and mean wall-clock time per restart.
// Cells and restarts run on up to `jobs` threads; results are deterministic
// per seed except the timings.
std::vector<SweepCell> run_sweep(const SweepSpec& spec, int jobs = 1);

// Same, on a caller-provided dataset (the network input dimension is taken
// from the samples rather than the target arity).
std::vector<SweepCell> run_sweep_with_data(const SweepSpec& spec, const Dataset& data,
                                           int jobs = 1);

}  // namespace binode
