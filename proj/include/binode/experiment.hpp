#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "binode/refmodels.hpp"
#include "binode/serialize.hpp"
#include "binode/training.hpp"

namespace binode {

inline constexpr int kConfigVersion = 1;

// Parsed `train` experiment configuration.
struct TrainExperiment {
    SystemId system = SystemId::monod;
    std::uint64_t model_seed = 0;
    IntegratorConfig integrator;
    TrainConfig train;
    std::filesystem::path out_dir = "out";
    std::string config_text;  // raw bytes, echoed and hashed into the report
};

TrainExperiment parse_train_experiment(const std::string& json_text);

struct TrainArtifacts {
    std::filesystem::path model_path, loss_path, report_path;
    TrainResult result;
};

// Generates the training set, trains, and writes model + loss history +
// report under out_dir. Deterministic per (config, seed) up to the recorded
// wall time.
TrainArtifacts run_train_experiment(const TrainExperiment& cfg);

// Parsed `sweep` configuration (architecture grid study).
struct SweepExperiment {
    SweepSpec spec;
    std::vector<double> fixed_inputs;  // trailing law inputs held constant
    std::filesystem::path out = "sweep.csv";
    std::string config_text;
};

SweepExperiment parse_sweep_experiment(const std::string& json_text);
std::vector<SweepCell> run_sweep_experiment(const SweepExperiment& cfg, int jobs);

// Parsed `fit-surface` configuration (single network vs one rate law).
struct FitSurfaceExperiment {
    RateLaw law;
    DomainBox domain;
    std::vector<double> fixed_inputs;
    int samples = 1000;
    std::uint64_t data_seed = 0;
    NnpSpec spec;
    TrainConfig train;
    std::uint64_t seed = 0;
    std::filesystem::path out_dir = "out";
    std::string config_text;
};

FitSurfaceExperiment parse_fit_surface_experiment(const std::string& json_text);

struct FitSurfaceArtifacts {
    std::filesystem::path model_path, loss_path, report_path;
    FitResult result;
};
FitSurfaceArtifacts run_fit_surface_experiment(const FitSurfaceExperiment& cfg);

// Dataset for a law with an optional constant tail (the stored inputs cover
// only the sampled box dimensions).
Dataset sample_law_dataset(const RateLaw& law, const DomainBox& box,
                           std::span<const double> fixed_tail, int count,
                           std::uint64_t seed);

// Parses shared JSON helpers (also used by the CLI for model options).
RateLaw rate_law_from_json_text(const std::string& json_text);

}  // namespace binode
