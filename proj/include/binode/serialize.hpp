#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "binode/model.hpp"
#include "binode/odeint.hpp"
#include "binode/training.hpp"

namespace binode {

inline constexpr int kModelFormatVersion = 1;

// --- JSON model files --------------------------------------------------------

std::string nnp_to_json(const Nnp& n);
Nnp nnp_from_json(const std::string& text);

std::string model_to_json(const BinodeModel& m);
BinodeModel model_from_json(const std::string& text);

void save_model(const BinodeModel& m, const std::filesystem::path& path);
BinodeModel load_model(const std::filesystem::path& path);
void save_nnp(const Nnp& n, const std::filesystem::path& path);
Nnp load_nnp(const std::filesystem::path& path);

// --- CSV ----------------------------------------------------------------------

// Formats a double with 17 significant digits (lossless re-parse).
std::string format_value(double v);

// Header `t,<name1>,...,<nameN>`, one row per time.
void write_trajectory_csv(const Trajectory& t, const std::filesystem::path& path);
Trajectory read_trajectory_csv(const std::filesystem::path& path);

// Header `epoch,loss`.
void write_loss_csv(std::span<const double> history, const std::filesystem::path& path);

// Header `layers,width,best_loss,mean_runtime_s`, sorted by (layers, width).
void write_sweep_csv(std::span<const SweepCell> cells,
                     const std::filesystem::path& path);

// Surface CSV with `# key: value` comment lines recording the fixed
// coordinates and the stoichiometric entry; optional reference column.
void write_surface_csv(const ProcessSurface& s, const std::filesystem::path& path,
                       std::span<const double> reference = {});

// --- misc ----------------------------------------------------------------------

// Writes via a temp file in the same directory, then renames.
void atomic_write(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

// SHA-1 of the git blob encoding of `content` ("blob <len>\0<content>"),
// lowercase hex; matches `git hash-object`.
std::string git_blob_sha1(const std::string& content);

}  // namespace binode
