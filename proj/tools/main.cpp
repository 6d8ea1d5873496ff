#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "binode/experiment.hpp"
#include "binode/model.hpp"
#include "binode/refmodels.hpp"
#include "binode/serialize.hpp"

namespace fs = std::filesystem;
using namespace binode;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitDivergence = 3;
constexpr int kExitIo = 4;

fs::path default_out_dir() {
    if (const char* env = std::getenv("BINODE_OUT_DIR")) return fs::path(env);
    return fs::path(".");
}

std::vector<double> parse_number_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        if (cell.empty()) continue;
        out.push_back(std::stod(cell));
    }
    return out;
}

int cmd_simulate(const std::string& target, const fs::path& out_dir, double dt_override,
                 double horizon_override, const std::string& x0_str) {
    fs::create_directories(out_dir);
    if (fs::exists(target) && fs::path(target).extension() == ".json") {
        // saved model file
        const BinodeModel model = load_model(target);
        if (x0_str.empty())
            throw ConfigError("simulate: --x0 is required for model files");
        const std::vector<double> x0 = parse_number_list(x0_str);
        if (static_cast<int>(x0.size()) != model.n)
            throw ConfigError("simulate: --x0 must have " + std::to_string(model.n) +
                              " components");
        IntegratorConfig cfg;
        cfg.dt = dt_override > 0 ? dt_override : 0.05;
        const double t1 = horizon_override > 0 ? horizon_override : 10.0;
        const Trajectory traj = integrate(model, x0, 0.0, t1, cfg);
        const fs::path out = out_dir / (fs::path(target).stem().string() + "_traj0.csv");
        write_trajectory_csv(traj, out);
        std::printf("wrote %s (horizon %g, dt %g, final state", out.c_str(), t1, cfg.dt);
        for (double v : traj.states.back()) std::printf(" %.6g", v);
        std::printf(")\n");
        return 0;
    }

    const SystemId id = system_id_from_string(target);
    const SystemDefaults d = system_defaults(id);
    const double dt = dt_override > 0 ? dt_override : d.dt;
    const double t1 = horizon_override > 0 ? horizon_override : d.t1;
    const std::vector<Trajectory> trajs = simulate_reference(id, dt, t1);
    for (std::size_t i = 0; i < trajs.size(); ++i) {
        const fs::path out =
            out_dir / (std::string(to_string(id)) + "_traj" + std::to_string(i) + ".csv");
        write_trajectory_csv(trajs[i], out);
        std::printf("wrote %s (horizon %g, dt %g, final state", out.c_str(), t1, dt);
        for (double v : trajs[i].states.back()) std::printf(" %.6g", v);
        std::printf(")\n");
    }
    return 0;
}

int cmd_train(const fs::path& config_path, const fs::path& out_override,
              long seed_override) {
    TrainExperiment cfg = parse_train_experiment(read_file(config_path));
    if (!out_override.empty()) cfg.out_dir = out_override;
    if (seed_override >= 0) cfg.train.seed = static_cast<std::uint64_t>(seed_override);
    const TrainArtifacts art = run_train_experiment(cfg);
    std::printf("model:  %s\n", art.model_path.c_str());
    std::printf("loss:   %s\n", art.loss_path.c_str());
    std::printf("report: %s\n", art.report_path.c_str());
    std::printf("best loss %.8g at epoch %d over %zu epochs\n", art.result.best_loss,
                art.result.best_epoch, art.result.loss_history.size());
    if (art.result.diverged) {
        std::fprintf(stderr, "training diverged at epoch %d\n",
                     art.result.diverged_epoch);
        return kExitDivergence;
    }
    return 0;
}

int cmd_surface(const fs::path& model_path, int process, int row, bool negate,
                const std::string& axes_str, const std::string& min_str,
                const std::string& max_str, const std::string& count_str,
                const std::string& fixed_str, const fs::path& out,
                const std::string& law_json) {
    const BinodeModel model = load_model(model_path);
    GridSpec grid;
    for (double a : parse_number_list(axes_str))
        grid.axes.push_back(static_cast<int>(a) - 1);  // 1-based on the CLI
    grid.lo = parse_number_list(min_str);
    grid.hi = parse_number_list(max_str);
    for (double c : parse_number_list(count_str))
        grid.counts.push_back(static_cast<int>(c));
    std::vector<double> fixed(model.n, 0.0);
    if (!fixed_str.empty()) {
        std::stringstream ss(fixed_str);
        std::string item;
        while (std::getline(ss, item, ',')) {
            const auto eq = item.find('=');
            if (eq == std::string::npos || item.size() < 4 || item[0] != 'x')
                throw ConfigError("surface: --fixed expects x<i>=<value> pairs");
            const int idx = std::stoi(item.substr(1, eq - 1)) - 1;
            if (idx < 0 || idx >= model.n)
                throw ConfigError("surface: fixed index out of range");
            fixed[idx] = std::stod(item.substr(eq + 1));
        }
    }
    ProcessSurface s = extract_surface(model, process - 1, row - 1, grid, fixed);
    if (negate) {
        s.weight = -s.weight;
        for (double& v : s.values) v = -v;
    }

    std::vector<double> reference;
    if (!law_json.empty()) {
        const RateLaw law = rate_law_from_json_text(law_json);
        if (law.arity != static_cast<int>(grid.axes.size()))
            throw ConfigError("surface: reference law arity must match the axes");
        reference.reserve(s.values.size());
        const std::size_t n1 = s.grid.size() == 2 ? s.grid[1].size() : 1;
        std::vector<double> in(law.arity);
        for (std::size_t idx = 0; idx < s.values.size(); ++idx) {
            in[0] = s.grid[0][idx / n1];
            if (law.arity == 2) in[1] = s.grid[1][idx % n1];
            reference.push_back(eval(law, in));
        }
    }
    write_surface_csv(s, out, reference);
    if (!reference.empty()) {
        double acc = 0.0;
        for (std::size_t i = 0; i < reference.size(); ++i) {
            const double d = s.values[i] - reference[i];
            acc += d * d;
        }
        std::printf("rms deviation vs reference: %.8g\n",
                    std::sqrt(acc / reference.size()));
    }
    std::printf("wrote %s (%zu samples)\n", out.c_str(), s.values.size());
    return 0;
}

int cmd_sweep(const fs::path& config_path, int jobs, const fs::path& out_override) {
    SweepExperiment cfg = parse_sweep_experiment(read_file(config_path));
    if (!out_override.empty()) cfg.out = out_override;
    const auto cells = run_sweep_experiment(cfg, jobs);
    write_sweep_csv(cells, cfg.out);
    std::printf("wrote %s (%zu cells, %d restarts each)\n", cfg.out.c_str(),
                cells.size(), cfg.spec.restarts);
    return 0;
}

int cmd_fit_surface(const fs::path& config_path, const fs::path& out_override,
                    long seed_override) {
    FitSurfaceExperiment cfg = parse_fit_surface_experiment(read_file(config_path));
    if (!out_override.empty()) cfg.out_dir = out_override;
    if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
    const FitSurfaceArtifacts art = run_fit_surface_experiment(cfg);
    std::printf("model:  %s\n", art.model_path.c_str());
    std::printf("loss:   %s\n", art.loss_path.c_str());
    std::printf("report: %s\n", art.report_path.c_str());
    std::printf("best loss %.8g at iteration %d\n", art.result.best_loss,
                art.result.best_iteration);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"biochemically informed neural ODE toolkit"};
    app.require_subcommand(1);

    std::string sim_target, x0_str;
    fs::path out_dir = default_out_dir();
    double dt_override = -1.0, horizon_override = -1.0;
    auto* sim = app.add_subcommand("simulate",
                                   "simulate a reference system or a saved model");
    sim->add_option("system", sim_target,
                    "system id (monod|lv|pk|ultradian) or model json path")
        ->required();
    sim->add_option("--out", out_dir, "output directory");
    sim->add_option("--dt", dt_override, "integration step override");
    sim->add_option("--horizon", horizon_override, "end time override");
    sim->add_option("--x0", x0_str, "initial state for model files, comma separated");

    fs::path train_config, train_out;
    long train_seed = -1;
    auto* tr = app.add_subcommand("train", "train a model from a config file");
    tr->add_option("--config", train_config, "experiment config json")->required();
    tr->add_option("--out", train_out, "output directory override");
    tr->add_option("--seed", train_seed, "training seed override");

    fs::path surf_model, surf_out = "surface.csv";
    int surf_process = 1, surf_row = 1;
    bool surf_negate = false;
    std::string surf_axes = "1", surf_min = "0", surf_max = "1", surf_count = "25";
    std::string surf_fixed, surf_law;
    auto* su = app.add_subcommand("surface",
                                  "sample a learned process contribution on a grid");
    su->add_option("--model", surf_model, "model json path")->required();
    su->add_option("--process", surf_process, "process index (1-based)");
    su->add_option("--row", surf_row, "state row for the weight entry (1-based)");
    su->add_flag("--negate", surf_negate, "negate the contribution");
    su->add_option("--axes", surf_axes, "1 or 2 state indices, comma separated (1-based)");
    su->add_option("--min", surf_min, "per-axis lower bounds");
    su->add_option("--max", surf_max, "per-axis upper bounds");
    su->add_option("--count", surf_count, "per-axis sample counts");
    su->add_option("--fixed", surf_fixed, "fixed coordinates, e.g. \"x3=5\"");
    su->add_option("--law", surf_law,
                   "reference rate law json for a comparison column");
    su->add_option("--out", surf_out, "output csv path");

    fs::path sweep_config, sweep_out;
    int jobs = static_cast<int>(std::thread::hardware_concurrency());
    auto* sw = app.add_subcommand("sweep", "depth x width architecture study");
    sw->add_option("--config", sweep_config, "sweep config json")->required();
    sw->add_option("--jobs", jobs, "worker threads");
    sw->add_option("--out", sweep_out, "output csv override");

    fs::path fit_config, fit_out;
    long fit_seed = -1;
    auto* fi = app.add_subcommand("fit-surface", "fit one network to one rate law");
    fi->add_option("--config", fit_config, "fit config json")->required();
    fi->add_option("--out", fit_out, "output directory override");
    fi->add_option("--seed", fit_seed, "initialization seed override");

    try {
        app.parse(argc, argv);
        if (sim->parsed())
            return cmd_simulate(sim_target, out_dir, dt_override, horizon_override,
                                x0_str);
        if (tr->parsed()) return cmd_train(train_config, train_out, train_seed);
        if (su->parsed())
            return cmd_surface(surf_model, surf_process, surf_row, surf_negate,
                               surf_axes, surf_min, surf_max, surf_count, surf_fixed,
                               surf_out, surf_law);
        if (sw->parsed()) return cmd_sweep(sweep_config, jobs, sweep_out);
        if (fi->parsed()) return cmd_fit_surface(fit_config, fit_out, fit_seed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitConfig;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DivergenceError& e) {
        std::cerr << "numeric divergence: " << e.what() << "\n";
        return kExitDivergence;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
