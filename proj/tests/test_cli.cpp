#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>

#include "binode/serialize.hpp"

using namespace binode;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        std::random_device rd;
        path = fs::temp_directory_path() / ("binode_cli_" + std::to_string(rd()) +
                                            std::to_string(rd()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

int run(const std::string& args, const fs::path& cwd) {
    const std::string cmd = "cd " + cwd.string() + " && " + BINODE_CLI_PATH + " " +
                            args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("simulate writes reference trajectory files") {
    TempDir tmp;
    CHECK(run("simulate pk --out .", tmp.path) == 0);
    REQUIRE(fs::exists(tmp.path / "pk_traj0.csv"));
    const Trajectory t = read_trajectory_csv(tmp.path / "pk_traj0.csv");
    CHECK(t.names == std::vector<std::string>{"x1", "x2", "x3"});
    for (std::size_t i = 0; i < t.size(); ++i)
        CHECK(std::fabs(t.states[i][1] - 0.1 * std::exp(-0.72 * t.times[i])) < 1e-7);

    CHECK(run("simulate monod --out .", tmp.path) == 0);
    CHECK(fs::exists(tmp.path / "monod_traj0.csv"));
    CHECK(fs::exists(tmp.path / "monod_traj1.csv"));
    CHECK(fs::exists(tmp.path / "monod_traj2.csv"));
}

TEST_CASE("simulate rejects unknown systems with a nonzero exit") {
    TempDir tmp;
    CHECK(run("simulate nosuch --out .", tmp.path) == 2);
}

TEST_CASE("train writes model, loss history, and report; reruns are identical") {
    TempDir tmp;
    const std::string cfg = R"({
      "version": 1,
      "system": "monod",
      "model_seed": 0,
      "integrator": { "dt": 0.05 },
      "train": { "batch_size": 6, "horizon": 3, "learning_rate": 0.01,
                 "epochs": 40, "seed": 1 },
      "out_dir": "runA"
    })";
    atomic_write(tmp.path / "cfg.json", cfg);
    CHECK(run("train --config cfg.json", tmp.path) == 0);
    REQUIRE(fs::exists(tmp.path / "runA/monod_model.json"));
    REQUIRE(fs::exists(tmp.path / "runA/monod_loss.csv"));
    REQUIRE(fs::exists(tmp.path / "runA/monod_report.json"));

    CHECK(run("train --config cfg.json --out runB", tmp.path) == 0);
    CHECK(read_file(tmp.path / "runA/monod_model.json") ==
          read_file(tmp.path / "runB/monod_model.json"));
    CHECK(read_file(tmp.path / "runA/monod_loss.csv") ==
          read_file(tmp.path / "runB/monod_loss.csv"));

    const std::string report = read_file(tmp.path / "runA/monod_report.json");
    CHECK(report.find("final_loss") != std::string::npos);
    CHECK(report.find("input_hash") != std::string::npos);
    CHECK(report.find(git_blob_sha1(cfg)) != std::string::npos);
}

TEST_CASE("train reports config errors with the field name") {
    TempDir tmp;
    atomic_write(tmp.path / "bad.json", R"({"version": 1, "train": {}})");
    CHECK(run("train --config bad.json", tmp.path) == 2);
    CHECK(run("train --config missing_file.json", tmp.path) == 4);
}

TEST_CASE("surface samples a trained model on a grid") {
    TempDir tmp;
    // tiny training run to produce a model file
    const std::string cfg = R"({
      "version": 1, "system": "pk",
      "train": { "batch_size": 4, "horizon": 2, "epochs": 5, "seed": 0 },
      "out_dir": "."
    })";
    atomic_write(tmp.path / "cfg.json", cfg);
    REQUIRE(run("train --config cfg.json", tmp.path) == 0);

    CHECK(run("surface --model pk_model.json --process 1 --row 1 "
              "--axes 1,2 --min 0,0 --max 0.1,0.1 --count 25,25 "
              "--fixed x3=0.05 --out surf.csv",
              tmp.path) == 0);
    const std::string text = read_file(tmp.path / "surf.csv");
    CHECK(text.find("x1,x2,value") != std::string::npos);
    // 625 data rows plus comments and header
    int rows = 0;
    for (char c : text)
        if (c == '\n') ++rows;
    CHECK(rows == 625 + 5);
    CHECK(text.find("x3=0.05") != std::string::npos);

    // 1x1 grid -> a single row
    CHECK(run("surface --model pk_model.json --process 1 --row 1 "
              "--axes 1 --min 0.05 --max 0.05 --count 1 --out one.csv",
              tmp.path) == 0);
    const std::string one = read_file(tmp.path / "one.csv");
    CHECK(one.find("x,value") != std::string::npos);

    CHECK(run("surface --model pk_model.json --process 9 --row 1 "
              "--axes 1 --min 0 --max 1 --count 3 --out bad.csv",
              tmp.path) == 2);
}

TEST_CASE("sweep writes the grid csv sorted by layers then width") {
    TempDir tmp;
    const std::string cfg = R"({
      "version": 1,
      "target": { "law": "michaelis_menten", "arity": 1,
                  "params": { "V_max": 1.0, "K_m": 0.5 } },
      "domain": { "lo": [0.0], "hi": [2.0] },
      "samples": 50,
      "grid": { "max_layers": 2, "max_width": 3 },
      "restarts": 2,
      "iterations": 30,
      "out": "sweep.csv"
    })";
    atomic_write(tmp.path / "sweep.json", cfg);
    CHECK(run("sweep --config sweep.json --jobs 2", tmp.path) == 0);
    const std::string text = read_file(tmp.path / "sweep.csv");
    CHECK(text.find("layers,width,best_loss,mean_runtime_s\n1,1,") != std::string::npos);
    int rows = 0;
    for (char c : text)
        if (c == '\n') ++rows;
    CHECK(rows == 1 + 6);
    const std::size_t r11 = text.find("\n1,1,");
    const std::size_t r12 = text.find("\n1,2,");
    const std::size_t r21 = text.find("\n2,1,");
    CHECK(r11 < r12);
    CHECK(r12 < r21);
}

TEST_CASE("fit-surface trains a single network against a law") {
    TempDir tmp;
    const std::string cfg = R"({
      "version": 1,
      "target": { "law": "michaelis_menten", "arity": 1,
                  "params": { "V_max": 1.0, "K_m": 0.5 } },
      "domain": { "lo": [0.0], "hi": [2.0] },
      "samples": 100,
      "spec": { "hidden_layers": 2, "hidden_width": 3 },
      "iterations": 200,
      "out_dir": "."
    })";
    atomic_write(tmp.path / "fit.json", cfg);
    CHECK(run("fit-surface --config fit.json", tmp.path) == 0);
    CHECK(fs::exists(tmp.path / "michaelis_menten_nnp.json"));
    CHECK(fs::exists(tmp.path / "michaelis_menten_fit_loss.csv"));
    CHECK(fs::exists(tmp.path / "michaelis_menten_fit_report.json"));
}

TEST_CASE("simulate honors the output directory environment variable") {
    TempDir tmp;
    fs::create_directories(tmp.path / "envout");
    const std::string cmd = "cd " + tmp.path.string() + " && BINODE_OUT_DIR=envout " +
                            BINODE_CLI_PATH + " simulate pk >/dev/null 2>&1";
    CHECK(WEXITSTATUS(std::system(cmd.c_str())) == 0);
    CHECK(fs::exists(tmp.path / "envout/pk_traj0.csv"));
}
