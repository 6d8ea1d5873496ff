#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <vector>

#include "binode/experiment.hpp"
#include "binode/rng.hpp"
#include "binode/serialize.hpp"

using namespace binode;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("binode_test_" + std::to_string(Rng(std::random_device{}()).next()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

}  // namespace

TEST_CASE("nnp json round trip is value-exact") {
    NnpSpec s;
    s.input_mask = {true, false, true};
    s.hidden_layers = 3;
    s.hidden_width = 4;
    s.monotone_constraint = {true, false};
    s.input_scale = {100.0, 1.0, 1e4};
    Nnp n = init_nnp(s, 31337);
    n.output_scale = 1.75;

    const std::string text = nnp_to_json(n);
    const Nnp back = nnp_from_json(text);
    CHECK(collect_nnp_parameters(back) == collect_nnp_parameters(n));
    CHECK(back.seed == n.seed);
    CHECK(back.output_scale == n.output_scale);
    CHECK(back.spec.input_mask == s.input_mask);
    CHECK(back.spec.monotone_constraint == s.monotone_constraint);
    CHECK(back.spec.input_scale == s.input_scale);

    Rng rng(4);
    for (int i = 0; i < 50; ++i) {
        const std::vector<double> x = {rng.uniform(-2, 2), rng.uniform(-2, 2),
                                       rng.uniform(-2, 2)};
        CHECK(forward(back, x) == forward(n, x));
    }
}

TEST_CASE("model json round trip reproduces the vector field exactly") {
    for (int which = 0; which < 3; ++which) {
        BinodeModel m = which == 0   ? build_pk_binode(5)
                        : which == 1 ? build_ultradian_binode(5)
                                     : build_ssystem_binode(2, 5);
        const std::string text = model_to_json(m);
        const BinodeModel back = model_from_json(text);
        Rng rng(10 + which);
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<double> x(m.n);
            for (double& v : x) v = rng.uniform(0.1, which == 1 ? 100.0 : 1.0);
            const double t = rng.uniform(0.0, 500.0);
            const std::vector<double> a = vector_field(m, x, t);
            const std::vector<double> b = vector_field(back, x, t);
            CHECK(a == b);
        }
        // second serialization is byte-identical
        CHECK(model_to_json(back) == text);
    }
}

TEST_CASE("model files reject unsupported versions and garbage") {
    BinodeModel m = build_monod_binode(0);
    std::string text = model_to_json(m);
    const std::string bumped =
        text.replace(text.find("\"format_version\": 1"),
                     std::string("\"format_version\": 1").size(),
                     "\"format_version\": 99");
    CHECK_THROWS_AS(model_from_json(bumped), ConfigError);
    CHECK_THROWS_AS(model_from_json("{ not json"), ConfigError);
    CHECK_THROWS_AS(model_from_json("{}"), ConfigError);
}

TEST_CASE("trajectory csv round trip at 17 significant digits") {
    TempDir tmp;
    Trajectory t;
    t.names = {"x1", "x2"};
    Rng rng(77);
    double time = 0.0;
    for (int i = 0; i < 25; ++i) {
        t.times.push_back(time);
        t.states.push_back({rng.uniform(-1, 1) / 3.0, rng.uniform(0, 1) * 1e-7});
        time += 0.05;
    }
    const fs::path path = tmp.path / "traj.csv";
    write_trajectory_csv(t, path);
    const Trajectory back = read_trajectory_csv(path);
    CHECK(back.names == t.names);
    CHECK(back.times == t.times);
    CHECK(back.states == t.states);
}

TEST_CASE("loss and sweep csv shapes") {
    TempDir tmp;
    const std::vector<double> history = {1.0, 0.5, 0.25};
    write_loss_csv(history, tmp.path / "loss.csv");
    const std::string loss_text = read_file(tmp.path / "loss.csv");
    CHECK(loss_text.find("epoch,loss\n0,1\n1,0.5\n2,0.25\n") != std::string::npos);

    std::vector<SweepCell> cells = {{1, 1, 0.5, 0.01, 0}, {1, 2, 0.25, 0.02, 1}};
    write_sweep_csv(cells, tmp.path / "sweep.csv");
    const std::string sweep_text = read_file(tmp.path / "sweep.csv");
    CHECK(sweep_text.find("layers,width,best_loss,mean_runtime_s\n") == 0);
    CHECK(sweep_text.find("1,1,0.5,") != std::string::npos);
}

TEST_CASE("surface csv carries fixed coordinates and reference column") {
    TempDir tmp;
    ProcessSurface s;
    s.process = 0;
    s.row = 1;
    s.weight = -0.25;
    s.axes = {0, 1};
    s.grid = {{0.0, 1.0}, {0.0, 0.5}};
    s.fixed_state = {0.0, 0.0, 5.0};
    s.values = {1.0, 2.0, 3.0, 4.0};
    const std::vector<double> ref = {1.0, 2.0, 3.5, 4.5};
    write_surface_csv(s, tmp.path / "surface.csv", ref);
    const std::string text = read_file(tmp.path / "surface.csv");
    CHECK(text.find("# weight: -0.25") != std::string::npos);
    CHECK(text.find("x3=5") != std::string::npos);
    CHECK(text.find("x1,x2,value,reference") != std::string::npos);
    CHECK(text.find("1,0.5,4,4.5") != std::string::npos);
}

TEST_CASE("git-style content hash matches known vectors") {
    // `git hash-object` of an empty file and of "abc"
    CHECK(git_blob_sha1("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
    CHECK(git_blob_sha1("abc") == "f2ba8f84ab5c1bce84a7b441cb1959cfc7093b7f");
}

TEST_CASE("config parsing reports the missing field") {
    try {
        parse_train_experiment(R"({"version": 1, "train": {"batch_size": 2}})");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("system") != std::string::npos);
    }
    try {
        parse_train_experiment(
            R"({"version": 1, "system": "monod", "train": {"horizon": 2, "epochs": 5}})");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("batch_size") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_train_experiment(R"({"version": 3, "system": "monod"})"),
                    ConfigError);
}

TEST_CASE("atomic write replaces files and leaves no temp behind") {
    TempDir tmp;
    const fs::path p = tmp.path / "file.txt";
    atomic_write(p, "one");
    atomic_write(p, "two");
    CHECK(read_file(p) == "two");
    CHECK_FALSE(fs::exists(p.string() + ".tmp"));
}
