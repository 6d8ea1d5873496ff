#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "binode/refmodels.hpp"
#include "binode/rng.hpp"
#include "binode/training.hpp"

using namespace binode;

namespace {

Trajectory make_trajectory(std::vector<double> times,
                           std::vector<std::vector<double>> states) {
    Trajectory t;
    t.times = std::move(times);
    t.states = std::move(states);
    return t;
}

}  // namespace

TEST_CASE("segment sampling boundaries and determinism") {
    Trajectory t = make_trajectory({0.0, 1.0, 2.0, 3.0, 4.0},
                                   {{0.0}, {1.0}, {2.0}, {3.0}, {4.0}});
    const std::vector<Trajectory> data = {t};
    // 5 points, H = 4 -> only start index 0 is valid
    auto segs = sample_segments(data, 8, 4, 123);
    CHECK(segs.size() == 8);
    for (const Segment& s : segs) {
        CHECK(s.t0 == 0.0);
        CHECK(s.start == std::vector<double>{0.0});
        CHECK(s.targets.size() == 4);
    }
    CHECK_THROWS_AS(sample_segments(data, 4, 5, 0), ConfigError);

    const std::vector<Trajectory> three = {t, t, t};
    auto a = sample_segments(three, 20, 2, 7);
    auto b = sample_segments(three, 20, 2, 7);
    CHECK(a.size() == 20);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].t0 == b[i].t0);
        CHECK(a[i].start == b[i].start);
        CHECK(a[i].targets == b[i].targets);
    }
}

TEST_CASE("loss definitions") {
    BinodeModel m = build_monod_binode(2);
    // zero weights: rollout stays at the start state
    for (int i = 0; i < m.stoich.rows; ++i)
        for (int j = 0; j < m.stoich.cols; ++j)
            if (m.stoich.structural(i, j)) m.stoich.set_raw(i, j, 0.0);

    Segment s;
    s.t0 = 0.0;
    s.start = {0.5, 1.0};
    s.targets = {{0.7, 1.0}, {0.5, 1.4}};
    const std::vector<Segment> segs = {s};
    // constant rollout: (0.2^2 + 0 + 0 + 0.4^2) / (1 * 2)
    const double expected = (0.04 + 0.16) / 2.0;
    CHECK(rollout_loss(m, segs, 0.05) == doctest::Approx(expected).epsilon(1e-12));

    // single segment, H = 1, squared distance
    Segment one;
    one.start = {0.5, 1.0};
    one.targets = {{0.6, 1.0}};
    const std::vector<Segment> single = {one};
    CHECK(rollout_loss(m, single, 0.05) == doctest::Approx(0.01).epsilon(1e-12));
}

TEST_CASE("a model reproducing the data has exactly zero loss") {
    BinodeModel m = build_lv_binode(3);
    IntegratorConfig cfg;
    cfg.dt = 0.1;
    Trajectory t = integrate(m, std::vector<double>{1.0, 1.0}, 0.0, 1.0, cfg);
    const std::vector<Trajectory> data = {t};
    auto segs = sample_segments(data, 10, 3, 5);
    CHECK(rollout_loss(m, segs, 0.1) == 0.0);
}

TEST_CASE("taped loss equals the tape-free loss bitwise") {
    BinodeModel m = build_monod_binode(8);
    const std::vector<Trajectory> data = generate_training_set(SystemId::monod);
    auto segs = sample_segments(data, 6, 3, 11);
    const double plain = rollout_loss(m, segs, 0.05, 4);
    const LossGrad lg = rollout_loss_gradient(m, segs, 0.05, 4);
    CHECK(plain == lg.loss);
}

TEST_CASE("loss gradient matches finite differences on a small model") {
    BinodeModel m = build_monod_binode(9);
    // shrink the networks for a fast dense finite-difference sweep
    for (Nnp& p : m.processes) {
        NnpSpec s = p.spec;
        s.hidden_layers = 2;
        s.hidden_width = 2;
        p = init_nnp(s, p.seed);
    }
    IntegratorConfig icfg;
    icfg.dt = 0.1;
    Trajectory t = integrate(m, std::vector<double>{0.2, 0.6}, 0.0, 1.0, icfg);
    const std::vector<Trajectory> data = {t};
    auto segs = sample_segments(data, 2, 2, 3);
    // nudge targets off the model trajectory so gradients are nonzero
    std::vector<Segment> perturbed(segs.begin(), segs.end());
    for (Segment& s : perturbed)
        for (auto& row : s.targets)
            for (double& v : row) v *= 1.05;

    const LossGrad lg = rollout_loss_gradient(m, perturbed, 0.1);
    std::vector<double> params = collect_parameters(m);
    REQUIRE(lg.grad.size() == params.size());

    const double h = 1e-6;
    for (std::size_t i = 0; i < params.size(); ++i) {
        BinodeModel lo = m, hi = m;
        std::vector<double> plo = params, phi = params;
        plo[i] -= h;
        phi[i] += h;
        assign_parameters(lo, plo);
        assign_parameters(hi, phi);
        const double fd =
            (rollout_loss(hi, perturbed, 0.1) - rollout_loss(lo, perturbed, 0.1)) /
            (2.0 * h);
        const double scale = std::max({1e-8, std::fabs(fd), std::fabs(lg.grad[i])});
        CHECK(std::fabs(lg.grad[i] - fd) / scale < 1e-4);
    }
}

TEST_CASE("adam step properties") {
    std::vector<double> params = {1.0, -2.0, 0.5};
    AdamState state;
    const std::vector<double> zero = {0.0, 0.0, 0.0};
    adam_step(params, zero, state, 1e-2, 0.9, 0.999, 1e-8);
    CHECK(params == std::vector<double>{1.0, -2.0, 0.5});

    // first-step magnitude is about the learning rate, regardless of scale
    // (up to the epsilon regularizer, ~1% at |g| = 1e-6)
    for (double g : {1e-6, 1.0, 1e6}) {
        std::vector<double> p = {0.0};
        AdamState st;
        const std::vector<double> grad = {g};
        adam_step(p, grad, st, 1e-2, 0.9, 0.999, 1e-8);
        CHECK(std::fabs(p[0] + 1e-2) < 2e-4);  // moves by ~lr against the gradient
    }

    std::vector<double> p = {1.0};
    AdamState st;
    const std::vector<double> g1 = {1.0, 2.0};
    CHECK_THROWS_AS(adam_step(p, g1, st, 1e-2, 0.9, 0.999, 1e-8), ConfigError);
}

TEST_CASE("joint rescaling leaves the loss unchanged") {
    BinodeModel a = build_lv_binode(21);
    const std::vector<Trajectory> data = generate_training_set(SystemId::lv);
    auto segs = sample_segments(data, 8, 4, 2);
    const double base = rollout_loss(a, segs, 0.05, 4);

    BinodeModel b = a;
    for (int j = 0; j < b.k(); ++j) {
        b.processes[j].output_scale *= 2.0;
        for (int i = 0; i < b.stoich.rows; ++i)
            if (b.stoich.structural(i, j))
                b.stoich.set_raw(i, j, b.stoich.raw_at(i, j) / 2.0);
    }
    const double scaled = rollout_loss(b, segs, 0.05, 4);
    CHECK(std::fabs(base - scaled) < 1e-12);
}

TEST_CASE("short training run improves the loss and keeps structure intact") {
    BinodeModel m = build_monod_binode(1);
    const std::vector<Trajectory> data = generate_training_set(SystemId::monod);
    TrainConfig cfg;
    cfg.batch_size = 10;
    cfg.horizon = 4;
    cfg.dt = 0.05;
    cfg.max_epochs = 150;
    cfg.seed = 5;
    TrainResult res = train(m, data, cfg);
    CHECK_FALSE(res.diverged);
    CHECK(res.loss_history.size() == 150);
    CHECK(res.best_loss < res.loss_history.front());
    CHECK(res.model.stoich.effective(1, 1) == 0.0);
    CHECK_FALSE(res.model.trained_domain.empty());
    // deterministic rerun
    TrainResult res2 = train(m, data, cfg);
    CHECK(res.loss_history == res2.loss_history);
    CHECK(collect_parameters(res.model) == collect_parameters(res2.model));
}

TEST_CASE("batch schedule grows the sampled batch") {
    BinodeModel m = build_monod_binode(1);
    const std::vector<Trajectory> data = generate_training_set(SystemId::monod);
    TrainConfig cfg;
    cfg.batch_size = 2;
    cfg.horizon = 2;
    cfg.dt = 0.05;
    cfg.max_epochs = 6;
    cfg.batch_schedule = {{3, 4}};
    TrainResult res = train(m, data, cfg);
    CHECK(res.loss_history.size() == 6);
}

TEST_CASE("training rejects inconsistent observation spacing") {
    BinodeModel m = build_monod_binode(1);
    Trajectory t = make_trajectory({0.0, 0.3}, {{0.1, 0.1}, {0.2, 0.2}});
    const std::vector<Trajectory> data = {t};
    TrainConfig cfg;
    cfg.dt = 0.07;
    cfg.batch_size = 1;
    cfg.horizon = 1;
    cfg.max_epochs = 1;
    CHECK_THROWS_AS(train(m, data, cfg), ConfigError);
}

TEST_CASE("sweep runs the full grid deterministically") {
    SweepSpec spec;
    spec.target = make_rate_law(RateLawId::michaelis_menten,
                                {{"V_max", 1.0}, {"K_m", 0.5}}, 1);
    spec.domain = DomainBox{{0.0}, {2.0}};
    spec.samples = 60;
    spec.max_layers = 2;
    spec.max_width = 2;
    spec.restarts = 2;
    spec.iterations = 40;
    spec.seed = 9;
    const auto cells = run_sweep(spec, 2);
    REQUIRE(cells.size() == 4);
    CHECK(cells[0].layers == 1);
    CHECK(cells[0].width == 1);
    CHECK(cells[3].layers == 2);
    CHECK(cells[3].width == 2);
    for (const SweepCell& c : cells) {
        CHECK(std::isfinite(c.best_loss));
        CHECK(c.mean_runtime_s > 0.0);
    }
    const auto again = run_sweep(spec, 1);
    for (std::size_t i = 0; i < cells.size(); ++i)
        CHECK(cells[i].best_loss == again[i].best_loss);
}
