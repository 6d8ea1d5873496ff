#include "binode/training.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <thread>

#include "binode/rng.hpp"

namespace binode {

std::vector<Segment> sample_segments(std::span<const Trajectory> trajectories, int B,
                                     int H, std::uint64_t seed) {
    if (B < 1) throw ConfigError("sample_segments: B must be >= 1");
    if (H < 1) throw ConfigError("sample_segments: H must be >= 1");
    if (trajectories.empty()) throw ConfigError("sample_segments: no trajectories");

    std::vector<std::size_t> starts_per_traj;
    std::size_t total = 0;
    for (const Trajectory& t : trajectories) {
        if (static_cast<int>(t.size()) < H + 1)
            throw ConfigError("sample_segments: trajectory with " +
                              std::to_string(t.size()) +
                              " points is too short for horizon " + std::to_string(H));
        starts_per_traj.push_back(t.size() - H);
        total += t.size() - H;
    }

    Rng rng(seed);
    std::vector<Segment> out;
    out.reserve(B);
    for (int b = 0; b < B; ++b) {
        std::size_t pick = rng.uniform_int(total);
        std::size_t ti = 0;
        while (pick >= starts_per_traj[ti]) {
            pick -= starts_per_traj[ti];
            ++ti;
        }
        const Trajectory& t = trajectories[ti];
        Segment s;
        s.t0 = t.times[pick];
        s.start = t.states[pick];
        s.targets.assign(t.states.begin() + pick + 1, t.states.begin() + pick + 1 + H);
        out.push_back(std::move(s));
    }
    return out;
}

namespace {

// Squared-error accumulation for one segment; shared by the double and Var
// paths so both produce identical arithmetic.
template <class S, class Field>
S segment_sq_error(Field&& field, std::vector<S> x, const Segment& seg, double dt,
                   int steps_per_obs) {
    S total = const_like<S>(std::span<const S>(x), 0.0);
    const int H = static_cast<int>(seg.targets.size());
    for (int h = 0; h < H; ++h) {
        for (int s = 0; s < steps_per_obs; ++s) {
            const double t =
                seg.t0 + (static_cast<double>(h) * steps_per_obs + s) * dt;
            x = rk4_step<S>(field, t, dt, x);
        }
        for (std::size_t i = 0; i < x.size(); ++i) {
            S diff = x[i] - seg.targets[h][i];
            total = total + diff * diff;
        }
    }
    return total;
}

}  // namespace

double rollout_loss(const BinodeModel& m, std::span<const Segment> segments, double dt,
                    int steps_per_obs) {
    if (segments.empty()) throw ConfigError("rollout_loss: no segments");
    auto field = [&m](double t, const std::vector<double>& x) {
        return vector_field(m, x, t);
    };
    double total = 0.0;
    for (const Segment& seg : segments)
        total = total + segment_sq_error<double>(field, seg.start, seg, dt, steps_per_obs);
    const double scale =
        1.0 / (static_cast<double>(segments.size()) *
               static_cast<double>(segments.front().targets.size()));
    return total * scale;
}

LossGrad rollout_loss_gradient(const BinodeModel& m, std::span<const Segment> segments,
                               double dt, int steps_per_obs) {
    Tape tape;
    return rollout_loss_gradient(m, segments, dt, steps_per_obs, tape);
}

LossGrad rollout_loss_gradient(const BinodeModel& m, std::span<const Segment> segments,
                               double dt, int steps_per_obs, Tape& tape) {
    if (segments.empty()) throw ConfigError("rollout_loss_gradient: no segments");
    tape.clear();
    TapedBinode tm = TapedBinode::lift(tape, m);
    auto field = [&tm](double t, const std::vector<Var>& x) {
        return tm.field(std::span<const Var>(x), t);
    };
    Var total = tape.constant(0.0);
    bool first = true;
    for (const Segment& seg : segments) {
        std::vector<Var> x0 = tape.constants(seg.start);
        Var e = segment_sq_error<Var>(field, std::move(x0), seg, dt, steps_per_obs);
        total = first ? e : total + e;
        first = false;
    }
    const double scale =
        1.0 / (static_cast<double>(segments.size()) *
               static_cast<double>(segments.front().targets.size()));
    Var loss = total * scale;
    tape.backward(loss);
    return LossGrad{loss.value(), tape.parameter_gradient()};
}

void adam_step(std::vector<double>& params, std::span<const double> grads,
               AdamState& state, double lr, double beta1, double beta2, double eps) {
    if (params.size() != grads.size())
        throw ConfigError("adam_step: parameter/gradient size mismatch");
    if (state.m.empty()) {
        state.m.assign(params.size(), 0.0);
        state.v.assign(params.size(), 0.0);
        state.t = 0;
    }
    if (state.m.size() != params.size())
        throw ConfigError("adam_step: state size mismatch");
    state.t += 1;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * grads[i];
        state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * grads[i] * grads[i];
        params[i] -= lr * (state.m[i] / c1) / (std::sqrt(state.v[i] / c2) + eps);
    }
}

namespace {

bool all_finite(std::span<const double> v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

int observation_stride(std::span<const Trajectory> data, double dt) {
    const Trajectory& t = data.front();
    if (t.size() < 2) throw ConfigError("train: trajectory needs >= 2 points");
    const double spacing = t.times[1] - t.times[0];
    const long m = std::lround(spacing / dt);
    if (m < 1 || std::abs(spacing - static_cast<double>(m) * dt) >
                     1e-9 * std::max(1.0, spacing))
        throw ConfigError("train: observation spacing is not an integer multiple of dt");
    return static_cast<int>(m);
}

}  // namespace

namespace {

// every valid (trajectory, start) segment, in order
std::vector<Segment> all_segments(std::span<const Trajectory> data, int H) {
    std::vector<Segment> out;
    for (const Trajectory& t : data) {
        for (std::size_t s = 0; s + H < t.size(); ++s) {
            Segment seg;
            seg.t0 = t.times[s];
            seg.start = t.states[s];
            seg.targets.assign(t.states.begin() + s + 1, t.states.begin() + s + 1 + H);
            out.push_back(std::move(seg));
        }
    }
    return out;
}

}  // namespace

TrainResult train(BinodeModel model, std::span<const Trajectory> data,
                  const TrainConfig& cfg) {
    cfg.validate();
    model.validate();
    const int stride = observation_stride(data, cfg.dt);

    TrainResult res;
    std::vector<double> params = collect_parameters(model);
    std::vector<double> best = params;
    double best_loss = std::numeric_limits<double>::infinity();
    int best_epoch = -1;
    AdamState adam;
    res.loss_history.reserve(cfg.max_epochs);

    // Batch losses are noisy (segments are resampled each epoch); the
    // returned model is the best iterate under the dense all-segments loss,
    // evaluated periodically.
    const std::vector<Segment> dense = all_segments(data, cfg.horizon);
    constexpr int kEvalEvery = 100;
    auto consider_best = [&](int epoch) {
        try {
            const double full = rollout_loss(model, dense, cfg.dt, stride);
            if (std::isfinite(full) && full < best_loss) {
                best_loss = full;
                best_epoch = epoch;
                best = params;
            }
        } catch (const DivergenceError&) {
        }
    };
    consider_best(-1);

    int batch = cfg.batch_size;
    Tape scratch;
    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        for (const auto& [at, add] : cfg.batch_schedule)
            if (at == epoch) batch += add;
        const std::vector<Segment> segments =
            sample_segments(data, batch, cfg.horizon, Rng::derive(cfg.seed, epoch));

        LossGrad lg;
        try {
            lg = rollout_loss_gradient(model, segments, cfg.dt, stride, scratch);
        } catch (const DivergenceError&) {
            res.diverged = true;
            res.diverged_epoch = epoch;
            break;
        }
        if (!std::isfinite(lg.loss)) {
            res.diverged = true;
            res.diverged_epoch = epoch;
            break;
        }
        res.loss_history.push_back(lg.loss);
        if (!all_finite(lg.grad)) {
            ++res.rejected_steps;  // step rejected, parameters kept
            continue;
        }
        adam_step(params, lg.grad, adam, cfg.learning_rate, cfg.beta1, cfg.beta2,
                  cfg.epsilon);
        assign_parameters(model, params);
        if ((epoch + 1) % kEvalEvery == 0 || epoch + 1 == cfg.max_epochs)
            consider_best(epoch);
    }

    assign_parameters(model, best);
    // record the hull of the training data for later surface extraction
    model.trained_domain.assign(model.n, {std::numeric_limits<double>::infinity(),
                                          -std::numeric_limits<double>::infinity()});
    for (const Trajectory& t : data)
        for (const auto& row : t.states)
            for (int i = 0; i < model.n; ++i) {
                model.trained_domain[i].first = std::min(model.trained_domain[i].first, row[i]);
                model.trained_domain[i].second =
                    std::max(model.trained_domain[i].second, row[i]);
            }
    res.model = std::move(model);
    res.best_loss = best_loss;
    res.best_epoch = best_epoch;
    return res;
}

// ---------------------------------------------------------------------------
// Architecture sweep
// ---------------------------------------------------------------------------

std::vector<SweepCell> run_sweep(const SweepSpec& spec, int jobs) {
    const Dataset data =
        sample_dataset(spec.target, spec.domain, spec.samples, spec.data_seed);
    return run_sweep_with_data(spec, data, jobs);
}

std::vector<SweepCell> run_sweep_with_data(const SweepSpec& spec, const Dataset& data,
                                           int jobs) {
    if (spec.max_layers < 1 || spec.max_width < 1)
        throw ConfigError("run_sweep: grid must be at least 1x1");
    if (spec.restarts < 1) throw ConfigError("run_sweep: restarts must be >= 1");
    if (data.size() == 0) throw ConfigError("run_sweep: empty dataset");
    if (jobs < 1) jobs = 1;

    struct Task {
        int layers, width, restart;
    };
    std::vector<Task> tasks;
    for (int l = 1; l <= spec.max_layers; ++l)
        for (int w = 1; w <= spec.max_width; ++w)
            for (int r = 0; r < spec.restarts; ++r) tasks.push_back({l, w, r});

    struct RunResult {
        double loss = std::numeric_limits<double>::infinity();
        double seconds = 0.0;
        bool diverged = false;
    };
    std::vector<RunResult> results(tasks.size());

    TrainConfig cfg;
    cfg.max_epochs = spec.iterations;
    cfg.learning_rate = spec.learning_rate;

    NnpSpec base;
    base.input_mask.assign(data.inputs.front().size(), true);
    base.hidden_activation = spec.hidden_activation;
    base.output_activation = spec.output_activation;

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            const Task& task = tasks[i];
            NnpSpec s = base;
            s.hidden_layers = task.layers;
            s.hidden_width = task.width;
            const std::uint64_t run_seed = Rng::derive(
                spec.seed, (static_cast<std::uint64_t>(task.layers) * 64 + task.width) *
                                   1024 +
                               task.restart);
            const auto start = std::chrono::steady_clock::now();
            try {
                const Nnp nnp = init_nnp(s, run_seed);
                const FitResult fit = fit_surface(nnp, data, cfg);
                results[i].loss = fit.best_loss;
            } catch (const DivergenceError&) {
                results[i].diverged = true;
            }
            results[i].seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                    .count();
        }
    };
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (std::thread& th : pool) th.join();
    }

    std::vector<SweepCell> cells;
    cells.reserve(static_cast<std::size_t>(spec.max_layers) * spec.max_width);
    std::size_t at = 0;
    for (int l = 1; l <= spec.max_layers; ++l) {
        for (int w = 1; w <= spec.max_width; ++w) {
            SweepCell cell;
            cell.layers = l;
            cell.width = w;
            cell.best_loss = std::numeric_limits<double>::infinity();
            double time_sum = 0.0;
            for (int r = 0; r < spec.restarts; ++r, ++at) {
                const RunResult& rr = results[at];
                time_sum += rr.seconds;
                if (rr.diverged)
                    ++cell.diverged;
                else
                    cell.best_loss = std::min(cell.best_loss, rr.loss);
            }
            cell.mean_runtime_s = time_sum / spec.restarts;
            cells.push_back(cell);
        }
    }
    return cells;
}

}  // namespace binode
