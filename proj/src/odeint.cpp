#include "binode/odeint.hpp"

namespace binode {

void Trajectory::validate() const {
    if (times.size() != states.size())
        throw ConfigError("trajectory: times/states size mismatch");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1]))
            throw ConfigError("trajectory: times must be strictly increasing");
    for (const auto& row : states) {
        if (static_cast<int>(row.size()) != dim())
            throw ConfigError("trajectory: ragged state rows");
        for (double v : row)
            if (!std::isfinite(v)) throw ConfigError("trajectory: non-finite state");
    }
}

namespace {

bool all_finite(std::span<const double> x) {
    for (double v : x)
        if (!std::isfinite(v)) return false;
    return true;
}

}  // namespace

Trajectory integrate(const VectorFieldFn& f, std::span<const double> x0, double t0,
                     double t1, const IntegratorConfig& cfg) {
    cfg.validate();
    if (!(t1 > t0)) throw ConfigError("integrate: requires t1 > t0");
    const long steps = std::lround((t1 - t0) / cfg.dt);
    if (steps < 1) throw ConfigError("integrate: interval shorter than half a step");

    Trajectory traj;
    traj.times.reserve(steps + 1);
    traj.states.reserve(steps + 1);
    std::vector<double> x(x0.begin(), x0.end());
    if (!all_finite(x)) throw ConfigError("integrate: non-finite initial state");
    traj.times.push_back(t0);
    traj.states.push_back(x);

    auto field = [&f](double t, const std::vector<double>& s) {
        return f(t, std::span<const double>(s));
    };
    for (long i = 0; i < steps; ++i) {
        const double t = t0 + static_cast<double>(i) * cfg.dt;
        std::vector<double> next = cfg.method == IntegratorConfig::Method::rk4
                                       ? rk4_step<double>(field, t, cfg.dt, x)
                                       : euler_step<double>(field, t, cfg.dt, x);
        if (!all_finite(next))
            throw DivergenceError("integrate: non-finite state at step " +
                                      std::to_string(i + 1),
                                  i + 1, x);
        x = std::move(next);
        traj.times.push_back(t0 + static_cast<double>(i + 1) * cfg.dt);
        traj.states.push_back(x);
    }
    return traj;
}

Trajectory integrate(const BinodeModel& m, std::span<const double> x0, double t0,
                     double t1, const IntegratorConfig& cfg) {
    Trajectory traj = integrate(
        [&m](double t, std::span<const double> x) { return vector_field(m, x, t); },
        x0, t0, t1, cfg);
    traj.names = m.state_names;
    traj.units = m.state_units;
    return traj;
}

std::vector<std::vector<Var>> rollout(const TapedBinode& tm, std::span<const double> x0,
                                      double t0, int H, double dt) {
    if (H < 1) throw ConfigError("rollout: horizon must be >= 1");
    if (!(dt > 0.0)) throw ConfigError("rollout: dt must be > 0");
    if (static_cast<int>(x0.size()) != tm.model->n)
        throw std::invalid_argument("rollout: initial state dimension mismatch");

    std::vector<Var> x = tm.tape->constants(x0);
    auto field = [&tm](double t, const std::vector<Var>& s) {
        return tm.field(std::span<const Var>(s), t);
    };
    std::vector<std::vector<Var>> out;
    out.reserve(H);
    for (int h = 0; h < H; ++h) {
        const double t = t0 + static_cast<double>(h) * dt;
        x = rk4_step<Var>(field, t, dt, x);
        for (const Var& v : x)
            if (!std::isfinite(v.value()))
                throw DivergenceError("rollout: non-finite state at step " +
                                          std::to_string(h + 1),
                                      h + 1);
        out.push_back(x);
    }
    return out;
}

std::vector<std::vector<Var>> rollout(const BinodeModel& m, Tape& tape,
                                      std::span<const double> x0, double t0, int H,
                                      double dt) {
    TapedBinode tm = TapedBinode::lift(tape, m);
    return rollout(tm, x0, t0, H, dt);
}

}  // namespace binode
