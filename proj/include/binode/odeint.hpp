#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "binode/errors.hpp"
#include "binode/model.hpp"

namespace binode {

struct IntegratorConfig {
    enum class Method : std::uint8_t { rk4, euler };
    double dt = 0.05;
    Method method = Method::rk4;
    void validate() const {
        if (!(dt > 0.0)) throw ConfigError("integrator: dt must be > 0");
    }
};

// Time-stamped multivariate state series.
struct Trajectory {
    std::vector<double> times;                 // strictly increasing
    std::vector<std::vector<double>> states;   // one row per time
    std::vector<std::string> names;            // per state variable
    std::vector<std::string> units;

    int dim() const { return states.empty() ? 0 : static_cast<int>(states[0].size()); }
    std::size_t size() const { return times.size(); }
    void validate() const;
};

using VectorFieldFn =
    std::function<std::vector<double>(double t, std::span<const double> x)>;

// One classical RK4 step. Shared by the plain and the tape-recorded paths so
// both run the exact same arithmetic.
template <class S, class F>
std::vector<S> rk4_step(F&& f, double t, double dt, const std::vector<S>& x) {
    const std::size_t n = x.size();
    std::vector<S> k1 = f(t, x);
    std::vector<S> xs(x);
    for (std::size_t i = 0; i < n; ++i) xs[i] = x[i] + (dt * 0.5) * k1[i];
    std::vector<S> k2 = f(t + dt * 0.5, xs);
    for (std::size_t i = 0; i < n; ++i) xs[i] = x[i] + (dt * 0.5) * k2[i];
    std::vector<S> k3 = f(t + dt * 0.5, xs);
    for (std::size_t i = 0; i < n; ++i) xs[i] = x[i] + dt * k3[i];
    std::vector<S> k4 = f(t + dt, xs);
    std::vector<S> out(x);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = x[i] + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

template <class S, class F>
std::vector<S> euler_step(F&& f, double t, double dt, const std::vector<S>& x) {
    std::vector<S> k = f(t, x);
    std::vector<S> out(x);
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + dt * k[i];
    return out;
}

// Fixed-step integration over [t0, t1]; the step count is (t1-t0)/dt rounded
// to the nearest integer (>= 1). The trajectory contains both endpoints.
// Throws DivergenceError with the step index and last finite state when the
// state leaves the finite range.
Trajectory integrate(const VectorFieldFn& f, std::span<const double> x0, double t0,
                     double t1, const IntegratorConfig& cfg);

Trajectory integrate(const BinodeModel& m, std::span<const double> x0, double t0,
                     double t1, const IntegratorConfig& cfg);

// Tape-recorded rollout: H RK4 steps from x0 (lifted as constants), returning
// the predicted states at t0 + h*dt for h = 1..H. All returned states are
// differentiable functions of the lifted model parameters. Numerics are
// identical to `integrate` on the same grid.
std::vector<std::vector<Var>> rollout(const TapedBinode& tm, std::span<const double> x0,
                                      double t0, int H, double dt);

// Convenience wrapper that lifts `m` onto `tape` first.
std::vector<std::vector<Var>> rollout(const BinodeModel& m, Tape& tape,
                                      std::span<const double> x0, double t0, int H,
                                      double dt);

}  // namespace binode
