#include "binode/refmodels.hpp"

#include <cmath>

#include "binode/model.hpp"

namespace binode {

const char* to_string(SystemId id) {
    switch (id) {
        case SystemId::monod: return "monod";
        case SystemId::lv: return "lv";
        case SystemId::pk: return "pk";
        case SystemId::ultradian: return "ultradian";
    }
    return "?";
}

SystemId system_id_from_string(const std::string& s) {
    for (int i = 0; i <= static_cast<int>(SystemId::ultradian); ++i) {
        const SystemId id = static_cast<SystemId>(i);
        if (s == to_string(id)) return id;
    }
    throw ConfigError("unknown system: '" + s + "'");
}

std::vector<double> monod_field(const MonodParams& p, std::span<const double> x) {
    const double mu = p.mu_max * x[1] / (x[1] + p.K);
    return {mu * x[0] - p.k_d * x[0], -mu * x[0] / p.Y};
}

std::vector<double> lv_field(const LvParams& p, std::span<const double> x) {
    return {p.alpha * x[0] - p.beta * x[0] * x[1],
            p.gamma * x[0] * x[1] - p.delta * x[1]};
}

std::vector<double> pk_field(const PkParams& p, std::span<const double> x) {
    return {p.k_x2 * x[1] - p.k_x1 * x[0], -p.k_x2 * x[1], p.k_x1 * x[0]};
}

std::vector<double> ultradian_field(const UltradianParams& p, std::span<const double> x,
                                    double t) {
    const double x1 = x[0], x2 = x[1], x3 = x[2], x4 = x[3], x5 = x[4], x6 = x[5];
    const double exchange = p.E * (x1 / p.V1 - x2 / p.V2);
    const double f = -exchange - x1 / p.t1;
    const double g = exchange - x2 / p.t2;
    const double f1 = p.R_m * sigmoid(x3 / (p.V3 * p.C1) - p.a1);
    const double f2 = p.U_b * (1.0 - std::exp(-x3 / (p.C2 * p.V3)));
    const double kappa = (1.0 / p.C4) * (1.0 / p.V2 + 1.0 / (p.E * p.t2));
    const double pw = x2 > 0.0 ? std::pow(kappa * x2, p.beta) : 0.0;
    const double f3 = (p.U_0 + p.U_m * (pw / (1.0 + pw))) / (p.C3 * p.V3);
    const double f4 = p.R_g * sigmoid(p.alpha * (1.0 - x6 / (p.C5 * p.V1)));
    const double ig = eval_meal_input(p.k, p.meals, t);
    return {f1 + f,
            g,
            f4 + ig - f2 - f3 * x3,
            (x1 - x4) / p.t_d,
            (x4 - x5) / p.t_d,
            (x5 - x6) / p.t_d};
}

SystemDefaults system_defaults(SystemId id) {
    SystemDefaults d;
    switch (id) {
        case SystemId::monod:
            d = {0.0, 12.0, 0.05, 4, {{0.005, 0.1}, {0.005, 0.3}, {0.005, 0.5}}};
            break;
        case SystemId::lv:
            d = {0.0, 12.0, 0.05, 4, {{1.6, 0.4}, {0.5, 1.5}, {1.7, 1.7}}};
            break;
        case SystemId::pk:
            d = {0.0, 10.0, 0.05, 2, {{0.0, 0.1, 0.0}}};
            break;
        case SystemId::ultradian:
            d = {0.0, 1800.0, 1.0, 10, {{36.0, 44.0, 11000.0, 0.0, 0.0, 0.0}}};
            break;
    }
    return d;
}

VectorFieldFn reference_field(SystemId id) {
    switch (id) {
        case SystemId::monod:
            return [p = MonodParams{}](double, std::span<const double> x) {
                return monod_field(p, x);
            };
        case SystemId::lv:
            return [p = LvParams{}](double, std::span<const double> x) {
                return lv_field(p, x);
            };
        case SystemId::pk:
            return [p = PkParams{}](double, std::span<const double> x) {
                return pk_field(p, x);
            };
        case SystemId::ultradian:
            return [p = UltradianParams{}](double t, std::span<const double> x) {
                return ultradian_field(p, x, t);
            };
    }
    throw ConfigError("unhandled system id");
}

namespace {

void label(Trajectory& t, SystemId id) {
    switch (id) {
        case SystemId::monod:
            t.names = {"x1", "x2"};
            t.units = {"kg/m^3", "kg/m^3"};
            break;
        case SystemId::lv:
            t.names = {"x1", "x2"};
            t.units = {"1", "1"};
            break;
        case SystemId::pk:
            t.names = {"x1", "x2", "x3"};
            t.units = {"ug", "ug", "ug"};
            break;
        case SystemId::ultradian:
            t.names = {"x1", "x2", "x3", "x4", "x5", "x6"};
            t.units = {"uU/mL", "uU/mL", "mg", "uU/mL", "uU/mL", "uU/mL"};
            break;
    }
}

}  // namespace

std::vector<Trajectory> simulate_reference(SystemId id, double dt, double t1) {
    const SystemDefaults d = system_defaults(id);
    const VectorFieldFn f = reference_field(id);
    IntegratorConfig cfg;
    cfg.dt = dt;
    std::vector<Trajectory> out;
    for (const auto& x0 : d.initial_conditions) {
        Trajectory t = integrate(f, x0, d.t0, t1, cfg);
        label(t, id);
        out.push_back(std::move(t));
    }
    return out;
}

std::vector<Trajectory> simulate_reference(SystemId id) {
    const SystemDefaults d = system_defaults(id);
    return simulate_reference(id, d.dt, d.t1);
}

std::vector<Trajectory> generate_training_set(SystemId id) {
    const SystemDefaults d = system_defaults(id);
    std::vector<Trajectory> full = simulate_reference(id);
    std::vector<Trajectory> out;
    for (Trajectory& t : full) {
        Trajectory obs;
        obs.names = t.names;
        obs.units = t.units;
        for (std::size_t i = 0; i < t.size(); i += d.obs_stride) {
            obs.times.push_back(t.times[i]);
            obs.states.push_back(std::move(t.states[i]));
        }
        out.push_back(std::move(obs));
    }
    return out;
}

}  // namespace binode
