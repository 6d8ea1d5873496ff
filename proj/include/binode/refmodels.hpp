#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "binode/odeint.hpp"

namespace binode {

enum class SystemId : std::uint8_t { monod, lv, pk, ultradian };

const char* to_string(SystemId id);
SystemId system_id_from_string(const std::string& s);

struct MonodParams {
    double mu_max = 0.86;  // 1/h
    double K = 0.0138;     // kg/m^3
    double Y = 1.28;       // yield
    double k_d = 3e-2;     // 1/h
};

struct LvParams {
    double alpha = 1.0, beta = 1.0, gamma = 1.0, delta = 1.0;
};

struct PkParams {
    double k_x1 = 0.15;  // 1/h
    double k_x2 = 0.72;  // 1/h
};

struct UltradianParams {
    double V1 = 3, V2 = 11, V3 = 10;       // L
    double E = 0.2;                        // L/min
    double t1 = 6, t2 = 100, t_d = 12;     // min
    double k = 0.0083;                     // 1/min
    double R_m = 209;                      // mU/min
    double a1 = 6.6;
    double C1 = 300, C2 = 144, C3 = 100;   // mg/L
    double C4 = 80, C5 = 26;               // mU/L
    double U_b = 72, U_0 = 4, U_m = 90;    // mg/min
    double R_g = 180;                      // mg/min
    double alpha = 7.5, beta = 1.772;
    std::vector<std::pair<double, double>> meals = {
        {300.0, 60.0}, {650.0, 40.0}, {1100.0, 50.0}};  // (min, g)
};

std::vector<double> monod_field(const MonodParams& p, std::span<const double> x);
std::vector<double> lv_field(const LvParams& p, std::span<const double> x);
std::vector<double> pk_field(const PkParams& p, std::span<const double> x);
std::vector<double> ultradian_field(const UltradianParams& p, std::span<const double> x,
                                    double t);

// Default integration horizon, step, and observation stride per system. The
// training observations are taken at every `obs_stride`-th grid point.
struct SystemDefaults {
    double t0 = 0.0, t1 = 12.0, dt = 0.05;
    int obs_stride = 4;
    std::vector<std::vector<double>> initial_conditions;
};
SystemDefaults system_defaults(SystemId id);

// Full-resolution reference trajectories from the default initial conditions.
std::vector<Trajectory> simulate_reference(SystemId id);
std::vector<Trajectory> simulate_reference(SystemId id, double dt, double t1);

// Observation trajectories (subsampled at obs_stride) used for training.
std::vector<Trajectory> generate_training_set(SystemId id);

VectorFieldFn reference_field(SystemId id);

}  // namespace binode
