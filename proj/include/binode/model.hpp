#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "binode/autodiff.hpp"
#include "binode/errors.hpp"
#include "binode/nnp.hpp"

namespace binode {

enum class SignConstraint : std::uint8_t { free_sign, nonnegative, nonpositive };

// Linear output layer mapping process rates to state derivatives. Entries
// whose structural mask is false are pinned to exactly 0; sign-constrained
// entries store a raw value r and contribute +r^2 / -r^2, which keeps the
// optimization unconstrained.
struct StoichiometricLayer {
    int rows = 0, cols = 0;
    std::vector<double> raw;               // row-major raw values
    std::vector<bool> structural_mask;     // false => pinned to exactly 0
    std::vector<SignConstraint> sign;
    std::vector<bool> trainable;

    static StoichiometricLayer dense(int rows, int cols);

    std::size_t at(int i, int j) const {
        return static_cast<std::size_t>(i) * cols + j;
    }
    bool structural(int i, int j) const { return structural_mask[at(i, j)]; }
    bool is_trainable(int i, int j) const { return trainable[at(i, j)]; }
    SignConstraint sign_at(int i, int j) const { return sign[at(i, j)]; }
    double raw_at(int i, int j) const { return raw[at(i, j)]; }
    void set_raw(int i, int j, double v) { raw[at(i, j)] = v; }

    // Effective weight after mask and sign reparameterization.
    double effective(int i, int j) const {
        if (!structural(i, j)) return 0.0;
        const double r = raw_at(i, j);
        switch (sign_at(i, j)) {
            case SignConstraint::nonnegative: return r * r;
            case SignConstraint::nonpositive: return -(r * r);
            default: return r;
        }
    }
    void validate() const;
};

// Closed-form additive contribution to one state equation, used by hybrid
// models where part of the dynamics is known. Terms may depend explicitly on
// time (meal inputs); autonomous terms ignore t.
enum class FixedTermKind : std::uint8_t {
    linear,             // coef * x[index]
    scaled_difference,  // (x[index] - x[index2]) / denom
    logistic,           // gain * sigmoid(slope * x[index] + offset)
    saturating_exp,     // gain * (1 - exp(-rate * x[index]))
    uptake_product,     // c*(U0 + Um*p/(1+p))*x[index2], p = (kappa*max(x[index],0))^beta
    meal_input,         // sum_{t_i <= t} q_i * k * exp(-k (t - t_i))
};

const char* to_string(FixedTermKind k);
FixedTermKind fixed_term_kind_from_string(const std::string& s);

struct FixedTerm {
    FixedTermKind kind = FixedTermKind::linear;
    double scale = 1.0;  // multiplies the base form
    std::map<std::string, double> params;
    int index = -1, index2 = -1;
    std::vector<std::pair<double, double>> schedule;  // meal (time, quantity)

    double param(const std::string& name) const {
        auto it = params.find(name);
        if (it == params.end())
            throw ConfigError(std::string("fixed term '") + to_string(kind) +
                              "' is missing parameter '" + name + "'");
        return it->second;
    }
};

double eval_meal_input(double k, std::span<const std::pair<double, double>> schedule,
                       double t);

template <class S>
S const_like(std::span<const S> context, double v);
template <>
inline double const_like<double>(std::span<const double>, double v) {
    return v;
}
template <>
inline Var const_like<Var>(std::span<const Var> context, double v) {
    return context[0].tape()->constant(v);
}

template <class S>
S sigmoid_s(S x) {
    using std::exp;
    if (value_of(x) >= 0.0) return 1.0 / (1.0 + exp(-x));
    S e = exp(x);
    return e / (1.0 + e);
}

template <class S>
S eval_fixed_term(const FixedTerm& ft, std::span<const S> x, double t) {
    using std::exp;
    using std::pow;
    switch (ft.kind) {
        case FixedTermKind::linear:
            return ft.scale * (ft.param("coef") * x[ft.index]);
        case FixedTermKind::scaled_difference:
            return ft.scale * ((x[ft.index] - x[ft.index2]) / ft.param("denom"));
        case FixedTermKind::logistic:
            return ft.scale *
                   (ft.param("gain") *
                    sigmoid_s<S>(ft.param("slope") * x[ft.index] + ft.param("offset")));
        case FixedTermKind::saturating_exp:
            return ft.scale *
                   (ft.param("gain") * (1.0 - exp(-ft.param("rate") * x[ft.index])));
        case FixedTermKind::uptake_product: {
            const double u0 = ft.param("U0"), um = ft.param("Um");
            const double c = ft.param("c"), beta = ft.param("beta");
            const double kappa = ft.param("kappa");
            S p = pow(kappa * relu(x[ft.index]), beta);
            S inner = u0 + um * (p / (1.0 + p));
            return ft.scale * (c * (inner * x[ft.index2]));
        }
        case FixedTermKind::meal_input:
            return const_like<S>(
                x, ft.scale * eval_meal_input(ft.param("k"), ft.schedule, t));
    }
    throw ConfigError("unhandled fixed term kind");
}

// Composition of k neural network processes through a masked stoichiometric
// layer, plus optional fixed mechanistic terms per state equation.
struct BinodeModel {
    int n = 0;
    std::vector<Nnp> processes;
    StoichiometricLayer stoich;
    std::vector<std::vector<FixedTerm>> fixed_terms;  // per state row; may be empty
    std::vector<std::string> state_names;
    std::vector<std::string> state_units;
    // Per-state (lo, hi) hull of the data last trained on; empty = unknown.
    std::vector<std::pair<double, double>> trained_domain;

    int k() const { return static_cast<int>(processes.size()); }
    void validate() const;
};

template <class S, class ProcParamsAt, class RawAt>
std::vector<S> eval_vector_field(const BinodeModel& m, ProcParamsAt&& proc_at,
                                 RawAt&& raw_at, std::span<const S> state, double t) {
    if (static_cast<int>(state.size()) != m.n)
        throw std::invalid_argument("vector_field: state has dimension " +
                                    std::to_string(state.size()) + ", expected " +
                                    std::to_string(m.n));
    const int k = m.k();
    std::vector<S> rates;
    rates.reserve(k);
    for (int j = 0; j < k; ++j) {
        S v = nnp_forward<S>(m.processes[j].spec, proc_at(j), state);
        if (m.processes[j].output_scale != 1.0) v = v * m.processes[j].output_scale;
        if (!std::isfinite(value_of(v)))
            throw DivergenceError("vector_field: non-finite output of process " +
                                      std::to_string(j),
                                  j);
        rates.push_back(v);
    }
    std::vector<S> dx;
    dx.reserve(m.n);
    for (int i = 0; i < m.n; ++i) {
        std::optional<S> acc;
        for (int j = 0; j < k; ++j) {
            if (!m.stoich.structural(i, j)) continue;
            S w = raw_at(i, j);
            switch (m.stoich.sign_at(i, j)) {
                case SignConstraint::nonnegative: w = w * w; break;
                case SignConstraint::nonpositive: w = -(w * w); break;
                default: break;
            }
            S term = w * rates[j];
            acc = acc ? *acc + term : term;
        }
        if (i < static_cast<int>(m.fixed_terms.size())) {
            for (const FixedTerm& ft : m.fixed_terms[i]) {
                S term = eval_fixed_term<S>(ft, state, t);
                acc = acc ? *acc + term : term;
            }
        }
        dx.push_back(acc ? *acc : const_like<S>(state, 0.0));
    }
    return dx;
}

// dX/dt = W V(X) + fixed terms; autonomous models ignore t.
std::vector<double> vector_field(const BinodeModel& m, std::span<const double> state,
                                 double t = 0.0);

// W applied to given process rates (masks and sign constraints included);
// exposes the stoichiometric combination for testing against hand values.
std::vector<double> stoichiometric_combine(const StoichiometricLayer& w,
                                           std::span<const double> rates);

// Model with all trainable parameters lifted onto a tape, in the canonical
// flat order (per process: layer weights then biases; then trainable
// stoichiometric entries row-major).
struct TapedBinode {
    const BinodeModel* model = nullptr;
    Tape* tape = nullptr;
    std::vector<NnpParams<Var>> proc_params;
    std::vector<Var> stoich_raw;  // full row-major; masked entries invalid

    static TapedBinode lift(Tape& tape, const BinodeModel& m);

    std::vector<Var> field(std::span<const Var> state, double t) const {
        return eval_vector_field<Var>(
            *model, [&](int j) -> const NnpParams<Var>& { return proc_params[j]; },
            [&](int i, int j) { return stoich_raw[model->stoich.at(i, j)]; }, state, t);
    }
};

// Flat trainable-parameter vector (canonical order, see TapedBinode).
std::vector<double> collect_parameters(const BinodeModel& m);
void assign_parameters(BinodeModel& m, std::span<const double> flat);
std::size_t parameter_count(const BinodeModel& m);

// --- application model builders --------------------------------------------

BinodeModel build_monod_binode(std::uint64_t seed = 0);
BinodeModel build_lv_binode(std::uint64_t seed = 0);
BinodeModel build_pk_binode(std::uint64_t seed = 0);
BinodeModel build_ultradian_binode(std::uint64_t seed = 0);
// S-system template: two processes per state (production with nonnegative
// output weight, degradation with nonpositive), all seeing the full state.
BinodeModel build_ssystem_binode(int n, std::uint64_t seed = 0);

// --- learned-contribution surfaces ------------------------------------------

struct GridSpec {
    std::vector<int> axes;      // 1 or 2 state indices
    std::vector<double> lo, hi; // per axis
    std::vector<int> counts;    // per axis, >= 1
    void validate(int n) const;
};

struct ProcessSurface {
    int process = 0;
    int row = 0;
    double weight = 0.0;  // effective signed W entry used
    std::vector<int> axes;
    std::vector<std::vector<double>> grid;  // per-axis coordinates, increasing
    std::vector<double> fixed_state;        // values of the non-axis coordinates
    std::vector<double> values;             // row-major, first axis slowest
};

// Samples the learned contribution w * v_j over a 1D or 2D grid, where w is
// the effective entry W(row, process). Coordinates outside the recorded
// trained domain produce a warning on stderr, not an error.
ProcessSurface extract_surface(const BinodeModel& m, int process, int row,
                               const GridSpec& grid,
                               std::span<const double> fixed_values);

}  // namespace binode
