#include "binode/model.hpp"

#include <cmath>
#include <cstdio>

#include "binode/rng.hpp"

namespace binode {

StoichiometricLayer StoichiometricLayer::dense(int rows, int cols) {
    StoichiometricLayer w;
    w.rows = rows;
    w.cols = cols;
    const std::size_t n = static_cast<std::size_t>(rows) * cols;
    w.raw.assign(n, 0.0);
    w.structural_mask.assign(n, true);
    w.sign.assign(n, SignConstraint::free_sign);
    w.trainable.assign(n, true);
    return w;
}

void StoichiometricLayer::validate() const {
    const std::size_t n = static_cast<std::size_t>(rows) * cols;
    if (rows < 1 || cols < 1) throw ConfigError("stoichiometric layer: empty shape");
    if (raw.size() != n || structural_mask.size() != n || sign.size() != n ||
        trainable.size() != n)
        throw ConfigError("stoichiometric layer: field sizes do not match shape");
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j)
            if (!structural(i, j) && raw_at(i, j) != 0.0)
                throw ConfigError("stoichiometric layer: masked entry has nonzero raw value");
}

const char* to_string(FixedTermKind k) {
    switch (k) {
        case FixedTermKind::linear: return "linear";
        case FixedTermKind::scaled_difference: return "scaled_difference";
        case FixedTermKind::logistic: return "logistic";
        case FixedTermKind::saturating_exp: return "saturating_exp";
        case FixedTermKind::uptake_product: return "uptake_product";
        case FixedTermKind::meal_input: return "meal_input";
    }
    return "?";
}

FixedTermKind fixed_term_kind_from_string(const std::string& s) {
    for (int i = 0; i <= static_cast<int>(FixedTermKind::meal_input); ++i) {
        const FixedTermKind k = static_cast<FixedTermKind>(i);
        if (s == to_string(k)) return k;
    }
    throw ConfigError("unknown fixed term kind: '" + s + "'");
}

double eval_meal_input(double k, std::span<const std::pair<double, double>> schedule,
                       double t) {
    double acc = 0.0;
    for (const auto& [ti, qi] : schedule)
        if (ti <= t) acc += qi * k * std::exp(-k * (t - ti));
    return acc;
}

void BinodeModel::validate() const {
    if (n < 1) throw ConfigError("model: state dimension must be >= 1");
    if (processes.empty()) throw ConfigError("model: needs at least one process");
    for (const Nnp& p : processes) {
        p.spec.validate();
        if (p.spec.state_dim() != n)
            throw ConfigError("model: process input mask length must equal n");
    }
    stoich.validate();
    if (stoich.rows != n || stoich.cols != k())
        throw ConfigError("model: stoichiometric layer shape must be n x k");
    if (!fixed_terms.empty() && static_cast<int>(fixed_terms.size()) != n)
        throw ConfigError("model: fixed_terms must have one entry per state");
    if (!state_names.empty() && static_cast<int>(state_names.size()) != n)
        throw ConfigError("model: state_names length must equal n");
}

std::vector<double> vector_field(const BinodeModel& m, std::span<const double> state,
                                 double t) {
    return eval_vector_field<double>(
        m, [&](int j) -> const NnpParams<double>& { return m.processes[j].params; },
        [&](int i, int j) { return m.stoich.raw_at(i, j); }, state, t);
}

std::vector<double> stoichiometric_combine(const StoichiometricLayer& w,
                                           std::span<const double> rates) {
    if (static_cast<int>(rates.size()) != w.cols)
        throw std::invalid_argument("stoichiometric_combine: rate vector mismatch");
    std::vector<double> out(w.rows, 0.0);
    for (int i = 0; i < w.rows; ++i) {
        double acc = 0.0;
        for (int j = 0; j < w.cols; ++j)
            if (w.structural(i, j)) acc += w.effective(i, j) * rates[j];
        out[i] = acc;
    }
    return out;
}

TapedBinode TapedBinode::lift(Tape& tape, const BinodeModel& m) {
    TapedBinode tm;
    tm.model = &m;
    tm.tape = &tape;
    for (const Nnp& p : m.processes)
        tm.proc_params.push_back(lift_nnp(tape, p, /*trainable=*/true));
    tm.stoich_raw.assign(m.stoich.raw.size(), Var{});
    for (int i = 0; i < m.stoich.rows; ++i) {
        for (int j = 0; j < m.stoich.cols; ++j) {
            if (!m.stoich.structural(i, j)) continue;
            const double r = m.stoich.raw_at(i, j);
            tm.stoich_raw[m.stoich.at(i, j)] =
                m.stoich.is_trainable(i, j) ? tape.parameter(r) : tape.constant(r);
        }
    }
    return tm;
}

std::size_t parameter_count(const BinodeModel& m) {
    std::size_t count = 0;
    for (const Nnp& p : m.processes) count += nnp_parameter_count(p.spec);
    for (int i = 0; i < m.stoich.rows; ++i)
        for (int j = 0; j < m.stoich.cols; ++j)
            if (m.stoich.structural(i, j) && m.stoich.is_trainable(i, j)) ++count;
    return count;
}

std::vector<double> collect_parameters(const BinodeModel& m) {
    std::vector<double> flat;
    flat.reserve(parameter_count(m));
    for (const Nnp& p : m.processes) {
        auto sub = collect_nnp_parameters(p);
        flat.insert(flat.end(), sub.begin(), sub.end());
    }
    for (int i = 0; i < m.stoich.rows; ++i)
        for (int j = 0; j < m.stoich.cols; ++j)
            if (m.stoich.structural(i, j) && m.stoich.is_trainable(i, j))
                flat.push_back(m.stoich.raw_at(i, j));
    return flat;
}

void assign_parameters(BinodeModel& m, std::span<const double> flat) {
    if (flat.size() != parameter_count(m))
        throw std::invalid_argument("assign_parameters: length mismatch");
    std::size_t at = 0;
    for (Nnp& p : m.processes) {
        const std::size_t c = nnp_parameter_count(p.spec);
        assign_nnp_parameters(p, flat.subspan(at, c));
        at += c;
    }
    for (int i = 0; i < m.stoich.rows; ++i)
        for (int j = 0; j < m.stoich.cols; ++j)
            if (m.stoich.structural(i, j) && m.stoich.is_trainable(i, j))
                m.stoich.set_raw(i, j, flat[at++]);
}

// ---------------------------------------------------------------------------
// Application models
// ---------------------------------------------------------------------------

namespace {

NnpSpec app_spec(int n, std::initializer_list<int> inputs, OutputActivation out) {
    NnpSpec s;
    s.input_mask.assign(n, false);
    for (int i : inputs) s.input_mask[i] = true;
    s.hidden_layers = 5;
    s.hidden_width = 5;
    s.hidden_activation = Activation::elu;
    s.output_activation = out;
    return s;
}

// Small initial output weights: the composed field starts near zero, so the
// per-equation data decides each contribution's sign and scale. Large random
// signed inits (e.g. U(-0.5, 0.5)) let paired processes lock into mutually
// cancelling roles that later training cannot unwind.
void init_stoich(StoichiometricLayer& w, Rng& rng) {
    for (int i = 0; i < w.rows; ++i) {
        for (int j = 0; j < w.cols; ++j) {
            if (!w.structural(i, j)) continue;
            if (!w.is_trainable(i, j)) continue;
            if (w.sign_at(i, j) == SignConstraint::free_sign)
                w.set_raw(i, j, rng.uniform(-0.05, 0.05));
            else
                w.set_raw(i, j, rng.uniform(0.0, 0.3));
        }
    }
}

void mask_out(StoichiometricLayer& w, int i, int j) {
    w.structural_mask[w.at(i, j)] = false;
    w.trainable[w.at(i, j)] = false;
    w.set_raw(i, j, 0.0);
}

FixedTerm linear_term(double coef, int index) {
    FixedTerm ft;
    ft.kind = FixedTermKind::linear;
    ft.params["coef"] = coef;
    ft.index = index;
    return ft;
}

}  // namespace

BinodeModel build_monod_binode(std::uint64_t seed) {
    BinodeModel m;
    m.n = 2;
    m.processes = {init_nnp(app_spec(2, {0, 1}, OutputActivation::softplus),
                            Rng::derive(seed, 1)),
                   init_nnp(app_spec(2, {0}, OutputActivation::softplus),
                            Rng::derive(seed, 2))};
    m.stoich = StoichiometricLayer::dense(2, 2);
    mask_out(m.stoich, 1, 1);
    Rng rng(Rng::derive(seed, 0));
    init_stoich(m.stoich, rng);
    m.state_names = {"x1", "x2"};
    m.state_units = {"kg/m^3", "kg/m^3"};
    return m;
}

BinodeModel build_lv_binode(std::uint64_t seed) {
    BinodeModel m;
    m.n = 2;
    m.processes = {init_nnp(app_spec(2, {0}, OutputActivation::softplus),
                            Rng::derive(seed, 1)),
                   init_nnp(app_spec(2, {1}, OutputActivation::softplus),
                            Rng::derive(seed, 2)),
                   init_nnp(app_spec(2, {0, 1}, OutputActivation::softplus),
                            Rng::derive(seed, 3))};
    m.stoich = StoichiometricLayer::dense(2, 3);
    mask_out(m.stoich, 0, 1);
    mask_out(m.stoich, 1, 0);
    Rng rng(Rng::derive(seed, 0));
    init_stoich(m.stoich, rng);
    m.state_names = {"x1", "x2"};
    m.state_units = {"1", "1"};
    return m;
}

BinodeModel build_pk_binode(std::uint64_t seed) {
    BinodeModel m;
    m.n = 3;
    // the learned rate of change of x1 can take both signs
    m.processes = {init_nnp(app_spec(3, {0, 1, 2}, OutputActivation::identity),
                            Rng::derive(seed, 1))};
    m.stoich = StoichiometricLayer::dense(3, 1);
    mask_out(m.stoich, 1, 0);
    mask_out(m.stoich, 2, 0);
    Rng rng(Rng::derive(seed, 0));
    init_stoich(m.stoich, rng);
    m.fixed_terms.resize(3);
    m.fixed_terms[1].push_back(linear_term(-0.72, 1));  // -k_x2 * x2
    m.fixed_terms[2].push_back(linear_term(0.15, 0));   // +k_x1 * x1
    m.state_names = {"x1", "x2", "x3"};
    m.state_units = {"ug", "ug", "ug"};
    return m;
}

BinodeModel build_ultradian_binode(std::uint64_t seed) {
    // reference constants
    const double V1 = 3, V2 = 11, V3 = 10, E = 0.2, t2 = 100, t_d = 12;
    const double k = 0.0083, R_m = 209, a1 = 6.6, C1 = 300, C2 = 144, C3 = 100,
                 C4 = 80, C5 = 26, U_b = 72, U_0 = 4, U_m = 90, R_g = 180,
                 alpha = 7.5, beta = 1.772;
    const double kappa = (1.0 / C4) * (1.0 / V2 + 1.0 / (E * t2));

    BinodeModel m;
    m.n = 6;
    NnpSpec s1 = app_spec(6, {0, 1, 2}, OutputActivation::identity);
    // raw magnitudes span 1e0..1e4; standardize inputs before the first layer
    s1.input_scale = {100.0, 100.0, 1e4, 1.0, 1.0, 1.0};
    NnpSpec s2 = s1;
    m.processes = {init_nnp(s1, Rng::derive(seed, 1)), init_nnp(s2, Rng::derive(seed, 2))};

    m.stoich = StoichiometricLayer::dense(6, 2);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 2; ++j)
            if (!((i == 0 && j == 0) || (i == 1 && j == 1))) mask_out(m.stoich, i, j);
    // the two NNPs enter their equations with fixed unit weight
    m.stoich.set_raw(0, 0, 1.0);
    m.stoich.set_raw(1, 1, 1.0);
    m.stoich.trainable[m.stoich.at(0, 0)] = false;
    m.stoich.trainable[m.stoich.at(1, 1)] = false;

    m.fixed_terms.resize(6);
    {
        FixedTerm f1;  // insulin secretion, logistic in glucose
        f1.kind = FixedTermKind::logistic;
        f1.params = {{"gain", R_m}, {"slope", 1.0 / (V3 * C1)}, {"offset", -a1}};
        f1.index = 2;
        m.fixed_terms[0].push_back(f1);
    }
    {
        FixedTerm f4;  // delayed glucose production, decreasing logistic
        f4.kind = FixedTermKind::logistic;
        f4.params = {{"gain", R_g}, {"slope", -alpha / (C5 * V1)}, {"offset", alpha}};
        f4.index = 5;
        m.fixed_terms[2].push_back(f4);

        FixedTerm ig;
        ig.kind = FixedTermKind::meal_input;
        ig.params = {{"k", k}};
        ig.schedule = {{300.0, 60.0}, {650.0, 40.0}, {1100.0, 50.0}};
        m.fixed_terms[2].push_back(ig);

        FixedTerm f2;  // insulin-independent glucose utilization
        f2.kind = FixedTermKind::saturating_exp;
        f2.scale = -1.0;
        f2.params = {{"gain", U_b}, {"rate", 1.0 / (C2 * V3)}};
        f2.index = 2;
        m.fixed_terms[2].push_back(f2);

        FixedTerm f3;  // insulin-dependent glucose utilization, times glucose
        f3.kind = FixedTermKind::uptake_product;
        f3.scale = -1.0;
        f3.params = {{"c", 1.0 / (C3 * V3)}, {"U0", U_0},   {"Um", U_m},
                     {"kappa", kappa},       {"beta", beta}};
        f3.index = 1;
        f3.index2 = 2;
        m.fixed_terms[2].push_back(f3);
    }
    for (int i = 3; i < 6; ++i) {
        FixedTerm d;  // delay cascade x1 -> x4 -> x5 -> x6
        d.kind = FixedTermKind::scaled_difference;
        d.params = {{"denom", t_d}};
        d.index = i == 3 ? 0 : i - 1;
        d.index2 = i;
        m.fixed_terms[i].push_back(d);
    }
    m.state_names = {"x1", "x2", "x3", "x4", "x5", "x6"};
    m.state_units = {"uU/mL", "uU/mL", "mg", "uU/mL", "uU/mL", "uU/mL"};
    return m;
}

BinodeModel build_ssystem_binode(int n, std::uint64_t seed) {
    if (n < 1) throw ConfigError("build_ssystem_binode: n must be >= 1");
    BinodeModel m;
    m.n = n;
    NnpSpec s;
    s.input_mask.assign(n, true);
    s.hidden_layers = 5;
    s.hidden_width = 5;
    s.hidden_activation = Activation::elu;
    s.output_activation = OutputActivation::softplus;
    for (int i = 0; i < 2 * n; ++i)
        m.processes.push_back(init_nnp(s, Rng::derive(seed, 1 + i)));

    m.stoich = StoichiometricLayer::dense(n, 2 * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < 2 * n; ++j)
            if (j != 2 * i && j != 2 * i + 1) mask_out(m.stoich, i, j);
    for (int i = 0; i < n; ++i) {
        m.stoich.sign[m.stoich.at(i, 2 * i)] = SignConstraint::nonnegative;
        m.stoich.sign[m.stoich.at(i, 2 * i + 1)] = SignConstraint::nonpositive;
    }
    Rng rng(Rng::derive(seed, 0));
    init_stoich(m.stoich, rng);
    for (int i = 0; i < n; ++i) m.state_names.push_back("x" + std::to_string(i + 1));
    m.state_units.assign(n, "1");
    return m;
}

// ---------------------------------------------------------------------------
// Surfaces
// ---------------------------------------------------------------------------

void GridSpec::validate(int n) const {
    if (axes.empty() || axes.size() > 2)
        throw ConfigError("grid: needs 1 or 2 axes");
    if (lo.size() != axes.size() || hi.size() != axes.size() ||
        counts.size() != axes.size())
        throw ConfigError("grid: lo/hi/counts must match the number of axes");
    for (std::size_t a = 0; a < axes.size(); ++a) {
        if (axes[a] < 0 || axes[a] >= n)
            throw ConfigError("grid: axis index out of range");
        if (counts[a] < 1) throw ConfigError("grid: counts must be >= 1");
        if (counts[a] > 1 && !(lo[a] < hi[a]))
            throw ConfigError("grid: requires lo < hi for multi-point axes");
    }
    if (axes.size() == 2 && axes[0] == axes[1])
        throw ConfigError("grid: axes must be distinct");
}

ProcessSurface extract_surface(const BinodeModel& m, int process, int row,
                               const GridSpec& grid,
                               std::span<const double> fixed_values) {
    m.validate();
    if (process < 0 || process >= m.k())
        throw ConfigError("extract_surface: invalid process index");
    if (row < 0 || row >= m.n) throw ConfigError("extract_surface: invalid row index");
    grid.validate(m.n);
    if (static_cast<int>(fixed_values.size()) != m.n)
        throw std::invalid_argument("extract_surface: fixed_values must have length n");

    ProcessSurface s;
    s.process = process;
    s.row = row;
    s.weight = m.stoich.effective(row, process);
    s.axes = grid.axes;
    s.fixed_state.assign(fixed_values.begin(), fixed_values.end());
    for (std::size_t a = 0; a < grid.axes.size(); ++a) {
        std::vector<double> coords(grid.counts[a]);
        for (int i = 0; i < grid.counts[a]; ++i)
            coords[i] = grid.counts[a] == 1
                            ? grid.lo[a]
                            : grid.lo[a] + (grid.hi[a] - grid.lo[a]) * i /
                                               (grid.counts[a] - 1);
        s.grid.push_back(std::move(coords));
    }

    if (!m.trained_domain.empty()) {
        for (std::size_t a = 0; a < grid.axes.size(); ++a) {
            const auto& [dlo, dhi] = m.trained_domain[grid.axes[a]];
            if (grid.lo[a] < dlo - 1e-12 || grid.hi[a] > dhi + 1e-12) {
                std::fprintf(stderr,
                             "warning: surface grid axis %d spans [%g, %g], outside "
                             "the trained domain [%g, %g]\n",
                             grid.axes[a], grid.lo[a], grid.hi[a], dlo, dhi);
                break;
            }
        }
    }

    const Nnp& p = m.processes[process];
    std::vector<double> state(fixed_values.begin(), fixed_values.end());
    const std::size_t n0 = s.grid[0].size();
    const std::size_t n1 = s.grid.size() == 2 ? s.grid[1].size() : 1;
    s.values.reserve(n0 * n1);
    for (std::size_t i = 0; i < n0; ++i) {
        state[grid.axes[0]] = s.grid[0][i];
        for (std::size_t j = 0; j < n1; ++j) {
            if (s.grid.size() == 2) state[grid.axes[1]] = s.grid[1][j];
            s.values.push_back(s.weight * forward(p, state));
        }
    }
    return s;
}

}  // namespace binode
