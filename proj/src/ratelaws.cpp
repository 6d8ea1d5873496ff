#include "binode/ratelaws.hpp"

#include <cmath>

#include "binode/rng.hpp"

namespace binode {

namespace {

double get(const RateLaw& law, const std::string& name) {
    auto it = law.params.find(name);
    if (it == law.params.end())
        throw ConfigError(std::string("rate law '") + to_string(law.id) +
                          "' is missing parameter '" + name + "'");
    return it->second;
}

double get_indexed(const RateLaw& law, const std::string& prefix, int i) {
    return get(law, prefix + "_" + std::to_string(i + 1));
}

int get_count(const RateLaw& law, const std::string& name) {
    const double v = get(law, name);
    const int n = static_cast<int>(std::llround(v));
    if (n < 0 || std::abs(v - n) > 1e-12)
        throw ConfigError("rate law count parameter '" + name +
                          "' must be a nonnegative integer");
    return n;
}

void check_input(const RateLaw& law, std::span<const double> x) {
    if (static_cast<int>(x.size()) != law.arity)
        throw std::invalid_argument(std::string("rate law '") + to_string(law.id) +
                                    "' expects " + std::to_string(law.arity) +
                                    " inputs, got " + std::to_string(x.size()));
}

// sum_{m=0}^{n} t^m
double geometric_sum(double t, int n) {
    double acc = 1.0, p = 1.0;
    for (int m = 1; m <= n; ++m) {
        p *= t;
        acc += p;
    }
    return acc;
}

}  // namespace

const char* to_string(RateLawId id) {
    switch (id) {
        case RateLawId::michaelis_menten: return "michaelis_menten";
        case RateLawId::random_bibi: return "random_bibi";
        case RateLawId::power_law: return "power_law";
        case RateLawId::lin_log: return "lin_log";
        case RateLawId::convenience: return "convenience";
        case RateLawId::gene_transcription: return "gene_transcription";
        case RateLawId::mass_action: return "mass_action";
        case RateLawId::competitive_product_inhibition:
            return "competitive_product_inhibition";
        case RateLawId::haldane: return "haldane";
        case RateLawId::hill: return "hill";
        case RateLawId::reversible_hill: return "reversible_hill";
        case RateLawId::saturable_cooperative: return "saturable_cooperative";
        case RateLawId::monod: return "monod";
        case RateLawId::holling1: return "holling1";
        case RateLawId::holling2: return "holling2";
    }
    return "?";
}

RateLawId rate_law_id_from_string(const std::string& s) {
    for (int i = 0; i <= static_cast<int>(RateLawId::holling2); ++i) {
        const RateLawId id = static_cast<RateLawId>(i);
        if (s == to_string(id)) return id;
    }
    throw ConfigError("unknown rate law id: '" + s + "'");
}

double power_law(double alpha, std::span<const double> orders,
                 std::span<const double> inputs) {
    if (orders.size() != inputs.size())
        throw std::invalid_argument("power_law: orders/inputs size mismatch");
    double acc = alpha;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        const double g = orders[i];
        const double x = inputs[i];
        if (g == 0.0) continue;  // x^0 == 1, including at x == 0
        if (x == 0.0 && g < 0.0)
            throw ConfigError("power_law: zero raised to negative power");
        if (x < 0.0 && g != std::floor(g))
            throw ConfigError("power_law: negative base with non-integer order");
        acc *= std::pow(x, g);
    }
    return acc;
}

double eval(const RateLaw& law, std::span<const double> x) {
    check_input(law, x);
    switch (law.id) {
        case RateLawId::michaelis_menten: {
            const double vmax = get(law, "V_max"), km = get(law, "K_m");
            return vmax * x[0] / (x[0] + km);
        }
        case RateLawId::random_bibi: {
            // inputs: A, B, P, Q
            const double vmax = get(law, "V_max");
            const double a = x[0] / get(law, "K_i_A");
            const double b_m = x[1] / get(law, "K_m_B");
            const double b_i = x[1] / get(law, "K_i_B");
            const double p_i = x[2] / get(law, "K_i_P");
            const double p_m = x[2] / get(law, "K_m_P");
            const double q_i = x[3] / get(law, "K_i_Q");
            const double den = 1.0 + a + b_i + p_i + q_i + a * b_m + p_m * q_i;
            return vmax * a * b_m / den;
        }
        case RateLawId::power_law:
        case RateLawId::mass_action: {
            const char* prefix = law.id == RateLawId::power_law ? "g" : "n";
            const double alpha = get(law, "alpha");
            std::vector<double> orders(law.arity);
            for (int i = 0; i < law.arity; ++i) orders[i] = get_indexed(law, prefix, i);
            return power_law(alpha, orders, x);
        }
        case RateLawId::lin_log: {
            // returns v / J0 given e/e0, elasticities and reference levels
            const double e_ratio = get(law, "e_ratio");
            double acc = 1.0;
            for (int i = 0; i < law.arity; ++i) {
                const double x0 = get_indexed(law, "x0", i);
                if (x[i] <= 0.0 || x0 <= 0.0)
                    throw ConfigError("lin_log: metabolite levels must be positive");
                acc += get_indexed(law, "eps", i) * std::log(x[i] / x0);
            }
            return e_ratio * acc;
        }
        case RateLawId::convenience: {
            // inputs: substrates, products, activators, inhibitors (in order)
            const int ns = get_count(law, "n_substrates");
            const int np = get_count(law, "n_products");
            const int na = get_count(law, "n_activators");
            const int ni = get_count(law, "n_inhibitors");
            if (ns + np + na + ni != law.arity)
                throw ConfigError("convenience: arity does not match category counts");
            const double vmax = get(law, "V_max");
            double num = vmax, den_s = 1.0, den_p = 1.0, reg = 1.0;
            int at = 0;
            for (int i = 0; i < ns; ++i, ++at) {
                const double st = x[at] / get_indexed(law, "K_m_S", i);
                const int a = static_cast<int>(std::llround(get_indexed(law, "alpha", i)));
                num *= std::pow(st, a);
                den_s *= geometric_sum(st, a);
            }
            for (int j = 0; j < np; ++j, ++at) {
                const double pt = x[at] / get_indexed(law, "K_m_P", j);
                const int bq = static_cast<int>(std::llround(get_indexed(law, "beta", j)));
                den_p *= geometric_sum(pt, bq);
            }
            for (int l = 0; l < na; ++l, ++at) {
                const double k = get_indexed(law, "k_A", l);
                reg *= x[at] / (k + x[at]);
            }
            for (int n = 0; n < ni; ++n, ++at) {
                const double k = get_indexed(law, "k_I", n);
                reg *= k / (k + x[at]);
            }
            return num / (den_s + den_p) * reg;
        }
        case RateLawId::gene_transcription: {
            // inputs: activator concentrations, then repressor concentrations
            const int na = get_count(law, "n_activators");
            const int nr = get_count(law, "n_repressors");
            if (na + nr != law.arity)
                throw ConfigError("gene_transcription: arity does not match counts");
            const double kt = get(law, "k_t"), copies = get(law, "n");
            double num = 1.0, den = 1.0;
            for (int j = 0; j < na; ++j) num += get_indexed(law, "k_a", j) * x[j];
            for (int l = 0; l < nr; ++l) den += get_indexed(law, "k_r", l) * x[na + l];
            return kt * copies * num / den;
        }
        case RateLawId::competitive_product_inhibition: {
            const double vmax = get(law, "V_max"), km = get(law, "K_m");
            const double kmp = get(law, "K_m_P");
            return vmax * x[0] / (x[0] + km * (1.0 + x[1] / kmp));
        }
        case RateLawId::haldane: {
            const double vmax = get(law, "V_max"), km = get(law, "K_m");
            const double ki = get(law, "K_i");
            return vmax * x[0] / (x[0] * (1.0 + x[0] / ki) + km);
        }
        case RateLawId::hill: {
            const double vmax = get(law, "V_max"), km = get(law, "K_m");
            const double h = get(law, "h");
            const double sh = std::pow(x[0], h);
            return vmax * sh / (sh + std::pow(km, h));
        }
        case RateLawId::reversible_hill: {
            const double vmax = get(law, "V_max"), h = get(law, "h");
            const double s = x[0] / get(law, "K_m_S");
            const double p = x[1] / get(law, "K_m_P");
            return vmax * s * std::pow(s + p, h - 1.0) / (1.0 + std::pow(s + p, h));
        }
        case RateLawId::saturable_cooperative: {
            double acc = get(law, "V");
            for (int i = 0; i < law.arity; ++i) {
                const double n = get_indexed(law, "n", i);
                const double k = get_indexed(law, "K", i);
                const double xn = std::pow(x[i], n);
                acc *= xn / (k + xn);
            }
            return acc;
        }
        case RateLawId::monod: {
            // inputs: substrate S, biomass X
            const double mu = get(law, "mu_max"), km = get(law, "K_m");
            return mu * x[0] / (x[0] + km) * x[1];
        }
        case RateLawId::holling1: {
            return get(law, "a") * get(law, "T_s") * x[0] * x[1];
        }
        case RateLawId::holling2: {
            const double a = get(law, "a"), tt = get(law, "T_t"), b = get(law, "b");
            return a * tt * x[0] / (1.0 + a * b * x[0]) * x[1];
        }
    }
    throw ConfigError("unhandled rate law id");
}

RateLaw make_rate_law(RateLawId id, std::map<std::string, double> params, int arity) {
    RateLaw law{id, std::move(params), arity};
    if (arity < 1) throw ConfigError("rate law arity must be >= 1");
    for (const auto& [k, v] : law.params)
        if (!std::isfinite(v))
            throw ConfigError("rate law parameter '" + k + "' is not finite");
    // probe at an interior point to surface missing parameters early
    std::vector<double> probe(arity, 0.5);
    (void)eval(law, probe);
    return law;
}

void DomainBox::validate() const {
    if (lo.empty() || lo.size() != hi.size())
        throw ConfigError("domain box: lo/hi must be nonempty and equally sized");
    for (std::size_t i = 0; i < lo.size(); ++i)
        if (!(lo[i] <= hi[i]))
            throw ConfigError("domain box: requires lo <= hi in every coordinate");
}

Dataset sample_dataset(const RateLaw& law, const DomainBox& box, int count,
                       std::uint64_t seed) {
    box.validate();
    if (box.dim() != law.arity)
        throw ConfigError("sample_dataset: box dimension does not match law arity");
    if (count < 1) throw ConfigError("sample_dataset: count must be >= 1");
    Dataset d;
    d.inputs.reserve(count);
    d.targets.reserve(count);
    Rng rng(seed);
    for (int i = 0; i < count; ++i) {
        std::vector<double> x(law.arity);
        for (int j = 0; j < law.arity; ++j) x[j] = rng.uniform(box.lo[j], box.hi[j]);
        d.targets.push_back(eval(law, x));
        d.inputs.push_back(std::move(x));
    }
    return d;
}

}  // namespace binode
