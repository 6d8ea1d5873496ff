#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "binode/errors.hpp"

namespace binode {

// Closed-form process representations used as approximation targets and as
// exact surfaces for comparison against learned processes.
enum class RateLawId : std::uint8_t {
    michaelis_menten,
    random_bibi,
    power_law,
    lin_log,
    convenience,
    gene_transcription,
    mass_action,
    competitive_product_inhibition,
    haldane,
    hill,
    reversible_hill,
    saturable_cooperative,
    monod,
    holling1,
    holling2,
};

const char* to_string(RateLawId id);
RateLawId rate_law_id_from_string(const std::string& s);

struct RateLaw {
    RateLawId id = RateLawId::michaelis_menten;
    // Parameter names follow the conventional symbols; indexed families use
    // suffixes ("g_1", "eps_2", ...).
    std::map<std::string, double> params;
    int arity = 1;
};

// Validates presence/finiteness of all required parameters for `id`.
RateLaw make_rate_law(RateLawId id, std::map<std::string, double> params, int arity);

double eval(const RateLaw& law, std::span<const double> inputs);

// alpha * prod_i x_i^{g_i}
double power_law(double alpha, std::span<const double> orders,
                 std::span<const double> inputs);

struct DomainBox {
    std::vector<double> lo, hi;
    int dim() const { return static_cast<int>(lo.size()); }
    void validate() const;
};

struct Dataset {
    std::vector<std::vector<double>> inputs;
    std::vector<double> targets;
    std::size_t size() const { return targets.size(); }
};

// Deterministic uniform samples over `box` with targets from eval(law, .).
Dataset sample_dataset(const RateLaw& law, const DomainBox& box, int count,
                       std::uint64_t seed);

}  // namespace binode
