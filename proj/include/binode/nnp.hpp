#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "binode/autodiff.hpp"
#include "binode/errors.hpp"
#include "binode/train_config.hpp"

namespace binode {

enum class Activation : std::uint8_t { elu, relu };
enum class OutputActivation : std::uint8_t { softplus, relu, identity };

// Architecture of one neural network process: a fully connected feedforward
// network mapping the masked subset of the system state to a single scalar
// rate.
struct NnpSpec {
    // Selects which state variables feed the network; length = full state
    // dimension.
    std::vector<bool> input_mask;
    int hidden_layers = 1;
    int hidden_width = 1;
    Activation hidden_activation = Activation::elu;
    OutputActivation output_activation = OutputActivation::softplus;
    // Per network input (length = input_dim, or empty): true entries make
    // the output nondecreasing in that input by squaring the stored weights
    // of the corresponding first-layer column and of every later layer.
    std::vector<bool> monotone_constraint;
    // Per state variable (length = full state dimension, or empty): inputs
    // are divided by these scales before the first layer. Used when raw
    // state magnitudes span several orders of magnitude.
    std::vector<double> input_scale;

    int state_dim() const { return static_cast<int>(input_mask.size()); }
    int input_dim() const {
        int d = 0;
        for (bool b : input_mask) d += b ? 1 : 0;
        return d;
    }
    bool has_monotone() const {
        for (bool b : monotone_constraint)
            if (b) return true;
        return false;
    }
    void validate() const;
};

template <class S>
struct NnpParams {
    std::vector<std::vector<S>> weights;  // per layer, row-major (out x in)
    std::vector<std::vector<S>> biases;   // per layer
};

struct Nnp {
    NnpSpec spec;
    NnpParams<double> params;
    // Auxiliary output multiplier; a process output and its stoichiometric
    // column can be rescaled jointly without changing the vector field.
    double output_scale = 1.0;
    std::uint64_t seed = 0;
};

// Draws every weight and bias of a layer with fan-in d i.i.d. from
// U(-d^{-1/2}, d^{-1/2}), deterministically per (spec, seed).
Nnp init_nnp(const NnpSpec& spec, std::uint64_t seed);

// Flat parameter vector in canonical order: per layer, row-major weights
// then biases.
std::vector<double> collect_nnp_parameters(const Nnp& n);
void assign_nnp_parameters(Nnp& n, std::span<const double> flat);
std::size_t nnp_parameter_count(const NnpSpec& spec);

namespace detail {
template <class S>
inline S apply_activation(Activation a, S z) {
    return a == Activation::elu ? elu(z) : relu(z);
}
template <class S>
inline S apply_output_activation(OutputActivation a, S z) {
    switch (a) {
        case OutputActivation::softplus: return softplus(z);
        case OutputActivation::relu: return relu(z);
        default: return z;
    }
}
}  // namespace detail

// Raw network output (excluding output_scale). Instantiated for both double
// and Var so the tape-recorded pass runs the exact same arithmetic as the
// plain evaluation.
template <class S>
S nnp_forward(const NnpSpec& spec, const NnpParams<S>& p, std::span<const S> state) {
    if (static_cast<int>(state.size()) != spec.state_dim())
        throw std::invalid_argument("nnp_forward: state has dimension " +
                                    std::to_string(state.size()) + ", expected " +
                                    std::to_string(spec.state_dim()));

    std::vector<S> in;
    in.reserve(spec.input_dim());
    for (int j = 0; j < spec.state_dim(); ++j) {
        if (!spec.input_mask[j]) continue;
        if (!spec.input_scale.empty() && spec.input_scale[j] != 1.0)
            in.push_back(state[j] / spec.input_scale[j]);
        else
            in.push_back(state[j]);
    }

    const bool any_mono = spec.has_monotone();
    std::vector<S> cur = std::move(in);
    std::vector<S> next;
    for (int l = 0; l < spec.hidden_layers; ++l) {
        const auto& W = p.weights[l];
        const auto& b = p.biases[l];
        const int nin = static_cast<int>(cur.size());
        next.clear();
        next.reserve(spec.hidden_width);
        for (int r = 0; r < spec.hidden_width; ++r) {
            S z = b[r];
            for (int c = 0; c < nin; ++c) {
                S w = W[r * nin + c];
                const bool square =
                    l == 0 ? (!spec.monotone_constraint.empty() && spec.monotone_constraint[c])
                           : any_mono;
                if (square) w = w * w;
                z = z + w * cur[c];
            }
            next.push_back(detail::apply_activation(spec.hidden_activation, z));
        }
        std::swap(cur, next);
    }

    const auto& W = p.weights[spec.hidden_layers];
    S z = p.biases[spec.hidden_layers][0];
    for (int c = 0; c < spec.hidden_width; ++c) {
        S w = W[c];
        if (any_mono) w = w * w;
        z = z + w * cur[c];
    }
    return detail::apply_output_activation(spec.output_activation, z);
}

// Process rate v(X) including the output scale.
double forward(const Nnp& n, std::span<const double> state);

// Lifts all parameters onto the tape (as trainable parameters when
// `trainable`, else as constants), in the canonical flat order.
NnpParams<Var> lift_nnp(Tape& tape, const Nnp& n, bool trainable = true);

// d(forward)/d(state_j) for every state variable; exactly 0 at masked-out
// indices. Builds a private tape.
std::vector<double> nnp_input_gradient(const Nnp& n, std::span<const double> state);

struct Dataset;  // ratelaws.hpp

struct FitResult {
    Nnp model;
    double best_loss = 0.0;
    int best_iteration = -1;
    std::vector<double> history;  // full-batch MSE per iteration
};

// Full-batch Adam on mean squared error. Uses a dense layer-wise backward
// pass (cross-checked against the tape in the test suite) so large sample
// sets stay cheap. Returns the best-iterate parameters.
// Throws DivergenceError when the loss becomes non-finite.
FitResult fit_surface(const Nnp& start, const Dataset& data, const TrainConfig& cfg);

}  // namespace binode
