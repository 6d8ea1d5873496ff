#include "binode/nnp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "binode/ratelaws.hpp"
#include "binode/rng.hpp"

namespace binode {

void NnpSpec::validate() const {
    if (input_mask.empty()) throw ConfigError("NnpSpec: input_mask is empty");
    if (input_dim() < 1) throw ConfigError("NnpSpec: input_mask selects no inputs");
    if (hidden_layers < 1) throw ConfigError("NnpSpec: hidden_layers must be >= 1");
    if (hidden_width < 1) throw ConfigError("NnpSpec: hidden_width must be >= 1");
    if (!monotone_constraint.empty() &&
        static_cast<int>(monotone_constraint.size()) != input_dim())
        throw ConfigError("NnpSpec: monotone_constraint length must equal input_dim");
    if (!input_scale.empty()) {
        if (static_cast<int>(input_scale.size()) != state_dim())
            throw ConfigError("NnpSpec: input_scale length must equal state dimension");
        for (double s : input_scale)
            if (!(s > 0.0) || !std::isfinite(s))
                throw ConfigError("NnpSpec: input_scale entries must be positive");
    }
}

namespace {

struct LayerDims {
    std::vector<int> in, out;  // per layer, hidden layers then output layer
};

LayerDims layer_dims(const NnpSpec& spec) {
    LayerDims d;
    int in = spec.input_dim();
    for (int l = 0; l < spec.hidden_layers; ++l) {
        d.in.push_back(in);
        d.out.push_back(spec.hidden_width);
        in = spec.hidden_width;
    }
    d.in.push_back(in);
    d.out.push_back(1);
    return d;
}

}  // namespace

Nnp init_nnp(const NnpSpec& spec, std::uint64_t seed) {
    spec.validate();
    Nnp n;
    n.spec = spec;
    n.seed = seed;
    Rng rng(seed);
    const LayerDims dims = layer_dims(spec);
    for (std::size_t l = 0; l < dims.in.size(); ++l) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(dims.in[l]));
        std::vector<double> w(static_cast<std::size_t>(dims.out[l]) * dims.in[l]);
        for (double& x : w) x = rng.uniform(-bound, bound);
        std::vector<double> b(dims.out[l]);
        for (double& x : b) x = rng.uniform(-bound, bound);
        n.params.weights.push_back(std::move(w));
        n.params.biases.push_back(std::move(b));
    }
    return n;
}

std::size_t nnp_parameter_count(const NnpSpec& spec) {
    const LayerDims dims = layer_dims(spec);
    std::size_t count = 0;
    for (std::size_t l = 0; l < dims.in.size(); ++l)
        count += static_cast<std::size_t>(dims.out[l]) * dims.in[l] + dims.out[l];
    return count;
}

std::vector<double> collect_nnp_parameters(const Nnp& n) {
    std::vector<double> flat;
    flat.reserve(nnp_parameter_count(n.spec));
    for (std::size_t l = 0; l < n.params.weights.size(); ++l) {
        flat.insert(flat.end(), n.params.weights[l].begin(), n.params.weights[l].end());
        flat.insert(flat.end(), n.params.biases[l].begin(), n.params.biases[l].end());
    }
    return flat;
}

void assign_nnp_parameters(Nnp& n, std::span<const double> flat) {
    if (flat.size() != nnp_parameter_count(n.spec))
        throw std::invalid_argument("assign_nnp_parameters: length mismatch");
    std::size_t at = 0;
    for (std::size_t l = 0; l < n.params.weights.size(); ++l) {
        for (double& w : n.params.weights[l]) w = flat[at++];
        for (double& b : n.params.biases[l]) b = flat[at++];
    }
}

double forward(const Nnp& n, std::span<const double> state) {
    const double v = nnp_forward<double>(n.spec, n.params, state);
    return n.output_scale != 1.0 ? v * n.output_scale : v;
}

NnpParams<Var> lift_nnp(Tape& tape, const Nnp& n, bool trainable) {
    NnpParams<Var> out;
    for (std::size_t l = 0; l < n.params.weights.size(); ++l) {
        std::vector<Var> w, b;
        w.reserve(n.params.weights[l].size());
        b.reserve(n.params.biases[l].size());
        for (double x : n.params.weights[l])
            w.push_back(trainable ? tape.parameter(x) : tape.constant(x));
        for (double x : n.params.biases[l])
            b.push_back(trainable ? tape.parameter(x) : tape.constant(x));
        out.weights.push_back(std::move(w));
        out.biases.push_back(std::move(b));
    }
    return out;
}

std::vector<double> nnp_input_gradient(const Nnp& n, std::span<const double> state) {
    Tape tape;
    std::vector<Var> x = tape.parameters(state);
    NnpParams<Var> p = lift_nnp(tape, n, /*trainable=*/false);
    Var v = nnp_forward<Var>(n.spec, p, x);
    if (n.output_scale != 1.0) v = v * n.output_scale;
    tape.backward(v);
    return tape.parameter_gradient();
}

// ---------------------------------------------------------------------------
// Dense full-batch training. Activations are stored per layer for all
// samples; the backward pass mirrors nnp_forward including the squared-weight
// reparameterization and the input scaling.
// ---------------------------------------------------------------------------

namespace {

struct BackpropWorkspace {
    // z[l]: pre-activations (N x out_l); a[l]: layer inputs (N x in_l)
    std::vector<std::vector<double>> a, z;
    std::vector<double> out;        // network output per sample
    std::vector<double> dout;       // dL/d(pre-activation) at the output node
    std::vector<double> da, da_prev;  // dL/d(layer input), ping-pong buffers
};

double activation_derivative(Activation act, double z) {
    if (act == Activation::elu) return z >= 0.0 ? 1.0 : std::exp(z);
    return z > 0.0 ? 1.0 : 0.0;
}

double output_derivative(OutputActivation act, double z) {
    switch (act) {
        case OutputActivation::softplus: return sigmoid(z);
        case OutputActivation::relu: return z > 0.0 ? 1.0 : 0.0;
        default: return 1.0;
    }
}

// Forward + backward over the full dataset; returns MSE and fills `grad`
// (same layout as collect_nnp_parameters, gradients w.r.t. the raw stored
// parameters).
double batch_loss_grad(const NnpSpec& spec, const std::vector<std::vector<double>>& w,
                       const std::vector<std::vector<double>>& b,
                       const std::vector<std::vector<double>>& inputs,
                       std::span<const double> targets, BackpropWorkspace& ws,
                       std::vector<double>& grad) {
    const int N = static_cast<int>(inputs.size());
    const int L = spec.hidden_layers;
    const int width = spec.hidden_width;
    const bool any_mono = spec.has_monotone();

    ws.a.assign(L + 1, {});
    ws.z.assign(L + 1, {});
    ws.out.assign(N, 0.0);

    // layer inputs for layer 0 (masked + scaled)
    const int d_in = spec.input_dim();
    ws.a[0].resize(static_cast<std::size_t>(N) * d_in);
    for (int i = 0; i < N; ++i) {
        int c = 0;
        for (int j = 0; j < spec.state_dim(); ++j) {
            if (!spec.input_mask[j]) continue;
            double u = inputs[i][j];
            if (!spec.input_scale.empty() && spec.input_scale[j] != 1.0)
                u /= spec.input_scale[j];
            ws.a[0][static_cast<std::size_t>(i) * d_in + c] = u;
            ++c;
        }
    }

    auto eff = [&](int layer, int r, int c, int nin) {
        const double raw = w[layer][static_cast<std::size_t>(r) * nin + c];
        const bool square = layer == 0 ? (!spec.monotone_constraint.empty() &&
                                          spec.monotone_constraint[c])
                                       : any_mono;
        return square ? raw * raw : raw;
    };

    // forward
    for (int l = 0; l < L; ++l) {
        const int nin = l == 0 ? d_in : width;
        ws.z[l].resize(static_cast<std::size_t>(N) * width);
        if (l + 1 <= L) ws.a[l + 1].resize(static_cast<std::size_t>(N) * width);
        for (int i = 0; i < N; ++i) {
            const double* ai = &ws.a[l][static_cast<std::size_t>(i) * nin];
            for (int r = 0; r < width; ++r) {
                double acc = b[l][r];
                for (int c = 0; c < nin; ++c) acc += eff(l, r, c, nin) * ai[c];
                ws.z[l][static_cast<std::size_t>(i) * width + r] = acc;
                const double av = spec.hidden_activation == Activation::elu
                                      ? (acc >= 0.0 ? acc : std::expm1(acc))
                                      : (acc > 0.0 ? acc : 0.0);
                ws.a[l + 1][static_cast<std::size_t>(i) * width + r] = av;
            }
        }
    }
    ws.z[L].resize(N);
    double loss = 0.0;
    for (int i = 0; i < N; ++i) {
        const double* ai = &ws.a[L][static_cast<std::size_t>(i) * width];
        double acc = b[L][0];
        for (int c = 0; c < width; ++c) acc += eff(L, 0, c, width) * ai[c];
        ws.z[L][i] = acc;
        double v;
        switch (spec.output_activation) {
            case OutputActivation::softplus: v = softplus(acc); break;
            case OutputActivation::relu: v = acc > 0.0 ? acc : 0.0; break;
            default: v = acc;
        }
        ws.out[i] = v;
        const double r = v - targets[i];
        loss += r * r;
    }
    loss /= N;

    // backward
    std::fill(grad.begin(), grad.end(), 0.0);
    // gradient offsets per layer (weights then biases)
    std::vector<std::size_t> w_off(L + 1), b_off(L + 1);
    {
        std::size_t at = 0;
        for (int l = 0; l <= L; ++l) {
            const int nin = l == 0 ? d_in : width;
            const int nout = l == L ? 1 : width;
            w_off[l] = at;
            at += static_cast<std::size_t>(nout) * nin;
            b_off[l] = at;
            at += nout;
        }
    }

    ws.dout.resize(N);
    for (int i = 0; i < N; ++i) {
        const double dv = 2.0 * (ws.out[i] - targets[i]) / N;
        ws.dout[i] = dv * output_derivative(spec.output_activation, ws.z[L][i]);
    }
    // output layer grads + propagate to a[L]
    {
        double* gw = &grad[w_off[L]];
        double* gb = &grad[b_off[L]];
        ws.da.assign(static_cast<std::size_t>(N) * width, 0.0);
        for (int i = 0; i < N; ++i) {
            const double d = ws.dout[i];
            if (d == 0.0) continue;
            const double* ai = &ws.a[L][static_cast<std::size_t>(i) * width];
            for (int c = 0; c < width; ++c) {
                const double raw = w[L][c];
                const double weff = any_mono ? raw * raw : raw;
                gw[c] += d * ai[c] * (any_mono ? 2.0 * raw : 1.0);
                ws.da[static_cast<std::size_t>(i) * width + c] += d * weff;
            }
            gb[0] += d;
        }
    }
    // hidden layers, from last to first
    for (int l = L - 1; l >= 0; --l) {
        const int nin = l == 0 ? d_in : width;
        const int nout = width;
        ws.da_prev.assign(static_cast<std::size_t>(N) * nin, 0.0);
        double* gwl = &grad[w_off[l]];
        double* gbl = &grad[b_off[l]];
        for (int i = 0; i < N; ++i) {
            const double* zi = &ws.z[l][static_cast<std::size_t>(i) * nout];
            const double* ai = &ws.a[l][static_cast<std::size_t>(i) * nin];
            const double* dai = &ws.da[static_cast<std::size_t>(i) * nout];
            for (int r = 0; r < nout; ++r) {
                const double dz =
                    dai[r] * activation_derivative(spec.hidden_activation, zi[r]);
                if (dz == 0.0) continue;
                gbl[r] += dz;
                for (int c = 0; c < nin; ++c) {
                    const double raw = w[l][static_cast<std::size_t>(r) * nin + c];
                    const bool square =
                        l == 0 ? (!spec.monotone_constraint.empty() &&
                                  spec.monotone_constraint[c])
                               : any_mono;
                    const double weff = square ? raw * raw : raw;
                    gwl[static_cast<std::size_t>(r) * nin + c] +=
                        dz * ai[c] * (square ? 2.0 * raw : 1.0);
                    ws.da_prev[static_cast<std::size_t>(i) * nin + c] += dz * weff;
                }
            }
        }
        std::swap(ws.da, ws.da_prev);
    }
    return loss;
}

}  // namespace

FitResult fit_surface(const Nnp& start, const Dataset& data, const TrainConfig& cfg) {
    if (data.size() == 0) throw ConfigError("fit_surface: empty dataset");
    for (const auto& x : data.inputs)
        if (static_cast<int>(x.size()) != start.spec.state_dim())
            throw std::invalid_argument("fit_surface: sample dimension mismatch");

    FitResult res;
    res.model = start;
    std::vector<double> flat = collect_nnp_parameters(start);
    std::vector<double> grad(flat.size());
    std::vector<double> m(flat.size(), 0.0), v(flat.size(), 0.0);
    std::vector<double> best = flat;
    double best_loss = std::numeric_limits<double>::infinity();
    int best_iter = -1;
    BackpropWorkspace ws;
    res.history.reserve(cfg.max_epochs);

    Nnp work = start;
    for (int it = 0; it < cfg.max_epochs; ++it) {
        const double loss = batch_loss_grad(work.spec, work.params.weights,
                                            work.params.biases, data.inputs,
                                            data.targets, ws, grad);
        if (!std::isfinite(loss))
            throw DivergenceError("fit_surface: non-finite loss at iteration " +
                                      std::to_string(it),
                                  it);
        res.history.push_back(loss);
        if (loss < best_loss) {
            best_loss = loss;
            best_iter = it;
            best = flat;
        }
        // Adam
        const double t = static_cast<double>(it + 1);
        const double c1 = 1.0 - std::pow(cfg.beta1, t);
        const double c2 = 1.0 - std::pow(cfg.beta2, t);
        for (std::size_t i = 0; i < flat.size(); ++i) {
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * grad[i];
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
            flat[i] -= cfg.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg.epsilon);
        }
        assign_nnp_parameters(work, flat);
    }
    // final evaluation so the last iterate can win
    const double final_loss = batch_loss_grad(work.spec, work.params.weights,
                                              work.params.biases, data.inputs,
                                              data.targets, ws, grad);
    if (std::isfinite(final_loss) && final_loss < best_loss) {
        best_loss = final_loss;
        best_iter = cfg.max_epochs;
        best = flat;
    }
    assign_nnp_parameters(res.model, best);
    res.best_loss = best_loss;
    res.best_iteration = best_iter;
    return res;
}

}  // namespace binode
