#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace binode {

// Error raised while building or evaluating a computation graph. `node_id`
// is the tape index of the offending node (-1 when not applicable).
class AutodiffError : public std::runtime_error {
public:
    explicit AutodiffError(const std::string& msg, long node = -1)
        : std::runtime_error(msg), node_id(node) {}
    long node_id;
};

enum class Op : std::uint8_t {
    leaf,
    add,
    sub,
    mul,
    div,
    neg,
    exp,
    ln,
    pow,
    relu,
    elu,
    softplus,
};

class Tape;

// Handle to one node on a Tape. Cheap to copy; valid while the tape lives
// and has not been cleared.
class Var {
public:
    Var() = default;
    Var(Tape* tape, std::int32_t index) : tape_(tape), idx_(index) {}

    double value() const;
    double adjoint() const;
    Tape* tape() const { return tape_; }
    std::int32_t index() const { return idx_; }

private:
    Tape* tape_ = nullptr;
    std::int32_t idx_ = -1;
};

// Reverse-mode tape over scalar operations. Nodes are appended in evaluation
// order, which is a topological order of the DAG by construction, so the
// backward pass is a single reverse sweep that visits each node exactly once.
// A tape is rebuilt per forward pass (define-by-run) and is single-threaded;
// distinct tapes may be used concurrently.
class Tape {
public:
    struct Node {
        double value;
        double adjoint;
        double d0, d1;        // local partials w.r.t. parents
        std::int32_t p0, p1;  // parent indices; -1 when unused
        Op op;
    };

    // Leaf nodes. `parameter` additionally registers the node in the
    // free-parameter index set, in call order.
    Var constant(double value) {
        check_finite(value);
        return push(Op::leaf, value, -1, 0.0, -1, 0.0);
    }
    Var parameter(double value) {
        check_finite(value);
        Var v = push(Op::leaf, value, -1, 0.0, -1, 0.0);
        params_.push_back(v.index());
        return v;
    }
    std::vector<Var> parameters(std::span<const double> values) {
        std::vector<Var> out;
        out.reserve(values.size());
        for (double v : values) out.push_back(parameter(v));
        return out;
    }
    std::vector<Var> constants(std::span<const double> values) {
        std::vector<Var> out;
        out.reserve(values.size());
        for (double v : values) out.push_back(constant(v));
        return out;
    }

    Var push(Op op, double value, std::int32_t p0, double d0, std::int32_t p1,
             double d1) {
        nodes_.push_back(Node{value, 0.0, d0, d1, p0, p1, op});
        return Var(this, static_cast<std::int32_t>(nodes_.size() - 1));
    }

    void reset_adjoints() {
        for (Node& n : nodes_) n.adjoint = 0.0;
    }

    // Seeds the output adjoint with 1 and accumulates adjoints into every
    // ancestor. Leaf values are untouched. Call reset_adjoints() before
    // re-running on the same tape.
    void backward(Var output);

    // Adjoints of the parameter leaves, in registration order.
    std::vector<double> parameter_gradient() const {
        std::vector<double> g;
        g.reserve(params_.size());
        for (std::int32_t i : params_) g.push_back(nodes_[i].adjoint);
        return g;
    }
    const std::vector<std::int32_t>& parameter_indices() const { return params_; }

    std::size_t size() const { return nodes_.size(); }
    const Node& node(std::int32_t i) const { return nodes_[i]; }
    double value(std::int32_t i) const { return nodes_[i].value; }
    double adjoint(std::int32_t i) const { return nodes_[i].adjoint; }

    void clear() {
        nodes_.clear();
        params_.clear();
    }
    void reserve(std::size_t n) { nodes_.reserve(n); }

private:
    static void check_finite(double v) {
        if (!std::isfinite(v)) throw AutodiffError("non-finite value lifted onto tape");
    }

    std::vector<Node> nodes_;
    std::vector<std::int32_t> params_;
};

inline double Var::value() const { return tape_->value(idx_); }
inline double Var::adjoint() const { return tape_->adjoint(idx_); }

namespace detail {
inline Tape* same_tape(Var a, Var b) {
    if (a.tape() != b.tape())
        throw AutodiffError("operands live on different tapes", a.index());
    return a.tape();
}
}  // namespace detail

// --- scalar helpers shared by the double and Var code paths ----------------

inline double relu(double x) { return x > 0.0 ? x : 0.0; }

// ELU with alpha = 1
inline double elu(double x) { return x >= 0.0 ? x : std::expm1(x); }

// softplus(x) = ln(1 + e^x), evaluated in overflow-safe form
inline double softplus(double x) {
    if (x > 30.0) return x;
    if (x < -30.0) return std::exp(x);
    return std::log1p(std::exp(x));
}

inline double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

inline double value_of(double x) { return x; }
inline double value_of(Var x) { return x.value(); }

// --- Var arithmetic ---------------------------------------------------------
// Mixed Var/double operations fold the constant into the node's local
// partial instead of emitting a leaf, which keeps tapes small.

inline Var operator+(Var a, Var b) {
    Tape* t = detail::same_tape(a, b);
    return t->push(Op::add, a.value() + b.value(), a.index(), 1.0, b.index(), 1.0);
}
inline Var operator+(Var a, double c) {
    return a.tape()->push(Op::add, a.value() + c, a.index(), 1.0, -1, 0.0);
}
inline Var operator+(double c, Var a) { return a + c; }

inline Var operator-(Var a, Var b) {
    Tape* t = detail::same_tape(a, b);
    return t->push(Op::sub, a.value() - b.value(), a.index(), 1.0, b.index(), -1.0);
}
inline Var operator-(Var a, double c) {
    return a.tape()->push(Op::sub, a.value() - c, a.index(), 1.0, -1, 0.0);
}
inline Var operator-(double c, Var a) {
    return a.tape()->push(Op::sub, c - a.value(), a.index(), -1.0, -1, 0.0);
}
inline Var operator-(Var a) {
    return a.tape()->push(Op::neg, -a.value(), a.index(), -1.0, -1, 0.0);
}

inline Var operator*(Var a, Var b) {
    Tape* t = detail::same_tape(a, b);
    return t->push(Op::mul, a.value() * b.value(), a.index(), b.value(), b.index(),
                   a.value());
}
inline Var operator*(Var a, double c) {
    return a.tape()->push(Op::mul, a.value() * c, a.index(), c, -1, 0.0);
}
inline Var operator*(double c, Var a) { return a * c; }

inline Var operator/(Var a, Var b) {
    Tape* t = detail::same_tape(a, b);
    const double bv = b.value();
    if (bv == 0.0) throw AutodiffError("division by zero", b.index());
    return t->push(Op::div, a.value() / bv, a.index(), 1.0 / bv, b.index(),
                   -a.value() / (bv * bv));
}
inline Var operator/(Var a, double c) {
    if (c == 0.0) throw AutodiffError("division by zero", a.index());
    return a.tape()->push(Op::div, a.value() / c, a.index(), 1.0 / c, -1, 0.0);
}
inline Var operator/(double c, Var b) {
    const double bv = b.value();
    if (bv == 0.0) throw AutodiffError("division by zero", b.index());
    return b.tape()->push(Op::div, c / bv, b.index(), -c / (bv * bv), -1, 0.0);
}

inline Var exp(Var a) {
    const double e = std::exp(a.value());
    return a.tape()->push(Op::exp, e, a.index(), e, -1, 0.0);
}

inline Var ln(Var a) {
    const double av = a.value();
    if (av <= 0.0) throw AutodiffError("ln of non-positive value", a.index());
    return a.tape()->push(Op::ln, std::log(av), a.index(), 1.0 / av, -1, 0.0);
}

inline Var pow(Var a, double e) {
    const double av = a.value();
    if (av < 0.0)
        throw AutodiffError("pow of negative base", a.index());
    if (av == 0.0) {
        if (e < 1.0) throw AutodiffError("pow at zero base with exponent < 1", a.index());
        return a.tape()->push(Op::pow, 0.0, a.index(), e == 1.0 ? 1.0 : 0.0, -1, 0.0);
    }
    const double v = std::pow(av, e);
    return a.tape()->push(Op::pow, v, a.index(), e * v / av, -1, 0.0);
}

inline Var pow(Var a, Var b) {
    Tape* t = detail::same_tape(a, b);
    const double av = a.value();
    if (av <= 0.0)
        throw AutodiffError("pow with variable exponent requires positive base",
                            a.index());
    const double v = std::pow(av, b.value());
    return t->push(Op::pow, v, a.index(), b.value() * v / av, b.index(),
                   v * std::log(av));
}

inline Var relu(Var a) {
    const double av = a.value();
    // subgradient at 0 is 0
    return a.tape()->push(Op::relu, av > 0.0 ? av : 0.0, a.index(),
                          av > 0.0 ? 1.0 : 0.0, -1, 0.0);
}

inline Var elu(Var a) {
    const double av = a.value();
    if (av >= 0.0) return a.tape()->push(Op::elu, av, a.index(), 1.0, -1, 0.0);
    return a.tape()->push(Op::elu, std::expm1(av), a.index(), std::exp(av), -1, 0.0);
}

inline Var softplus(Var a) {
    return a.tape()->push(Op::softplus, softplus(a.value()), a.index(),
                          sigmoid(a.value()), -1, 0.0);
}

}  // namespace binode
