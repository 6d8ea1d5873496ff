#include "binode/autodiff.hpp"

namespace binode {

void Tape::backward(Var output) {
    if (output.tape() != this || output.index() < 0 ||
        output.index() >= static_cast<std::int32_t>(nodes_.size()))
        throw AutodiffError("backward output is not on this tape", output.index());

    nodes_[output.index()].adjoint = 1.0;
    for (std::int32_t i = output.index(); i >= 0; --i) {
        const Node& n = nodes_[i];
        const double a = n.adjoint;
        if (a == 0.0) continue;
        if (n.p0 >= 0) nodes_[n.p0].adjoint += a * n.d0;
        if (n.p1 >= 0) nodes_[n.p1].adjoint += a * n.d1;
    }
}

}  // namespace binode
