#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace binode {

// Invalid configuration, malformed input file, or violated call contract.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical blow-up during integration or optimization.
// `step` is the integration step or optimizer iteration that produced the
// first non-finite value; `last_state` is the last finite state, if any.
struct DivergenceError : std::runtime_error {
    DivergenceError(const std::string& msg, long step_index,
                    std::vector<double> last = {})
        : std::runtime_error(msg), step(step_index), last_state(std::move(last)) {}
    long step;
    std::vector<double> last_state;
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace binode
