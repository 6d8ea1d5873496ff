#pragma once

#include <cstdint>

namespace binode {

// splitmix64 generator. Used for every source of randomness in the library so
// that (seed -> parameters/samples) is reproducible across platforms and
// standard-library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform double in [0, 1)
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n); modulo bias is negligible for n << 2^64
    std::uint64_t uniform_int(std::uint64_t n) { return n == 0 ? 0 : next() % n; }

    // Deterministically derive an independent stream seed, e.g. per epoch or
    // per sweep task.
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
        Rng r(seed ^ (0x517cc1b727220a95ULL + stream * 0x2545f4914f6cdd1dULL));
        return r.next();
    }

private:
    std::uint64_t state_;
};

}  // namespace binode
