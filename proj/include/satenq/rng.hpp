#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace satenq {

std::uint64_t splitmix64(std::uint64_t x);

// Deterministic RNG with derivable sub-streams. One master seed per run;
// every purpose (init, exploration, env dynamics, batch sampling, ...) gets
// its own stream via stream(tag), so reordering one consumer never perturbs
// another. Distributions are hand-rolled on top of mt19937_64 raw output,
// which the standard specifies exactly, so sequences are bit-identical
// across platforms and standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    // Independent stream; same (seed, tag) always yields the same stream.
    Rng stream(std::uint64_t tag) const;
    Rng stream(std::uint64_t tag_a, std::uint64_t tag_b) const;

    std::uint64_t next_u64();

    double uniform();                      // [0, 1)
    double uniform(double lo, double hi);  // [lo, hi)
    int uniform_int(int n);                // {0, ..., n-1}, n >= 1
    double normal();                       // N(0, 1), Marsaglia polar

    std::uint64_t seed() const { return seed_; }

    // Engine state round-trip, used by checkpoints.
    std::string state_string() const;
    void restore_state(const std::string& s);

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace satenq
