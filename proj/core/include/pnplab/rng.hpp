#pragma once

#include <cstdint>
#include <span>

namespace pnp {

/**
 * Counter-based random stream.
 *
 * Draw number k of a stream is a pure function of (seed, k): the k-th value
 * is a SplitMix64 hash of the seed-derived key advanced k times. Independent
 * sub-streams are derived with split(), so a sampler can address the noise
 * of (step i, iteration k) directly instead of threading global state.
 */
class RngStream {
public:
    explicit RngStream(std::uint64_t seed, std::uint64_t counter = 0);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t counter() const { return counter_; }

    std::uint64_t next_u64();
    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [0, n).
    std::uint64_t index(std::uint64_t n);
    /// Standard normal via Box-Muller; consumes two counters per draw.
    double normal();
    void fill_normal(std::span<double> out);

    /// Stream keyed by (this seed, tag); does not advance this stream.
    RngStream split(std::uint64_t tag) const;

private:
    std::uint64_t seed_;
    std::uint64_t key_;
    std::uint64_t counter_;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

}  // namespace pnp
