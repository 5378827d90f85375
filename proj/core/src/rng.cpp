#include "pnplab/rng.hpp"

#include <cmath>
#include <numbers>

namespace pnp {
namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kSplitSalt = 0xD1B54A32D192ED03ULL;

}  // namespace

std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBULL;
    x ^= x >> 31;
    return x;
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t counter)
    : seed_(seed), key_(mix64(seed + kGolden)), counter_(counter) {}

std::uint64_t RngStream::next_u64() {
    ++counter_;
    return mix64(key_ + counter_ * kGolden);
}

double RngStream::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::uint64_t RngStream::index(std::uint64_t n) {
    if (n == 0) return 0;
    // Rejection sampling keeps the result exactly uniform.
    const std::uint64_t limit = (~std::uint64_t{0} - n + 1) % n;
    for (;;) {
        const std::uint64_t r = next_u64();
        if (r >= limit) return r % n;
    }
}

double RngStream::normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void RngStream::fill_normal(std::span<double> out) {
    for (double& v : out) v = normal();
}

RngStream RngStream::split(std::uint64_t tag) const {
    return RngStream(mix64(key_ ^ mix64(tag * kSplitSalt + kGolden)));
}

}  // namespace pnp
