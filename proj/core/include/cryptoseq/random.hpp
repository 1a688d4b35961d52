#pragma once

#include <array>
#include <cstdint>

namespace cryptoseq {

/// Deterministic random stream: xoshiro256++ seeded through splitmix64.
/// The algorithm is pinned (not the platform default engine) so a seed
/// reproduces the same sequence bit-exactly on every machine. Single-owner:
/// never share one stream across concurrent tasks, fork() instead.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed);

    std::uint64_t next_u64();

    /// Uniform draw in [0, 1) with 53 random mantissa bits.
    double next_unit();

    /// Uniform draw in [lo, hi); throws ValueError unless lo < hi.
    double next_uniform(double lo, double hi);

    /// Standard normal via Box-Muller; consumes exactly two u64 draws.
    double next_normal();

    /// Independent child stream, deterministic function of this stream's state.
    RandomStream fork();

private:
    std::array<std::uint64_t, 4> state_;
};

} // namespace cryptoseq
