#include "cryptoseq/random.hpp"

#include <cmath>
#include <numbers>

#include "cryptoseq/errors.hpp"

namespace cryptoseq {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

} // namespace

RandomStream::RandomStream(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& word : state_) word = splitmix64(s);
}

std::uint64_t RandomStream::next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double RandomStream::next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RandomStream::next_uniform(double lo, double hi) {
    if (!(lo < hi)) {
        throw ValueError("next_uniform: requires lo < hi, got [" + std::to_string(lo) + ", " +
                         std::to_string(hi) + ")");
    }
    return lo + next_unit() * (hi - lo);
}

double RandomStream::next_normal() {
    const double u1 = next_unit();
    const double u2 = next_unit();
    // 1 - u1 lies in (0, 1], keeping the log finite.
    return std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

RandomStream RandomStream::fork() {
    const std::uint64_t child_seed = next_u64();
    return RandomStream(child_seed);
}

} // namespace cryptoseq
