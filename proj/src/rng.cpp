#include "ospfock/rng.hpp"

#include <cmath>
#include <numbers>

namespace ospfock {

std::uint64_t Rng::next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

Rng Rng::substream(std::uint64_t seed, std::uint64_t index) {
    Rng mixer(seed);
    const std::uint64_t base = mixer.next_u64();
    Rng out(base ^ (0xD1B54A32D192ED03ull * (index + 1)));
    out.next_u64();
    return out;
}

double Rng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::gaussian() {
    double u1 = uniform();
    const double u2 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace ospfock
