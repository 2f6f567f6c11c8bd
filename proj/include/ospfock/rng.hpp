#pragma once

#include <cstdint>

namespace ospfock {

/// Deterministic pseudo-random stream (splitmix64 core, Box-Muller normals).
///
/// Deliberately not std::* distributions: their output sequences are
/// implementation-defined, and the test suite freezes sampled values.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    /// Decorrelated stream for sample `index` of a run seeded with `seed`.
    /// Per-sample work can then run in any order (or in parallel) and still
    /// reproduce bit-identical results.
    static Rng substream(std::uint64_t seed, std::uint64_t index);

    std::uint64_t next_u64();
    double uniform();   ///< in [0, 1)
    double gaussian();  ///< standard normal

private:
    std::uint64_t state_;
};

}  // namespace ospfock
