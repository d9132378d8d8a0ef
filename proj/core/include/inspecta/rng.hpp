#pragma once

#include <cstdint>

namespace inspecta {

/// Deterministic counter-based random generator (splitmix64 core).
///
/// Every consumer derives its own stream from (master seed, stream id,
/// index), so parallel sample generation is order-independent and a
/// regenerated dataset draws identical values regardless of which samples
/// are produced. std::random distributions are implementation-defined and
/// therefore not used anywhere.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    /// Stream derivation: mixes master/stream/index so that distinct
    /// triples give statistically independent sequences.
    static Rng for_stream(std::uint64_t master, std::uint64_t stream, std::uint64_t index);

    std::uint64_t next_u64();

    /// Uniform in [0, 1), 53-bit resolution.
    double next_unit();

    /// Uniform integer in [lo, hi], inclusive. Requires lo <= hi.
    int uniform_int(int lo, int hi);

    /// Gaussian via Box-Muller (no spare caching; call order independent).
    double normal(double mean, double sigma);

private:
    std::uint64_t state_;
};

/// One splitmix64 step on a copy; usable as a 64-bit mixer.
std::uint64_t mix64(std::uint64_t value);

}  // namespace inspecta
