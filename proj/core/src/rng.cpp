#include "inspecta/rng.hpp"

#include <cmath>
#include <numbers>

namespace inspecta {

namespace {

std::uint64_t splitmix_step(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

std::uint64_t mix64(std::uint64_t value) {
    return splitmix_step(value);
}

Rng Rng::for_stream(std::uint64_t master, std::uint64_t stream, std::uint64_t index) {
    std::uint64_t s = mix64(master);
    s = mix64(s ^ (0x9e3779b97f4a7c15ULL + stream));
    s = mix64(s ^ (0xc2b2ae3d27d4eb4fULL + index));
    return Rng(s);
}

std::uint64_t Rng::next_u64() {
    return splitmix_step(state_);
}

double Rng::next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

int Rng::uniform_int(int lo, int hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(next_u64() % span);
}

double Rng::normal(double mean, double sigma) {
    // u1 in (0,1] keeps the log finite.
    const double u1 = 1.0 - next_unit();
    const double u2 = next_unit();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    return mean + sigma * radius * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace inspecta
