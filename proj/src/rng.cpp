#include "ofc/rng.hpp"

#include "ofc/error.hpp"

#include <cmath>
#include <numbers>

namespace ofc::rng {

double Stream::log_uniform(double lo, double hi) {
    if (lo <= 0.0 || hi < lo) {
        throw ValidationError("log_uniform requires 0 < lo <= hi");
    }
    return std::exp(uniform(std::log(lo), std::log(hi)));
}

double Stream::normal() {
    // u1 in (0, 1] so the log is finite.
    double u1 = 1.0 - uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Stream::uniform_int(std::uint64_t n) {
    if (n == 0) {
        throw ValidationError("uniform_int requires n > 0");
    }
    const std::uint64_t limit = n * ((~std::uint64_t{0}) / n);
    std::uint64_t x = next_u64();
    while (x >= limit) {
        x = next_u64();
    }
    return x % n;
}

} // namespace ofc::rng
