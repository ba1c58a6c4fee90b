#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace ofc::rng {

/// FNV-1a over a byte string; used for tag folding and config hashing.
inline std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// splitmix64 step; also used as the finalizer when deriving stream seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Builds a seed for a named substream by folding tags into a root seed.
/// Equal (seed, tags) always produce the same value, so parallel workers
/// can reconstruct the stream a serial run would have used.
class SeedChain {
public:
    explicit SeedChain(std::uint64_t root) : state_(root ^ 0x6a09e667f3bcc908ULL) { advance(); }

    SeedChain& mix(std::uint64_t v) {
        state_ ^= v;
        advance();
        return *this;
    }

    SeedChain& mix(std::string_view tag) { return mix(fnv1a(tag)); }

    std::uint64_t value() const { return state_; }

private:
    void advance() {
        std::uint64_t s = state_;
        state_ = splitmix64(s);
    }

    std::uint64_t state_;
};

/// Seedable random stream with platform-independent output.
///
/// The engine (std::mt19937_64) is fully specified by the standard; all
/// transformations below are hand-rolled because the standard
/// distributions are implementation-defined.
class Stream {
public:
    explicit Stream(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Log-uniform over [lo, hi], lo > 0.
    double log_uniform(double lo, double hi);

    /// Standard normal via Box-Muller (no cached spare, keeps the stream
    /// position a pure function of the draw count).
    double normal();

    /// Uniform integer in [0, n), rejection sampled to avoid modulo bias.
    std::uint64_t uniform_int(std::uint64_t n);

    /// Fisher-Yates shuffle using uniform_int.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_int(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

} // namespace ofc::rng
