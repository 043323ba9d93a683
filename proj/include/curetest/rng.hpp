// Counter-based splittable random number generator.
//
// Every randomized routine in the library draws from an rng stream derived
// from (seed, path...). Streams derived from distinct paths are independent,
// so parallel and serial execution of keyed work units produce bit-identical
// results regardless of scheduling.
#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace curetest {

namespace detail {
// SplitMix64 finalizer (Stafford variant 13).
inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
}
constexpr std::uint64_t golden_gamma = 0x9e3779b97f4a7c15ULL;
}  // namespace detail

// SplitMix64 stream: the state is a counter advanced by the golden gamma and
// each output is a strong mix of the counter. Equal seeds give equal streams.
class rng {
  public:
    explicit rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += detail::golden_gamma;
        std::uint64_t z = detail::mix64(state_);
        return z ^ (z >> 29);
    }

    // Uniform on [0,1) with 53-bit resolution.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform on (0,1); never returns an exact endpoint.
    double next_open() { return (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1.0p-52; }

    // Uniform integer in [0, n) via the multiply-shift reduction.
    std::uint64_t next_below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Exponential with the given rate, by inversion.
    double exponential(double rate) { return -std::log1p(-next_double()) / rate; }

    // Standard normal by Box-Muller; one value per call (no cached pair, so
    // the stream layout stays a pure function of the call sequence).
    double normal() {
        double u1 = next_open();
        double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
    }

  private:
    std::uint64_t state_;
};

// Derives the seed of an independent stream from a root seed and a key path.
inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    std::uint64_t k = detail::mix64(seed + detail::golden_gamma);
    for (std::uint64_t id : path) k = detail::mix64(k ^ (id + detail::golden_gamma));
    return k;
}

inline rng make_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    return rng(derive_seed(seed, path));
}

// Stable 64-bit hash for keying streams by name (FNV-1a).
inline std::uint64_t hash_name(const char* s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (; *s; ++s) {
        h ^= static_cast<unsigned char>(*s);
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace curetest
