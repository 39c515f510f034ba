#pragma once
// Deterministic random streams. Distributions are hand-rolled from fixed bit
// recipes so draws reproduce exactly across platforms and compilers; the
// std::*_distribution classes are implementation-defined and would not.

#include <cmath>
#include <cstdint>
#include <string_view>

namespace linkage {

inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// FNV-1a over bytes; used to derive substream seeds from string ids.
inline uint64_t fnv1a(std::string_view s, uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Combine a base seed with a stream tag into an independent-looking seed.
inline uint64_t mix_seed(uint64_t base, uint64_t tag) {
    uint64_t s = base ^ (tag + 0x9e3779b97f4a7c15ULL + (base << 6) + (base >> 2));
    return splitmix64(s);
}

class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) { next_u64(); }

    uint64_t next_u64() { return splitmix64(state_); }

    // uniform on [0, 1)
    double uniform01() { return double(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    // uniform index in [0, n); Lemire multiply-shift, bias negligible for n << 2^64
    size_t uniform_index(size_t n) {
        return size_t((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    // standard normal, Box-Muller with cached spare
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        double u2 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double t = 2.0 * M_PI * u2;
        spare_ = r * std::sin(t);
        has_spare_ = true;
        return r * std::cos(t);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    // Gamma(shape, 1) via Marsaglia-Tsang; shape > 0
    double gamma(double shape) {
        if (shape < 1.0) {
            double u = uniform01();
            while (u <= 0.0) u = uniform01();
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        double d = shape - 1.0 / 3.0;
        double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal();
            double v = 1.0 + c * x;
            if (v <= 0.0) continue;
            v = v * v * v;
            double u = uniform01();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

private:
    uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace linkage
