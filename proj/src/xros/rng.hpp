#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <string_view>

namespace xros {

inline uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// One deterministic random stream. The transforms are hand-rolled on top of
// mt19937_64 so the draw sequence is identical on every platform (the standard
// pins the engine but not the distributions).
class RngStream {
public:
    explicit RngStream(uint64_t seed) : eng_(seed) {}

    uint64_t next_u64() { return eng_(); }

    // [0, 1), 53-bit resolution
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    // inclusive bounds, unbiased via rejection
    uint64_t uniform_int(uint64_t lo, uint64_t hi) {
        uint64_t span = hi - lo + 1;
        if (span == 0) return eng_();  // full range
        uint64_t limit = UINT64_MAX - UINT64_MAX % span;
        uint64_t v;
        do {
            v = eng_();
        } while (v >= limit);
        return lo + v % span;
    }

    bool bernoulli(double p) { return uniform01() < p; }

    // Box-Muller, one value per call
    double normal(double mean, double stdev) {
        double u1 = 1.0 - uniform01();  // (0, 1]
        double u2 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        return mean + stdev * r * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

private:
    std::mt19937_64 eng_;
};

// Root-seeded registry of named substreams. Each name derives an independent
// key from the root seed, so modules never perturb each other's draw sequences.
class RngSet {
public:
    explicit RngSet(uint64_t root_seed) : root_(root_seed) {}

    uint64_t root_seed() const { return root_; }

    RngStream& stream(const std::string& name);

    // Stateless derivation for callers that manage their own stream lifetime
    // (e.g. per-trial paired sampling in tests).
    static uint64_t derive_seed(uint64_t root, std::string_view name) {
        return splitmix64(root ^ fnv1a64(name));
    }

private:
    uint64_t root_;
    std::map<std::string, RngStream> streams_;
};

}  // namespace xros
