#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ilgaco {

// splitmix64 finalizer; good enough to decorrelate derived stream seeds.
constexpr uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Independent stream seed for (base, a, b). Every component that needs
// randomness derives its own stream so that evaluation order never leaks
// into results.
constexpr uint64_t derive_seed(uint64_t base, uint64_t a, uint64_t b = 0) {
    return mix64(mix64(mix64(base) ^ a) ^ b);
}

// Deterministic RNG. The engine is std::mt19937_64 (bit-exact per the
// standard); the distributions are written out here instead of using
// std:: distributions, whose streams are implementation-defined.
class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t next_u64() { return eng_(); }

    // uniform in [0, 1), 53 bits
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // standard normal via Box-Muller, second value cached
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log1p(-u1));  // log(1-u1), never log(0)
        const double a = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // uniform integer in [0, n); n must be > 0
    size_t index(size_t n) {
        return static_cast<size_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace ilgaco
