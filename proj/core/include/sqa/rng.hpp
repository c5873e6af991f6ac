#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace sqa {

// Deterministic RNG used everywhere seeded randomness is needed. mt19937_64
// is bit-exact per the standard; the distribution helpers below are written
// out by hand so results do not depend on the standard library's
// implementation-defined distributions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller. No pair caching.
    double normal(double mean = 0.0, double stddev = 1.0);

    // Uniform index in [0, n). Rejection sampling, no modulo bias.
    std::size_t uniform_index(std::size_t n);

    // Seeded Fisher-Yates.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = uniform_index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 eng_;
};

// Derives an independent child seed from a base seed and a stream tag
// (splitmix64 finalizer). Chained calls split streams per record / grid
// point so parallel evaluation order never changes results.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace sqa
