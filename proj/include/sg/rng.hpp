#pragma once

#include <cmath>
#include <cstdint>

namespace sg {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Stream seed derivation (trial index, shard index, ...).
inline uint64_t derive_seed(uint64_t base, uint64_t stream) {
    return splitmix64(base ^ splitmix64(stream + 0x6a09e667f3bcc909ull));
}

// xoshiro256++ with splitmix64 seeding. Self-contained so that sampled
// sequences are identical across compilers (std:: distributions are not).
class Rng {
public:
    explicit Rng(uint64_t seed = 0) {
        uint64_t x = seed;
        for (auto& si : s_) {
            x = splitmix64(x);
            si = x;
        }
        spare_valid_ = false;
    }

    uint64_t next_u64() {
        auto rotl = [](uint64_t v, int k) { return (v << k) | (v >> (64 - k)); };
        uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0, 1).
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n) without modulo bias (Lemire reduction).
    uint64_t below(uint64_t n) {
        return uint64_t((__uint128_t(next_u64()) * n) >> 64);
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Standard normal via Box-Muller.
    double normal() {
        if (spare_valid_) {
            spare_valid_ = false;
            return spare_;
        }
        double u1, u2;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        spare_valid_ = true;
        return r * std::cos(a);
    }

    double normal(double mean, double stdev) { return mean + stdev * normal(); }

    // Poisson via inversion for small means, normal approximation above 64.
    uint64_t poisson(double mean) {
        if (mean <= 0.0) return 0;
        if (mean > 64.0) {
            double v = std::round(normal(mean, std::sqrt(mean)));
            return v < 0 ? 0 : uint64_t(v);
        }
        double l = std::exp(-mean);
        uint64_t k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= uniform();
        } while (p > l);
        return k - 1;
    }

private:
    uint64_t s_[4];
    double spare_ = 0.0;
    bool spare_valid_ = false;
};

} // namespace sg
