#pragma once

#include "coclust/types.hpp"

#include <cstdint>
#include <random>

namespace coclust {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed of sub-stream `stream` of master seed `seed`. Distinct streams are
/// decorrelated, and a stream's draws do not depend on any other stream.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

/// Thin wrapper over a 64-bit Mersenne twister with the few draws the
/// library needs.
class Rng {
  public:
    Rng(std::uint64_t seed, std::uint64_t stream)
        : engine_(derive_seed(seed, stream)) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal() { return normal_(engine_); }

    /// Index drawn from the (unnormalized, nonnegative) weights.
    int categorical(const Eigen::Ref<const Vector>& weights) {
        const double total = weights.sum();
        const double u = uniform() * total;
        double acc = 0.0;
        int last_positive = 0;
        for (Index k = 0; k < weights.size(); ++k) {
            if (weights[k] <= 0.0)
                continue;
            last_positive = static_cast<int>(k);
            acc += weights[k];
            if (u < acc)
                return static_cast<int>(k);
        }
        return last_positive;
    }

    Vector dirichlet(Index k, double alpha) {
        std::gamma_distribution<double> gamma(alpha, 1.0);
        Vector v(k);
        for (Index a = 0; a < k; ++a)
            v[a] = gamma(engine_);
        return v / v.sum();
    }

    std::mt19937_64& engine() { return engine_; }

  private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

} // namespace coclust
