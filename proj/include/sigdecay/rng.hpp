#ifndef SIGDECAY_RNG_HPP
#define SIGDECAY_RNG_HPP

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>

namespace sigdecay {

/// Combines a seed with a stream index into a new seed. Used to derive
/// independent substreams (per county, per patient, per skewer) so that
/// generation order and worker count never change the output.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// SplitMix64 generator. Small, fast, and fully specified here, so streams
/// are identical across platforms and standard-library versions.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1) with 53 random bits.
    double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [lo, hi] inclusive.
    int uniform_int(int lo, int hi) {
        if (hi < lo)
            throw std::invalid_argument("uniform_int: empty range");
        const std::uint64_t span = std::uint64_t(hi) - std::uint64_t(lo) + 1;
        return lo + int(next_u64() % span);
    }

    bool bernoulli(double p) { return next_double() < p; }

    /// Standard normal via Box-Muller on explicit uniforms.
    double next_gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = next_double();
        while (u1 <= 0.0)
            u1 = next_double();
        const double u2 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.141592653589793238462643383279502884 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    /// Index into a probability vector (weights must sum to ~1).
    std::size_t categorical(std::span<const double> weights) {
        const double u = next_double();
        double cum = 0.0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            cum += weights[i];
            if (u < cum)
                return i;
        }
        return weights.size() - 1;
    }

    /// Knuth's method; fine for the small means used here.
    int poisson(double mean) {
        if (mean <= 0.0)
            return 0;
        const double limit = std::exp(-mean);
        int k = 0;
        double prod = next_double();
        while (prod > limit) {
            ++k;
            prod *= next_double();
        }
        return k;
    }

  private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace sigdecay

#endif
