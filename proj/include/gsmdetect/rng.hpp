#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace gsmdet {

/// Deterministic random stream. The engine is the fully-specified
/// std::mt19937_64; uniforms and Gaussians are generated from raw engine
/// output so results do not depend on library distribution internals.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    int bit() { return static_cast<int>(eng_() >> 63); }

    /// Standard normal via Box-Muller (cached spare).
    double gauss() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

  private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

/// Stateless SplitMix64-style avalanche mix of the trial coordinates.
inline std::uint64_t derive_trial_seed(std::uint64_t master_seed, std::uint64_t run,
                                       std::uint64_t use, std::uint64_t snr_index) {
    auto mix = [](std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    std::uint64_t s = master_seed;
    s = mix(s + 0x9e3779b97f4a7c15ULL + run);
    s = mix(s + 0x9e3779b97f4a7c15ULL + use);
    s = mix(s + 0x9e3779b97f4a7c15ULL + snr_index);
    return s;
}

}  // namespace gsmdet
