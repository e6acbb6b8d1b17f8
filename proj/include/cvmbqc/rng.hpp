#pragma once

#include <cmath>
#include <cstdint>

namespace cvmbqc {

// Counter-based deterministic generator. A stream is derived by hashing
// (master_seed, stream, substream), so trajectories can draw independently of
// execution order and worker count. Within a stream, draws advance a
// SplitMix64 state sequentially.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed + kGamma) {}

  Rng(std::uint64_t master_seed, std::uint64_t stream, std::uint64_t substream = 0) {
    std::uint64_t h = mix(master_seed + kGamma);
    h = mix(h ^ (stream + 0x9e3779b97f4a7c15ull));
    h = mix(h ^ (substream + 0xbf58476d1ce4e5b9ull));
    state_ = h;
  }

  std::uint64_t next_u64() {
    state_ += kGamma;
    return mix(state_);
  }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; caches the second value of each pair.
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(a);
    have_cached_ = true;
    return r * std::cos(a);
  }

  // Poisson by CDF inversion; exact for the moderate means used here.
  int poisson(double mean) {
    const double u = uniform();
    double p = std::exp(-mean);
    double cum = p;
    int k = 0;
    const int k_cap = static_cast<int>(10.0 * mean) + 200;
    while (u > cum && k < k_cap) {
      ++k;
      p *= mean / k;
      cum += p;
    }
    return k;
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ull;

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t state_ = 0;
  bool have_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace cvmbqc
