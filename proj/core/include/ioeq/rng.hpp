#pragma once

#include <cmath>
#include <cstdint>

namespace ioeq {

// splitmix64 step: advances the state and returns the next 64-bit output.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Derives an independent child seed from (seed, index). This is the
// documented derivation used for per-tree and per-row substreams.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t s = seed ^ (0x9e3779b97f4a7c15ull * (index + 1));
  return splitmix64(s);
}

// Small deterministic generator built on splitmix64. All distribution
// transforms are written out here so that identical seeds give identical
// streams on every platform; std:: distributions are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {
    // warm-up mix so that small seeds do not correlate
    splitmix64(state_);
  }

  std::uint64_t next_u64() { return splitmix64(state_); }

  // uniform in [0, 1)
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // uniform in [lo, hi)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // uniform integer in [0, n)
  std::uint64_t uniform_index(std::uint64_t n) {
    // modulo bias is negligible for n << 2^64 (n here is dataset-sized)
    return n ? next_u64() % n : 0;
  }

  // standard normal via Box-Muller (polar form avoided to keep the
  // consumption of the underlying stream fixed at two draws per pair)
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  double normal(double mean, double sigma) { return mean + sigma * normal(); }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace ioeq
