// SPDX-License-Identifier: Apache-2.0

#ifndef MBSPLICE_RNG_HPP
#define MBSPLICE_RNG_HPP

#include <complex>
#include <cstdint>
#include <utility>

namespace mbsplice {

/// Splittable counter-based generator (SplitMix64 core). Substreams are
/// derived by mixing an id into the key, so draws in one stream do not
/// depend on how many values other streams consumed. Every simulator
/// operation takes an explicit stream, which keeps trials reproducible in
/// isolation and independent of evaluation order.
class SplitRng {
 public:
  explicit SplitRng(uint64_t seed) : state_(mix(seed ^ kSalt)) {}

  /// Derive an independent substream for the given id.
  SplitRng split(uint64_t id) const {
    return SplitRng(FromState{}, mix(state_ ^ mix(id + kGolden)));
  }

  uint64_t next_u64() {
    state_ += kGolden;
    return mix(state_);
  }

  /// Uniform on [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

  /// Two independent standard normals via Box-Muller. std::normal_distribution
  /// is implementation-defined, so the transform is spelled out for
  /// reproducibility.
  std::pair<double, double> gaussian_pair();

  /// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
  std::complex<double> complex_gaussian(double variance);

 private:
  struct FromState {};
  SplitRng(FromState, uint64_t raw) : state_(raw) {}

  static constexpr uint64_t kGolden = 0x9e3779b97f4a7c15ull;
  static constexpr uint64_t kSalt = 0x5851f42d4c957f2dull;

  static uint64_t mix(uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ull;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebull;
    z ^= z >> 31;
    return z;
  }

  uint64_t state_;
};

}  // namespace mbsplice

#endif  // MBSPLICE_RNG_HPP
