// SPDX-License-Identifier: Apache-2.0

#include "mbsplice/rng.hpp"

#include <cmath>

namespace mbsplice {

std::pair<double, double> SplitRng::gaussian_pair() {
  // u1 in (0, 1] so the log stays finite.
  double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  double u2 = uniform();
  double radius = std::sqrt(-2.0 * std::log(u1));
  double angle = 2.0 * M_PI * u2;
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

std::complex<double> SplitRng::complex_gaussian(double variance) {
  auto [g1, g2] = gaussian_pair();
  double scale = std::sqrt(variance / 2.0);
  return {scale * g1, scale * g2};
}

}  // namespace mbsplice
