// SPDX-License-Identifier: Apache-2.0

#include "mbsplice/types.hpp"

#include <cmath>
#include <string>

namespace mbsplice {

double wrap_cycles(double x) {
  double f = x - std::floor(x);
  if (f >= 1.0) f -= 1.0;  // floor rounding at tiny negative x
  return f;
}

namespace {

constexpr long double kTwoPiL = 6.283185307179586476925286766559005768L;

Complex cis_reduced(long double r) {  // r in [-0.5, 0.5] cycles
  // Quarter turns come out exact, e.g. a half-cycle phase offset negates a
  // band sample-wise instead of leaving a ~1e-16 imaginary crumb.
  long double q = 4.0L * r;
  if (q == nearbyintl(q)) {
    switch (static_cast<int>(q)) {
      case 0: return {1.0, 0.0};
      case 1: return {0.0, 1.0};
      case -1: return {0.0, -1.0};
      case 2:
      case -2: return {-1.0, 0.0};
      default: break;
    }
  }
  long double theta = kTwoPiL * r;
  return {static_cast<double>(cosl(theta)), static_cast<double>(sinl(theta))};
}

}  // namespace

Complex cis_cycles(double x) {
  return cis_reduced(remainderl(static_cast<long double>(x), 1.0L));
}

Complex cis_cycles_prod(double a, double b, double c) {
  long double cycles = static_cast<long double>(a) * b + c;
  return cis_reduced(remainderl(cycles, 1.0L));
}

Complex cis_rad(double theta) {
  return {std::cos(theta), std::sin(theta)};
}

void BandPlan::validate() const {
  if (num_bands < 1) throw std::invalid_argument("BandPlan: need at least one band");
  if (subcarriers_per_band < 3 || subcarriers_per_band % 2 == 0)
    throw std::invalid_argument("BandPlan: subcarrier count must be odd and >= 3");
  if (subcarrier_spacing <= 0.0)
    throw std::invalid_argument("BandPlan: spacing must be positive");
  if (static_cast<int>(carriers.size()) != num_bands)
    throw std::invalid_argument("BandPlan: carrier count does not match num_bands");
  for (int m = 1; m < num_bands; ++m) {
    double gap = carriers[m] - carriers[m - 1];
    if (gap <= 0.0)
      throw std::invalid_argument("BandPlan: carriers must be strictly increasing");
    if (gap < band_width())
      throw std::invalid_argument("BandPlan: adjacent bands overlap");
  }
}

namespace {

// Cumulative center offsets in units of f_s/2, one pattern per carrier
// group. Centers on a coarse raster make the squared zero-carrier phases
// e^{-j 4 pi f_m tau} recohere at small delay shifts (25 ns for the 10 MHz
// raster), which leaves the time-of-flight search with duplicate minima.
// The offsets use the full guard spectrum (up to ~30 MHz) with irregular
// increments and mixed parity: pairwise carrier differences share no
// divisor coarser than f_s/2, so no shift inside [0, 1/f_s) recoheres all
// bands, and the widest near-recoherences stay well separated in cost.
// Chosen by minimizing the worst residual alignment
// max_{2ns <= delta <= 3198ns} |sum_m exp(-j 4 pi f_m delta)| / M
// over admissible offset patterns (randomized search); these reach 0.67,
// i.e. every delay shift beyond the resolution shoulder misfits at least a
// third of the squared-sample energy.
constexpr int kGroupAOffsets[8] = {0, 6, 9, 21, 49, 86, 136, 191};
constexpr int kGroupBOffsets[8] = {0, 12, 12, 31, 57, 109, 151, 189};

int group_offset(bool second_group, int k) {
  if (k < 8) return second_group ? kGroupBOffsets[k] : kGroupAOffsets[k];
  // Extend the tables deterministically for plans wider than 8 bands per
  // group, keeping increments irregular and positive.
  int c = second_group ? kGroupBOffsets[7] : kGroupAOffsets[7];
  for (int i = 8; i <= k; ++i)
    c += 20 + (7 * (i + (second_group ? 3 : 0))) % 13;
  return c;
}

}  // namespace

BandPlan make_band_plan(int num_bands, int subcarriers, double spacing) {
  BandPlan plan;
  plan.num_bands = num_bands;
  plan.subcarriers_per_band = subcarriers;
  plan.subcarrier_spacing = spacing;
  plan.carriers.resize(static_cast<size_t>(num_bands));
  int first_group = (num_bands + 1) / 2;
  double width = (subcarriers - 1) * spacing;
  for (int m = 0; m < num_bands; ++m) {
    bool second = m >= first_group;
    int k = second ? m - first_group : m;
    double base = second ? 5.01e9 : 2.01e9;
    plan.carriers[static_cast<size_t>(m)] =
        base + k * width + group_offset(second, k) * (spacing / 2.0);
  }
  plan.validate();
  return plan;
}

BandPlan raster_band_plan(int num_bands, int subcarriers, double spacing) {
  BandPlan plan;
  plan.num_bands = num_bands;
  plan.subcarriers_per_band = subcarriers;
  plan.subcarrier_spacing = spacing;
  plan.carriers.resize(static_cast<size_t>(num_bands));
  int first_group = (num_bands + 1) / 2;
  double width = (subcarriers - 1) * spacing;
  for (int m = 0; m < num_bands; ++m) {
    bool second = m >= first_group;
    int k = second ? m - first_group : m;
    plan.carriers[static_cast<size_t>(m)] = (second ? 5.01e9 : 2.01e9) + k * width;
  }
  plan.validate();
  return plan;
}

BandPlan default_band_plan() { return make_band_plan(16, 65, 312.5e3); }

void Cir::validate() const {
  if (taps.empty()) throw std::invalid_argument("Cir: needs at least one tap");
  for (size_t k = 1; k < taps.size(); ++k)
    if (!(taps[k].delay > taps[k - 1].delay))
      throw std::invalid_argument("Cir: delays must be strictly increasing");
  if (taps.front().delay < 0.0)
    throw std::invalid_argument("Cir: delays must be nonnegative");
}

NoiseModel NoiseModel::from_db(double snr_db) {
  return NoiseModel{std::pow(10.0, snr_db / 10.0)};
}

const char* to_string(CsiKind kind) {
  switch (kind) {
    case CsiKind::ideal: return "ideal";
    case CsiKind::distorted: return "distorted";
    case CsiKind::cleaned: return "cleaned";
  }
  return "ideal";
}

CsiKind csi_kind_from_string(const std::string& s) {
  if (s == "ideal") return CsiKind::ideal;
  if (s == "distorted") return CsiKind::distorted;
  if (s == "cleaned") return CsiKind::cleaned;
  throw std::invalid_argument("unknown CSI kind: " + s);
}

}  // namespace mbsplice
