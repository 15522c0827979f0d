// SPDX-License-Identifier: Apache-2.0

#include "mbsplice/handshake.hpp"

#include <array>
#include <cmath>
#include <limits>

#include "mbsplice/model.hpp"

namespace mbsplice {

std::vector<Complex> squared_cfr(const HandshakeSamples& hs) {
  std::vector<Complex> q(hs.tx.size());
  for (size_t m = 0; m < q.size(); ++m) q[m] = hs.rx[m] * hs.tx[m];
  return q;
}

AmbiguityGrid AmbiguityGrid::for_plan(const BandPlan& plan, int tau_count,
                                      int theta_count) {
  if (tau_count < 1 || theta_count < 1)
    throw std::invalid_argument("AmbiguityGrid: counts must be >= 1");
  AmbiguityGrid grid;
  grid.tau_count = tau_count;
  grid.theta_count = theta_count;
  grid.f_s = plan.subcarrier_spacing;
  return grid;
}

int AmbiguityGrid::nearest_tau_index(double tau) const {
  double pos = tau * f_s * tau_count;  // in grid units
  long idx = std::lround(pos);
  long wrapped = idx % tau_count;
  if (wrapped < 0) wrapped += tau_count;
  return static_cast<int>(wrapped);
}

namespace {

// Per-band inner sums s_m = sum_i h0_i e^{-j 2 pi f_{m,0} (i/G)/f_s} in
// channel-gain units.
std::vector<Complex> band_sums(const RelativeCirEstimate& h0,
                               const BandPlan& plan) {
  std::vector<Complex> s(static_cast<size_t>(plan.num_bands), Complex{0, 0});
  for (int m = 0; m < plan.num_bands; ++m) {
    double f0 = plan.freq(m, 0);
    Complex acc{0.0, 0.0};
    for (const auto& [idx, coeff] : h0.entries)
      acc += coeff * cis_cycles_prod(-f0, h0.grid_delay(idx));
    s[static_cast<size_t>(m)] = acc * h0.gain_scale;
  }
  return s;
}

}  // namespace

std::vector<Complex> predict_zero_carrier(const RelativeCirEstimate& h0,
                                          const BandPlan& plan, double tau_bar,
                                          double theta_bar) {
  if (h0.entries.empty())
    throw std::invalid_argument("predict_zero_carrier: empty estimate");
  std::vector<Complex> s = band_sums(h0, plan);
  Complex rot = cis_rad(theta_bar);
  for (int m = 0; m < plan.num_bands; ++m)
    s[static_cast<size_t>(m)] *= rot * cis_cycles_prod(-plan.freq(m, 0), tau_bar);
  return s;
}

ResolvedCir resolve(const RelativeCirEstimate& h0,
                    const std::vector<Complex>& q, const BandPlan& plan,
                    const AmbiguityGrid& grid) {
  if (static_cast<int>(q.size()) != plan.num_bands)
    throw std::invalid_argument("resolve: band count mismatch");

  ResolvedCir out;
  std::vector<Complex> s = band_sums(h0, plan);
  bool all_zero = true;
  for (const Complex& sm : s)
    if (sm != Complex{0.0, 0.0}) all_zero = false;
  if (h0.entries.empty() || all_zero) return out;  // ok = false

  const int bands = plan.num_bands;
  // C(tau, theta) = sum_m |q_m|^2 + |p_m|^2 - 2 Re(e^{j 2 theta} sum_m conj(q_m) w_m(tau))
  // with p_m = s_m^2 and w_m = e^{-j 4 pi f_{m,0} tau} p_m.
  std::vector<Complex> cross(static_cast<size_t>(bands));
  double base = 0.0;
  for (int m = 0; m < bands; ++m) {
    Complex p = s[static_cast<size_t>(m)] * s[static_cast<size_t>(m)];
    base += std::norm(q[static_cast<size_t>(m)]) + std::norm(p);
    cross[static_cast<size_t>(m)] = std::conj(q[static_cast<size_t>(m)]) * p;
  }

  // e^{j 2 theta_k}; the cycle argument 2k/count reduces exactly, so the
  // table (and hence the cost) is bit-identical under theta -> theta + pi.
  std::vector<Complex> theta_rot(static_cast<size_t>(grid.theta_count));
  for (int k = 0; k < grid.theta_count; ++k)
    theta_rot[static_cast<size_t>(k)] =
        cis_cycles(2.0 * static_cast<double>(k) / grid.theta_count);

  double best_cost = std::numeric_limits<double>::infinity();
  int best_tau = 0, best_theta = 0;
  for (int i = 0; i < grid.tau_count; ++i) {
    double tau = grid.tau_at(i);
    Complex sum{0.0, 0.0};
    for (int m = 0; m < bands; ++m)
      sum += cross[static_cast<size_t>(m)] *
             cis_cycles_prod(-2.0 * plan.freq(m, 0), tau);
    for (int k = 0; k < grid.theta_count; ++k) {
      double c = base - 2.0 * (theta_rot[static_cast<size_t>(k)] * sum).real();
      if (c < best_cost) {  // strict: ties keep the smaller (tau, theta)
        best_cost = c;
        best_tau = i;
        best_theta = k;
      }
    }
  }

  out.tof = grid.tau_at(best_tau);
  out.theta_raw = grid.theta_at(best_theta);
  out.theta = out.theta_raw < M_PI ? out.theta_raw : out.theta_raw - M_PI;
  out.theta_ambiguous = true;
  out.cost = best_cost;

  Complex rot = cis_rad(out.theta_raw);
  double period = 1.0 / grid.f_s;
  for (const auto& [idx, coeff] : h0.entries) {
    double delay = wrap_delay(out.tof + h0.grid_delay(idx), period);
    out.cir.taps.push_back({delay, rot * coeff * h0.gain_scale});
  }
  std::sort(out.cir.taps.begin(), out.cir.taps.end(),
            [](const Tap& lhs, const Tap& rhs) { return lhs.delay < rhs.delay; });
  out.ok = true;
  return out;
}

std::vector<std::array<double, 3>> cost_surface(const RelativeCirEstimate& h0,
                                                const std::vector<Complex>& q,
                                                const BandPlan& plan,
                                                const AmbiguityGrid& grid,
                                                int tau_decimation) {
  if (tau_decimation < 1) tau_decimation = 1;
  std::vector<Complex> s = band_sums(h0, plan);
  const int bands = plan.num_bands;
  std::vector<Complex> cross(static_cast<size_t>(bands));
  double base = 0.0;
  for (int m = 0; m < bands; ++m) {
    Complex p = s[static_cast<size_t>(m)] * s[static_cast<size_t>(m)];
    base += std::norm(q[static_cast<size_t>(m)]) + std::norm(p);
    cross[static_cast<size_t>(m)] = std::conj(q[static_cast<size_t>(m)]) * p;
  }
  std::vector<std::array<double, 3>> rows;
  for (int i = 0; i < grid.tau_count; i += tau_decimation) {
    double tau = grid.tau_at(i);
    Complex sum{0.0, 0.0};
    for (int m = 0; m < bands; ++m)
      sum += cross[static_cast<size_t>(m)] *
             cis_cycles_prod(-2.0 * plan.freq(m, 0), tau);
    for (int k = 0; k < grid.theta_count; ++k) {
      double theta = grid.theta_at(k);
      double c = base -
                 2.0 * (cis_cycles(2.0 * static_cast<double>(k) /
                                   grid.theta_count) *
                        sum)
                           .real();
      rows.push_back({tau, theta, c});
    }
  }
  return rows;
}

double ranging_error(double tau_true, double tau_star) {
  return std::abs(tau_true - tau_star) * kSpeedOfLight;
}

}  // namespace mbsplice
