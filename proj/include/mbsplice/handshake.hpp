// SPDX-License-Identifier: Apache-2.0
//
// Time-of-flight recovery. The spliced estimate only pins the channel up to
// a delay shift and a global phase; the bidirectional zero-subcarrier
// exchange provides squared center-carrier responses whose band-to-band
// phase progression identifies the shift pair by grid search.

#ifndef MBSPLICE_HANDSHAKE_HPP
#define MBSPLICE_HANDSHAKE_HPP

#include <array>
#include <cmath>
#include <vector>

#include "mbsplice/splicer.hpp"
#include "mbsplice/types.hpp"

namespace mbsplice {

/// Per-band product y_rx[m,0] * y_tx[m,0]; the opposite-sign phase offsets
/// cancel, leaving H[m,0]^2 plus signal-noise cross terms.
std::vector<Complex> squared_cfr(const HandshakeSamples& hs);

/// Search grid: tau uniform over [0, 1/f_s), theta uniform over [0, 2 pi).
struct AmbiguityGrid {
  int tau_count = 65536;
  int theta_count = 64;
  double f_s = 0.0;

  static AmbiguityGrid for_plan(const BandPlan& plan, int tau_count = 65536,
                                int theta_count = 64);

  double tau_at(int i) const {
    return (static_cast<double>(i) / tau_count) / f_s;
  }
  double theta_at(int k) const {
    return 2.0 * M_PI * static_cast<double>(k) / theta_count;
  }
  /// Index of the grid point nearest to tau (wrapping).
  int nearest_tau_index(double tau) const;
};

/// Zero-carrier prediction for a shift hypothesis:
///   H_hat[m] = e^{j theta} e^{-j 2 pi f_{m,0} tau} sum_i h0_i e^{-j 2 pi f_{m,0} (i/G)/f_s};
/// the inner sum depends only on the band and the estimate and is computed
/// once per band.
std::vector<Complex> predict_zero_carrier(const RelativeCirEstimate& h0,
                                          const BandPlan& plan, double tau_bar,
                                          double theta_bar);

/// Final channel and time of flight. The squared prediction depends on theta
/// only through e^{j 2 theta}, so theta is identified modulo pi: `theta` is
/// the canonical representative in [0, pi), `theta_raw` the grid argmin.
struct ResolvedCir {
  Cir cir;
  double tof = 0.0;
  double theta = 0.0;
  double theta_raw = 0.0;
  bool theta_ambiguous = true;
  double cost = 0.0;
  bool ok = false;
};

/// Minimize C(tau, theta) = sum_m |q_m - H_hat[m]^2|^2 over the grid; ties
/// resolve to the smaller tau, then the smaller theta. Fails (ok = false)
/// when the estimate predicts zero on every band.
ResolvedCir resolve(const RelativeCirEstimate& h0,
                    const std::vector<Complex>& q, const BandPlan& plan,
                    const AmbiguityGrid& grid);

/// Cost samples on a decimated grid for diagnostics: rows of
/// (tau_s, theta_rad, cost).
std::vector<std::array<double, 3>> cost_surface(const RelativeCirEstimate& h0,
                                                const std::vector<Complex>& q,
                                                const BandPlan& plan,
                                                const AmbiguityGrid& grid,
                                                int tau_decimation);

/// |tau_true - tau_star| converted to meters.
double ranging_error(double tau_true, double tau_star);

}  // namespace mbsplice

#endif  // MBSPLICE_HANDSHAKE_HPP
