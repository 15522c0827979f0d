// SPDX-License-Identifier: Apache-2.0
//
// Comparison method: basis pursuit denoising on the M squared zero-carrier
// samples. The squared response is the transform of the channel convolved
// with itself, so the first significant recovered component sits at twice
// the time of flight.

#ifndef MBSPLICE_CHRONOS_HPP
#define MBSPLICE_CHRONOS_HPP

#include <vector>

#include "mbsplice/types.hpp"

namespace mbsplice {

/// minimize ||x||_1 subject to ||q - F x||_2 <= eps, with
/// [F]_{m,i} = (1/sqrt(M)) exp(-j 2 pi f_{m,0} (i/G')/f_s), i = 0..G'-1.
struct BpdnProblem {
  CVec q;
  CMat fourier;      // M x G'
  double eps = 0.0;
  int grid_size = 0;
  double f_s = 0.0;

  static BpdnProblem build(const std::vector<Complex>& q, const BandPlan& plan,
                           int g_prime, double eps);

  double grid_delay(int i) const {
    return (static_cast<double>(i) / grid_size) / f_s;
  }
};

struct BpdnOptions {
  double rho = 1.0;
  double rel_tol = 1e-10;
  int max_iters = 100000;
};

struct BpdnResult {
  CVec x;
  int iterations = 0;
  bool converged = false;
  double constraint_residual = 0.0;  // ||q - F x||

  double objective() const { return x.lpNorm<1>(); }
};

/// Douglas-Rachford/ADMM splitting of the constrained form: an l1 block, a
/// ball-projection block, and a coupled least-squares step solved through
/// the M x M Gram factor (Woodbury), so each iteration is O(M G').
BpdnResult solve_bpdn(const BpdnProblem& problem,
                      const BpdnOptions& options = {});

struct ChronosEstimate {
  double tof = 0.0;
  bool ok = false;
  CVec solution;
};

/// Full baseline: squared handshake samples -> BPDN -> first grid index with
/// magnitude at least eta * max|x| -> half its delay.
ChronosEstimate chronos_tof(const HandshakeSamples& hs, const BandPlan& plan,
                            int g_prime, double eps, double eta = 0.1,
                            const BpdnOptions& options = {});

}  // namespace mbsplice

#endif  // MBSPLICE_CHRONOS_HPP
