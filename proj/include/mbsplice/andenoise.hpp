// SPDX-License-Identifier: Apache-2.0
//
// Per-band line-spectral denoising. The band vector is a noisy mixture of
// complex sinusoids a(tau, theta) with [a]_n = exp(-j(2 pi n f_s tau - theta)),
// n in {-(N-1)/2,...,(N-1)/2}. The denoiser solves
//
//   minimize  0.5 ||x - y||^2 + (lambda/2) (t + u_1)
//   subject to  [[T(u), x], [x^H, t]] >= 0,
//
// the semidefinite form of atomic-norm-regularized least squares over that
// continuous dictionary, with an ADMM that splits the semidefinite cone and
// projects by Hermitian eigendecomposition each iteration. Delay support is
// read off the dual polynomial of the residual and the mixture coefficients
// are refit against the raw band by least squares.

#ifndef MBSPLICE_ANDENOISE_HPP
#define MBSPLICE_ANDENOISE_HPP

#include <vector>

#include "mbsplice/types.hpp"

namespace mbsplice {

/// Length-N atom with entries exp(-j(2 pi n f_s tau - theta)); unit-modulus
/// entries, Euclidean norm sqrt(N).
CVec atom_vector(int n_sub, double f_s, double tau, double theta = 0.0);

/// Regularizer matched to unit-variance-over-snr noise:
///   lambda = (1 + 1/ln N)/sqrt(snr) * sqrt(N ln N + N ln(4 pi ln N)).
double lambda_for(int n_sub, double snr);

struct AdmmOptions {
  double rho = 0.05;           // initial penalty; rebalanced on residuals
  double over_relax = 1.7;     // relaxation factor in (0, 2)
  double rel_tol = 1e-6;       // relative primal/dual residual target
  int max_iters = 20000;
  int balance_every = 100;
  bool record_objective = false;
};

struct DenoiseResult {
  CVec x_hat;                  // denoised band vector
  CVec u;                      // Toeplitz generator, first column of T(u)
  double t = 0.0;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  bool converged = false;
  std::vector<double> objective_trace;  // per iteration when recorded

  double objective(const CVec& y, double lambda) const;
};

DenoiseResult an_denoise(const CVec& y, double lambda,
                         const AdmmOptions& options = {});

/// Samples |Q(tau)| of the dual polynomial Q(tau) = <a(tau,0), q> with
/// q = (y - x_hat)/lambda on a uniform grid over one delay period [0, 1/f_s);
/// sample i sits at tau = i/(grid_points * f_s). At the optimum |Q| <= 1 with
/// contact points at the recovered delays.
RVec dual_polynomial_abs(const CVec& q, int grid_points);

/// Delay support from the dual polynomial: local maximizers of |Q| above
/// 1 - eps_dual on a grid of grid_mult*N points, each refined by one
/// three-point quadratic interpolation. Sorted ascending; empty when the
/// solution was shrunk to zero.
std::vector<double> extract_support(const DenoiseResult& result, const CVec& y,
                                    double lambda, const BandPlan& plan,
                                    double eps_dual = 1e-3, int grid_mult = 64);

struct BandEstimate {
  std::vector<double> delays;  // ascending, in [0, 1/f_s)
  CVec coeffs;
  int k_hat() const { return static_cast<int>(delays.size()); }
};

/// Least-squares coefficients against zero-phase atoms at the given delays
/// (Moore-Penrose solve). Delays closer than 1/(64 N f_s) are merged first
/// so the atom matrix stays well-conditioned.
BandEstimate fit_coeffs(const CVec& y, std::vector<double> delays, double f_s);

/// Gauss-Newton polish of (delays, coefficients) on the raw band vector,
/// starting from the dual-polynomial support. Grid-and-interpolate leaves a
/// delay bias on the order of the solver tolerance times the kernel width;
/// the polish removes it (noiseless bands localize to machine precision),
/// which the downstream distortion cleaning needs. Detection still comes
/// from the dual polynomial alone.
BandEstimate refine_taps(const CVec& y, std::vector<double> delays, double f_s,
                         int max_iters = 30);

struct DenoiseBandOptions {
  AdmmOptions admm;
  double eps_dual = 1e-3;
  int grid_mult = 64;
  bool refine = true;
  int refine_max_iters = 30;
};

/// lambda_for -> an_denoise -> extract_support -> (refine) -> fit_coeffs.
BandEstimate denoise_band(const CVec& y, double snr, const BandPlan& plan,
                          const DenoiseBandOptions& options = {});

}  // namespace mbsplice

#endif  // MBSPLICE_ANDENOISE_HPP
