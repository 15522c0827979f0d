// SPDX-License-Identifier: Apache-2.0

#include "mbsplice/chronos.hpp"

#include <cmath>

#include "mbsplice/handshake.hpp"

namespace mbsplice {

BpdnProblem BpdnProblem::build(const std::vector<Complex>& q,
                               const BandPlan& plan, int g_prime, double eps) {
  if (eps < 0.0) throw std::invalid_argument("BpdnProblem: eps must be >= 0");
  const int bands = plan.num_bands;
  if (static_cast<int>(q.size()) != bands)
    throw std::invalid_argument("BpdnProblem: band count mismatch");
  if (g_prime == 0) g_prime = 32 * bands;
  if (g_prime < bands)
    throw std::invalid_argument("BpdnProblem: grid must be overcomplete");

  BpdnProblem p;
  p.q = Eigen::Map<const CVec>(q.data(), bands);
  p.eps = eps;
  p.grid_size = g_prime;
  p.f_s = plan.subcarrier_spacing;
  p.fourier.resize(bands, g_prime);
  const double scale = 1.0 / std::sqrt(static_cast<double>(bands));
  for (int i = 0; i < g_prime; ++i) {
    double tau = p.grid_delay(i);
    for (int m = 0; m < bands; ++m)
      p.fourier(m, i) = scale * cis_cycles_prod(-plan.freq(m, 0), tau);
  }
  return p;
}

namespace {

inline Complex soft_threshold(Complex w, double kappa) {
  double mag = std::abs(w);
  if (mag <= kappa) return {0.0, 0.0};
  return w * ((mag - kappa) / mag);
}

}  // namespace

BpdnResult solve_bpdn(const BpdnProblem& problem, const BpdnOptions& options) {
  const CMat& f = problem.fourier;
  const CVec& q = problem.q;
  const double eps = problem.eps;
  const int m_rows = static_cast<int>(f.rows());
  const int g = static_cast<int>(f.cols());

  BpdnResult result;
  if (q.norm() <= eps) {  // zero is feasible, and no l1 value beats it
    result.x = CVec::Zero(g);
    result.converged = true;
    result.constraint_residual = q.norm();
    return result;
  }

  // Splitting: minimize ||z||_1 + I_{||q - w|| <= eps}(w) over z = x, w = F x.
  // The x-step solves (I + F^H F) x = (z - u) + F^H (w - v) via Woodbury on
  // the M x M factor (I + F F^H).
  Eigen::LLT<CMat> gram_llt(CMat::Identity(m_rows, m_rows) + f * f.adjoint());

  double rho = options.rho;
  CVec x = CVec::Zero(g), z = CVec::Zero(g), u = CVec::Zero(g);
  CVec w = CVec::Zero(m_rows), v = CVec::Zero(m_rows);
  CVec z_prev = z, w_prev = w, fx = CVec::Zero(m_rows);

  const double abs_tol = 1e-14;
  int it = 0;
  for (it = 1; it <= options.max_iters; ++it) {
    CVec b = (z - u) + f.adjoint() * (w - v);
    x = b - f.adjoint() * gram_llt.solve(f * b);
    fx.noalias() = f * x;

    z = (x + u).unaryExpr([kappa = 1.0 / rho](Complex c) {
      return soft_threshold(c, kappa);
    });
    CVec d = fx + v - q;
    double d_norm = d.norm();
    w = q + (d_norm <= eps || d_norm == 0.0 ? d : CVec(d * (eps / d_norm)));

    u += x - z;
    v += fx - w;

    double pri = std::sqrt((x - z).squaredNorm() + (fx - w).squaredNorm());
    double dua = rho * std::sqrt((z - z_prev).squaredNorm() +
                                 (f.adjoint() * (w - w_prev)).squaredNorm());
    z_prev = z;
    w_prev = w;

    double pri_scale = std::max({x.norm(), z.norm(), w.norm(), abs_tol});
    double dua_scale =
        std::max(rho * std::sqrt(u.squaredNorm() + (f.adjoint() * v).squaredNorm()),
                 abs_tol);
    if (pri <= abs_tol + options.rel_tol * pri_scale &&
        dua <= abs_tol + options.rel_tol * dua_scale) {
      result.converged = true;
      break;
    }
    if (it % 100 == 0) {
      double pri_rel = pri / pri_scale;
      double dua_rel = dua / dua_scale;
      if (pri_rel > 10.0 * dua_rel && rho < 1e6) {
        rho *= 2.0;
        u *= 0.5;
        v *= 0.5;
      } else if (dua_rel > 10.0 * pri_rel && rho > 1e-6) {
        rho *= 0.5;
        u *= 2.0;
        v *= 2.0;
      }
    }
  }

  result.x = z;  // exact zeros off the support
  result.iterations = std::min(it, options.max_iters);
  result.constraint_residual = (q - f * z).norm();
  return result;
}

ChronosEstimate chronos_tof(const HandshakeSamples& hs, const BandPlan& plan,
                            int g_prime, double eps, double eta,
                            const BpdnOptions& options) {
  BpdnProblem problem = BpdnProblem::build(squared_cfr(hs), plan, g_prime, eps);
  BpdnResult solved = solve_bpdn(problem, options);

  ChronosEstimate est;
  est.solution = solved.x;
  double peak = solved.x.cwiseAbs().maxCoeff();
  if (peak <= 0.0) return est;  // all-zero solution, no time of flight

  for (int i = 0; i < solved.x.size(); ++i) {
    if (std::abs(solved.x(i)) >= eta * peak) {
      // First significant component sits at twice the time of flight.
      est.tof = 0.5 * problem.grid_delay(i);
      est.ok = true;
      break;
    }
  }
  return est;
}

}  // namespace mbsplice
