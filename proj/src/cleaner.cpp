// SPDX-License-Identifier: Apache-2.0

#include "mbsplice/cleaner.hpp"

#include <cmath>

namespace mbsplice {

int CleanedBandSet::usable_count() const {
  int count = 0;
  for (bool u : usable) count += u ? 1 : 0;
  return count;
}

std::pair<double, double> estimate_band_distortion(const BandEstimate& est) {
  if (est.k_hat() == 0)
    throw std::invalid_argument("estimate_band_distortion: empty band estimate");
  // Delays are sorted, so index 0 is the first path.
  double delta_hat = est.delays.front();
  double phi_hat = wrap_cycles(-std::arg(est.coeffs(0)) / (2.0 * M_PI));
  return {delta_hat, phi_hat};
}

CVec clean_band(const CVec& y, double delta_hat, double phi_hat, double f_s) {
  const int n = static_cast<int>(y.size());
  const int half = (n - 1) / 2;
  CVec out(n);
  for (int j = 0; j < n; ++j)
    out(j) = cis_cycles_prod(delta_hat, (j - half) * f_s, phi_hat) * y(j);
  return out;
}

CleanedBandSet clean_all(const CsiMatrix& distorted, double snr,
                         const BandPlan& plan,
                         const DenoiseBandOptions& options) {
  if (distorted.num_bands() != plan.num_bands ||
      distorted.subcarriers_per_band() != plan.subcarriers_per_band)
    throw std::invalid_argument("clean_all: dimension mismatch");

  CleanedBandSet set;
  set.csi.kind = CsiKind::cleaned;
  set.csi.values = CMat::Zero(plan.num_bands, plan.subcarriers_per_band);
  set.estimated.delta.assign(static_cast<size_t>(plan.num_bands), 0.0);
  set.estimated.phi.assign(static_cast<size_t>(plan.num_bands), 0.0);
  set.k_hat.assign(static_cast<size_t>(plan.num_bands), 0);
  set.usable.assign(static_cast<size_t>(plan.num_bands), false);
  set.band_estimates.resize(static_cast<size_t>(plan.num_bands));

  for (int m = 0; m < plan.num_bands; ++m) {
    CVec y = distorted.values.row(m).transpose();
    BandEstimate est = denoise_band(y, snr, plan, options);
    set.k_hat[static_cast<size_t>(m)] = est.k_hat();
    if (est.k_hat() == 0) {
      set.band_estimates[static_cast<size_t>(m)] = std::move(est);
      continue;  // band unusable, row stays zero
    }
    auto [delta_hat, phi_hat] = estimate_band_distortion(est);
    set.estimated.delta[static_cast<size_t>(m)] = delta_hat;
    set.estimated.phi[static_cast<size_t>(m)] = phi_hat;
    set.csi.values.row(m) =
        clean_band(y, delta_hat, phi_hat, plan.subcarrier_spacing).transpose();
    set.usable[static_cast<size_t>(m)] = true;
    set.band_estimates[static_cast<size_t>(m)] = std::move(est);
  }
  return set;
}

}  // namespace mbsplice
