// SPDX-License-Identifier: Apache-2.0

#ifndef MBSPLICE_CLEANER_HPP
#define MBSPLICE_CLEANER_HPP

#include <utility>
#include <vector>

#include "mbsplice/andenoise.hpp"
#include "mbsplice/types.hpp"

namespace mbsplice {

/// Per-band distortion estimates plus the counter-rotated CSI. Rows of
/// bands whose denoising found no support are zeroed and marked unusable;
/// downstream splicing drops them.
struct CleanedBandSet {
  CsiMatrix csi;                       // kind == cleaned
  DistortionParams estimated;          // delta_hat (s), phi_hat (cycles)
  std::vector<int> k_hat;              // per-band recovered sparsity
  std::vector<bool> usable;
  std::vector<BandEstimate> band_estimates;

  int usable_count() const;
};

/// Distortion parameters from a band estimate: the timing offset is the
/// smallest recovered delay, the phase offset is minus the phase of that
/// delay's coefficient in cycles, reduced into [0, 1). Under the convention
/// that the channel is the relative one (first tap at delay zero with a
/// zero-phase gain), these are estimates of (delta_m, phi_m); against a
/// general channel they absorb the first tap's delay and phase, which is
/// exactly what re-references the cleaned samples to the relative channel.
/// Throws std::invalid_argument on an empty estimate.
std::pair<double, double> estimate_band_distortion(const BandEstimate& est);

/// Counter-rotation y[n] * exp(j 2 pi (delta_hat n f_s + phi_hat)).
CVec clean_band(const CVec& y, double delta_hat, double phi_hat, double f_s);

/// Denoise every band, estimate its distortion, and clean it.
CleanedBandSet clean_all(const CsiMatrix& distorted, double snr,
                         const BandPlan& plan,
                         const DenoiseBandOptions& options = {});

}  // namespace mbsplice

#endif  // MBSPLICE_CLEANER_HPP
