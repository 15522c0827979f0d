// SPDX-License-Identifier: Apache-2.0

#ifndef MBSPLICE_MODEL_HPP
#define MBSPLICE_MODEL_HPP

#include <optional>
#include <utility>

#include "mbsplice/rng.hpp"
#include "mbsplice/types.hpp"

namespace mbsplice {

/// Draw a K-tap channel: delays i.i.d. uniform on [0, tau_max] sorted
/// ascending, gain of the k-th (1-based) sorted tap complex Gaussian with
/// variance variance_base^-k, so longer paths carry less power.
Cir draw_cir(SplitRng& rng, int num_taps, double tau_max, double variance_base);

/// Per-band distortion draw: delta uniform on [0, delta_max] seconds,
/// phi uniform on [0, 1) cycles, independent across bands.
DistortionParams draw_distortion(SplitRng& rng, const BandPlan& plan,
                                 double delta_max);

/// Channel frequency response sampled on the plan's subcarriers:
/// H[m,n] = sum_k c_k exp(-j 2 pi f_{m,n} tau_k).
CsiMatrix synth_cfr(const Cir& cir, const BandPlan& plan);

/// Distorted pilot observations
///   y[m,n] = exp(j psi[m,n]) H[m,n] + z[m,n],
///   psi[m,n] = -2 pi (delta_m n f_s + phi_m),
/// with z i.i.d. CN(0, 1/snr) when a noise model is given.
CsiMatrix apply_distortion(const CsiMatrix& ideal,
                           const DistortionParams& distortion,
                           const BandPlan& plan,
                           const std::optional<NoiseModel>& noise,
                           SplitRng& rng);

/// Zero-subcarrier pilots exchanged in both directions. The phase offset
/// enters with opposite signs at the two ends (the receiver side carries the
/// n = 0 value of psi), so the sample product cancels it:
///   y_tx[m] = exp(+j 2 pi phi_m) H[m,0] + z_tx,
///   y_rx[m] = exp(-j 2 pi phi_m) H[m,0] + z_rx.
HandshakeSamples synth_handshake(const Cir& cir, const BandPlan& plan,
                                 const DistortionParams& distortion,
                                 const std::optional<NoiseModel>& noise,
                                 SplitRng& rng);

/// The reparameterization that leaves the distorted pilots unchanged:
/// delays shift by -delta_bar, gains rotate by exp(j 2 pi phi_bar), timing
/// offsets absorb +delta_bar, and band m's phase offset absorbs
/// phi_bar + f_{m,0} * delta_bar (mod 1). The carrier-dependent term is what
/// makes the generated signal invariant band by band; a band-independent
/// phi update would leave a residual rotation exp(j 2 pi f_{m,0} delta_bar)
/// on band m.
std::pair<Cir, DistortionParams> shift_equivalent_params(
    const Cir& cir, const DistortionParams& distortion, const BandPlan& plan,
    double delta_bar, double phi_bar);

/// Equivalent circular-shift of a delay into [0, period).
double wrap_delay(double tau, double period);

}  // namespace mbsplice

#endif  // MBSPLICE_MODEL_HPP
