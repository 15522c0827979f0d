// SPDX-License-Identifier: Apache-2.0

#include "mbsplice/model.hpp"

#include <algorithm>
#include <cmath>

namespace mbsplice {

double wrap_delay(double tau, double period) {
  double t = std::fmod(tau, period);
  if (t < 0.0) t += period;
  return t;
}

Cir draw_cir(SplitRng& rng, int num_taps, double tau_max, double variance_base) {
  if (num_taps < 1) throw std::invalid_argument("draw_cir: num_taps must be >= 1");
  if (tau_max < 0.0) throw std::invalid_argument("draw_cir: tau_max must be >= 0");
  if (variance_base <= 0.0)
    throw std::invalid_argument("draw_cir: variance_base must be > 0");

  std::vector<double> delays(static_cast<size_t>(num_taps));
  for (auto& d : delays) d = rng.uniform(0.0, tau_max);
  std::sort(delays.begin(), delays.end());

  Cir cir;
  cir.taps.resize(static_cast<size_t>(num_taps));
  for (int k = 0; k < num_taps; ++k) {
    double variance = std::pow(variance_base, -(k + 1));
    cir.taps[static_cast<size_t>(k)] = {delays[static_cast<size_t>(k)],
                                        rng.complex_gaussian(variance)};
  }
  return cir;
}

DistortionParams draw_distortion(SplitRng& rng, const BandPlan& plan,
                                 double delta_max) {
  DistortionParams d;
  d.delta.resize(static_cast<size_t>(plan.num_bands));
  d.phi.resize(static_cast<size_t>(plan.num_bands));
  for (int m = 0; m < plan.num_bands; ++m) {
    d.delta[static_cast<size_t>(m)] = rng.uniform(0.0, delta_max);
    d.phi[static_cast<size_t>(m)] = rng.uniform();
  }
  return d;
}

CsiMatrix synth_cfr(const Cir& cir, const BandPlan& plan) {
  cir.validate();
  CsiMatrix csi;
  csi.kind = CsiKind::ideal;
  csi.values.resize(plan.num_bands, plan.subcarriers_per_band);
  int half = plan.half_span();
  for (int m = 0; m < plan.num_bands; ++m) {
    for (int j = 0; j < plan.subcarriers_per_band; ++j) {
      double f = plan.freq(m, j - half);
      Complex h{0.0, 0.0};
      for (const Tap& tap : cir.taps) h += tap.gain * cis_cycles_prod(-f, tap.delay);
      csi.values(m, j) = h;
    }
  }
  return csi;
}

CsiMatrix apply_distortion(const CsiMatrix& ideal,
                           const DistortionParams& distortion,
                           const BandPlan& plan,
                           const std::optional<NoiseModel>& noise,
                           SplitRng& rng) {
  if (ideal.num_bands() != plan.num_bands ||
      ideal.subcarriers_per_band() != plan.subcarriers_per_band ||
      distortion.num_bands() != plan.num_bands)
    throw std::invalid_argument("apply_distortion: dimension mismatch");
  if (noise && noise->snr <= 0.0)
    throw std::invalid_argument("apply_distortion: snr must be > 0");

  CsiMatrix out;
  out.kind = CsiKind::distorted;
  out.values.resize(plan.num_bands, plan.subcarriers_per_band);
  int half = plan.half_span();
  for (int m = 0; m < plan.num_bands; ++m) {
    double delta = distortion.delta[static_cast<size_t>(m)];
    double phi = distortion.phi[static_cast<size_t>(m)];
    for (int j = 0; j < plan.subcarriers_per_band; ++j) {
      int n = j - half;
      // psi[m,n] = -2 pi (delta_m n f_s + phi_m), in cycles here.
      Complex rot = cis_cycles_prod(-delta, n * plan.subcarrier_spacing, -phi);
      Complex z = noise ? rng.complex_gaussian(1.0 / noise->snr) : Complex{0.0, 0.0};
      out.values(m, j) = rot * ideal.values(m, j) + z;
    }
  }
  return out;
}

HandshakeSamples synth_handshake(const Cir& cir, const BandPlan& plan,
                                 const DistortionParams& distortion,
                                 const std::optional<NoiseModel>& noise,
                                 SplitRng& rng) {
  if (distortion.num_bands() != plan.num_bands)
    throw std::invalid_argument("synth_handshake: dimension mismatch");
  HandshakeSamples hs;
  hs.tx.resize(static_cast<size_t>(plan.num_bands));
  hs.rx.resize(static_cast<size_t>(plan.num_bands));
  for (int m = 0; m < plan.num_bands; ++m) {
    double f0 = plan.freq(m, 0);
    Complex h{0.0, 0.0};
    for (const Tap& tap : cir.taps) h += tap.gain * cis_cycles_prod(-f0, tap.delay);
    double phi = distortion.phi[static_cast<size_t>(m)];
    Complex ztx = noise ? rng.complex_gaussian(1.0 / noise->snr) : Complex{0.0, 0.0};
    Complex zrx = noise ? rng.complex_gaussian(1.0 / noise->snr) : Complex{0.0, 0.0};
    hs.tx[static_cast<size_t>(m)] = cis_cycles(phi) * h + ztx;
    hs.rx[static_cast<size_t>(m)] = cis_cycles(-phi) * h + zrx;
  }
  return hs;
}

std::pair<Cir, DistortionParams> shift_equivalent_params(
    const Cir& cir, const DistortionParams& distortion, const BandPlan& plan,
    double delta_bar, double phi_bar) {
  if (distortion.num_bands() != plan.num_bands)
    throw std::invalid_argument("shift_equivalent_params: dimension mismatch");

  Cir shifted;
  shifted.taps.reserve(cir.taps.size());
  Complex rot = cis_cycles(phi_bar);
  for (const Tap& tap : cir.taps) {
    double d = tap.delay - delta_bar;
    if (d < 0.0 || d >= plan.unambiguous_delay())
      throw std::invalid_argument(
          "shift_equivalent_params: shifted delay leaves [0, 1/f_s)");
    shifted.taps.push_back({d, tap.gain * rot});
  }

  DistortionParams out;
  out.delta.resize(static_cast<size_t>(plan.num_bands));
  out.phi.resize(static_cast<size_t>(plan.num_bands));
  for (int m = 0; m < plan.num_bands; ++m) {
    out.delta[static_cast<size_t>(m)] =
        distortion.delta[static_cast<size_t>(m)] + delta_bar;
    // The band-m phase absorbs f_{m,0} * delta_bar on top of phi_bar; without
    // it the regenerated pilots pick up exp(j 2 pi f_{m,0} delta_bar).
    out.phi[static_cast<size_t>(m)] = wrap_cycles(
        distortion.phi[static_cast<size_t>(m)] + phi_bar +
        plan.freq(m, 0) * delta_bar);
  }
  return {std::move(shifted), out};
}

}  // namespace mbsplice
