// SPDX-License-Identifier: Apache-2.0
//
// mbsplice -- high-resolution channel impulse response estimation from
// multi-band WiFi channel state information.

#ifndef MBSPLICE_TYPES_HPP
#define MBSPLICE_TYPES_HPP

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <vector>

namespace mbsplice {

using Complex = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;

/// Speed of light in m/s, used to convert delays to distances.
inline constexpr double kSpeedOfLight = 2.99792458e8;

/// exp(j*2*pi*x) with x in cycles, reduced modulo one cycle in extended
/// precision before evaluation. Exact at quarter turns.
Complex cis_cycles(double x);

/// exp(j*2*pi*(a*b + c)). Phases of the form f*tau reach tens of thousands
/// of cycles at RF carriers, so the product is formed and reduced in
/// extended precision; rounding a*b in double first would already cost
/// ~1e-11 rad.
Complex cis_cycles_prod(double a, double b, double c = 0.0);

/// exp(j*theta) with theta in radians.
Complex cis_rad(double theta);

/// Reduce x into [0, 1).
double wrap_cycles(double x);

/// Frequency geometry of the measurement: M bands of N equispaced
/// subcarriers each. Subcarrier n of band m sits at carriers[m] + n*spacing
/// with n in {-(N-1)/2, ..., (N-1)/2}.
struct BandPlan {
  int num_bands = 0;
  int subcarriers_per_band = 0;
  double subcarrier_spacing = 0.0;      // f_s in Hz
  std::vector<double> carriers;         // band center frequencies, Hz

  int half_span() const { return (subcarriers_per_band - 1) / 2; }

  /// Absolute frequency of subcarrier n (signed index) in band m (0-based).
  double freq(int band, int n) const {
    return carriers[static_cast<size_t>(band)] + n * subcarrier_spacing;
  }

  /// One period of the delay domain, 1/f_s.
  double unambiguous_delay() const { return 1.0 / subcarrier_spacing; }

  double band_width() const {
    return (subcarriers_per_band - 1) * subcarrier_spacing;
  }

  /// Throws std::invalid_argument when N is even, carriers are not strictly
  /// increasing, or adjacent bands overlap.
  void validate() const;
};

/// The 16-band/65-subcarrier plan used throughout: 8 bands near 2 GHz and
/// 8 near 5 GHz, 20 MHz wide at f_s = 312.5 kHz. Band centers are placed on
/// a half-f_s lattice with irregular (Sidon-like) offsets from the nominal
/// 20 MHz raster; see make_band_plan for why.
BandPlan default_band_plan();

/// General two-group plan for M bands of N subcarriers. Carrier offsets are
/// deliberately not on a common coarse raster: with centers at exact
/// multiples of 10 MHz, the squared zero-carrier responses e^{-j4pi f_m tau}
/// are identical for any two delays 25 ns apart, which makes the handshake
/// time-of-flight search ill-posed. Offsetting the centers by distinct small
/// multiples of f_s/2 removes every such exact ambiguity inside [0, 1/f_s).
BandPlan make_band_plan(int num_bands, int subcarriers, double spacing);

/// Plan with centers exactly on the contiguous 20-MHz raster. Kept for
/// comparison; the resulting carrier set aliases in the handshake search.
BandPlan raster_band_plan(int num_bands, int subcarriers, double spacing);

/// One multipath component: propagation delay in seconds and complex gain.
struct Tap {
  double delay = 0.0;
  Complex gain{0.0, 0.0};
};

/// Sparse delay-domain channel. Taps are sorted by increasing delay; the
/// first tap's delay is the time of flight.
struct Cir {
  std::vector<Tap> taps;

  int sparsity() const { return static_cast<int>(taps.size()); }
  double tof() const { return taps.front().delay; }
  double first_gain_phase() const { return std::arg(taps.front().gain); }

  /// Throws when empty or delays are not strictly increasing.
  void validate() const;
};

/// Per-band phase-distortion parameters: timing offset delta (seconds) and
/// carrier phase offset phi (cycles in [0, 1)).
struct DistortionParams {
  std::vector<double> delta;
  std::vector<double> phi;

  int num_bands() const { return static_cast<int>(delta.size()); }
};

enum class CsiKind { ideal, distorted, cleaned };

/// M x N matrix of complex pilot observations. Row m holds band m; column j
/// holds subcarrier n = j - (N-1)/2.
struct CsiMatrix {
  CMat values;
  CsiKind kind = CsiKind::ideal;

  int num_bands() const { return static_cast<int>(values.rows()); }
  int subcarriers_per_band() const { return static_cast<int>(values.cols()); }
  int col_of(int n) const { return n + (subcarriers_per_band() - 1) / 2; }
};

/// Zero-subcarrier pilot observations collected at both ends of the link,
/// one tx/rx pair per band.
struct HandshakeSamples {
  std::vector<Complex> tx;
  std::vector<Complex> rx;

  int num_bands() const { return static_cast<int>(tx.size()); }
};

/// Additive circularly-symmetric complex Gaussian noise of variance 1/snr
/// per sample.
struct NoiseModel {
  double snr = 1.0;  // linear power ratio, > 0

  static NoiseModel from_db(double snr_db);
};

const char* to_string(CsiKind kind);
CsiKind csi_kind_from_string(const std::string& s);

}  // namespace mbsplice

#endif  // MBSPLICE_TYPES_HPP
