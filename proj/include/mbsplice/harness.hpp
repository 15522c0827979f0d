// SPDX-License-Identifier: Apache-2.0

#ifndef MBSPLICE_HARNESS_HPP
#define MBSPLICE_HARNESS_HPP

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "mbsplice/andenoise.hpp"
#include "mbsplice/chronos.hpp"
#include "mbsplice/handshake.hpp"
#include "mbsplice/splicer.hpp"
#include "mbsplice/types.hpp"

namespace mbsplice {

struct ExperimentConfig {
  int trials = 200;
  double snr_db = 20.0;
  bool noiseless = false;          // overrides snr for the noise draw only
  int k_taps = 3;
  double d_max_m = 100.0;
  double variance_base = 4.0;
  double delta_max_s = 960e-9;
  int num_bands = 16;
  int subcarriers = 65;
  double spacing = 312.5e3;
  int grid_size = 0;               // 0 -> 2*M*N
  int g_prime = 0;                 // 0 -> 32*M
  int tau_grid = 65536;
  int theta_grid = 64;
  uint64_t seed = 1;
  int threads = 0;                 // 0 -> hardware concurrency
  int sparsity_margin = 0;         // extra OMP columns beyond K
  double peak_eta = 0.1;
  DenoiseBandOptions denoise;

  BandPlan plan() const { return make_band_plan(num_bands, subcarriers, spacing); }
  double tau_max() const { return d_max_m / kSpeedOfLight; }
  double snr() const { return std::pow(10.0, snr_db / 10.0); }
};

struct TrialRecord {
  int trial = 0;
  double true_tof = 0.0;
  double prop_tof = 0.0;       // NaN when the stage failed
  double prop_err_m = 0.0;
  double chronos_tof = 0.0;
  double chronos_err_m = 0.0;
  bool prop_ok = false;
  bool chronos_ok = false;
  std::vector<int> k_hat;
  std::vector<std::string> flags;

  std::string flags_string() const;  // ';'-joined, empty when clean
};

/// Immutable per-config state shared across trials.
struct TrialContext {
  BandPlan plan;
  Dictionary dictionary;
  AmbiguityGrid grid;

  static TrialContext build(const ExperimentConfig& config);
};

/// One full pipeline execution, deterministic given (config, trial_index):
/// channel/distortion/noise draws, per-band cleaning, splice + OMP,
/// handshake resolution and ranging error, plus the baseline on the same
/// handshake samples. Stage failures set flags instead of throwing.
TrialRecord run_trial(const ExperimentConfig& config, uint64_t trial_index,
                      const TrialContext* context = nullptr);

struct MethodSummary {
  std::string name;
  int usable = 0;
  int failed = 0;
  // Nearest-rank percentiles over usable trials; NaN when undefined.
  double p50 = 0.0, p90 = 0.0, p95 = 0.0;
  // Same with failed trials counted as infinite error.
  double p50_incl = 0.0, p90_incl = 0.0, p95_incl = 0.0;
};

struct ExperimentResult {
  std::vector<TrialRecord> records;
  MethodSummary proposed;
  MethodSummary chronos;
  int exit_code = 0;  // nonzero when a method produced no usable trials
};

/// Run all trials (in parallel when configured), then write results.csv,
/// cdf_proposed.csv, cdf_chronos.csv and summary.txt under out_dir (skipped
/// when out_dir is empty). Trials are merged by index, so the outputs are
/// byte-identical for a given (config, seed) regardless of thread count.
ExperimentResult run_experiment(const ExperimentConfig& config,
                                const std::string& out_dir);

/// Nearest-rank percentile of sorted ascending values: the ceil(p/100 * n)-th
/// smallest. NaN on empty input.
double nearest_rank_percentile(const std::vector<double>& sorted_values,
                               double percentile);

}  // namespace mbsplice

#endif  // MBSPLICE_HARNESS_HPP
