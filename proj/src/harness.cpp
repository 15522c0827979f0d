// SPDX-License-Identifier: Apache-2.0

#include "mbsplice/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <limits>
#include <thread>

#include "mbsplice/cleaner.hpp"
#include "mbsplice/csv.hpp"
#include "mbsplice/model.hpp"

namespace mbsplice {

namespace {

// Substream ids; draws in one stream never shift another.
enum StreamId : uint64_t {
  kStreamChannel = 1,
  kStreamDistortion = 2,
  kStreamCsiNoise = 3,
  kStreamHandshakeNoise = 4,
};

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

std::string TrialRecord::flags_string() const {
  std::string out;
  for (size_t i = 0; i < flags.size(); ++i) {
    if (i) out += ';';
    out += flags[i];
  }
  return out;
}

TrialContext TrialContext::build(const ExperimentConfig& config) {
  BandPlan plan = config.plan();
  TrialContext ctx{plan, build_dictionary(plan, config.grid_size),
                   AmbiguityGrid::for_plan(plan, config.tau_grid,
                                           config.theta_grid)};
  return ctx;
}

TrialRecord run_trial(const ExperimentConfig& config, uint64_t trial_index,
                      const TrialContext* context) {
  TrialContext local;
  if (!context) {
    local = TrialContext::build(config);
    context = &local;
  }
  const BandPlan& plan = context->plan;

  TrialRecord rec;
  rec.trial = static_cast<int>(trial_index);
  rec.prop_tof = kNaN;
  rec.prop_err_m = kNaN;
  rec.chronos_tof = kNaN;
  rec.chronos_err_m = kNaN;

  SplitRng trial_rng = SplitRng(config.seed).split(trial_index);
  SplitRng rng_channel = trial_rng.split(kStreamChannel);
  SplitRng rng_dist = trial_rng.split(kStreamDistortion);
  SplitRng rng_csi = trial_rng.split(kStreamCsiNoise);
  SplitRng rng_hs = trial_rng.split(kStreamHandshakeNoise);

  std::optional<NoiseModel> noise;
  if (!config.noiseless) noise = NoiseModel{config.snr()};

  Cir cir = draw_cir(rng_channel, config.k_taps, config.tau_max(),
                     config.variance_base);
  DistortionParams distortion = draw_distortion(rng_dist, plan, config.delta_max_s);
  CsiMatrix ideal = synth_cfr(cir, plan);
  CsiMatrix distorted = apply_distortion(ideal, distortion, plan, noise, rng_csi);
  HandshakeSamples hs = synth_handshake(cir, plan, distortion, noise, rng_hs);
  rec.true_tof = cir.tof();

  // Proposed pipeline. Failures downgrade to flags; the trial still counts.
  CleanedBandSet cleaned = clean_all(distorted, config.snr(), plan, config.denoise);
  rec.k_hat = cleaned.k_hat;
  for (int m = 0; m < plan.num_bands; ++m)
    if (!cleaned.usable[static_cast<size_t>(m)])
      rec.flags.push_back("b" + std::to_string(m + 1) + "_empty");

  std::vector<Complex> q = squared_cfr(hs);
  if (cleaned.usable_count() == 0) {
    rec.flags.push_back("prop_fail:no_usable_bands");
  } else {
    Spliced spliced = splice(cleaned);
    int sparsity = config.k_taps + config.sparsity_margin;
    RelativeCirEstimate h0 =
        omp(spliced.y, context->dictionary, sparsity, spliced.active_rows);
    ResolvedCir resolved = resolve(h0, q, plan, context->grid);
    if (!resolved.ok) {
      rec.flags.push_back("prop_fail:resolve_degenerate");
    } else {
      rec.prop_tof = resolved.tof;
      rec.prop_err_m = ranging_error(rec.true_tof, resolved.tof);
      rec.prop_ok = true;
    }
  }

  // Baseline on the same handshake samples, with the noise-vector norm the
  // method assumes given: eps = ||q - H[.,0]^2|| from the ground truth.
  double eps = 0.0;
  for (int m = 0; m < plan.num_bands; ++m) {
    Complex h0_true = ideal.values(m, ideal.col_of(0));
    eps += std::norm(q[static_cast<size_t>(m)] - h0_true * h0_true);
  }
  eps = std::sqrt(eps);
  ChronosEstimate baseline =
      chronos_tof(hs, plan, config.g_prime, eps, config.peak_eta);
  if (baseline.ok) {
    rec.chronos_tof = baseline.tof;
    rec.chronos_err_m = ranging_error(rec.true_tof, baseline.tof);
    rec.chronos_ok = true;
  } else {
    rec.flags.push_back("chronos_fail:zero_solution");
  }
  return rec;
}

double nearest_rank_percentile(const std::vector<double>& sorted_values,
                               double percentile) {
  if (sorted_values.empty()) return kNaN;
  double n = static_cast<double>(sorted_values.size());
  auto rank = static_cast<size_t>(std::ceil(percentile / 100.0 * n));
  if (rank < 1) rank = 1;
  if (rank > sorted_values.size()) rank = sorted_values.size();
  return sorted_values[rank - 1];
}

namespace {

MethodSummary summarize(const std::string& name,
                        const std::vector<TrialRecord>& records,
                        bool proposed) {
  MethodSummary s;
  s.name = name;
  std::vector<double> errors;
  std::vector<double> inclusive;
  for (const TrialRecord& r : records) {
    bool ok = proposed ? r.prop_ok : r.chronos_ok;
    double err = proposed ? r.prop_err_m : r.chronos_err_m;
    if (ok) {
      errors.push_back(err);
      inclusive.push_back(err);
    } else {
      inclusive.push_back(std::numeric_limits<double>::infinity());
      ++s.failed;
    }
  }
  s.usable = static_cast<int>(errors.size());
  std::sort(errors.begin(), errors.end());
  std::sort(inclusive.begin(), inclusive.end());
  s.p50 = nearest_rank_percentile(errors, 50.0);
  s.p90 = nearest_rank_percentile(errors, 90.0);
  s.p95 = nearest_rank_percentile(errors, 95.0);
  s.p50_incl = nearest_rank_percentile(inclusive, 50.0);
  s.p90_incl = nearest_rank_percentile(inclusive, 90.0);
  s.p95_incl = nearest_rank_percentile(inclusive, 95.0);
  return s;
}

void write_results_csv(const std::string& path,
                       const std::vector<TrialRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "trial,true_tof_s,prop_tof_s,prop_err_m,chronos_tof_s,chronos_err_m,flags\n";
  for (const TrialRecord& r : records)
    out << r.trial << ',' << g17(r.true_tof) << ',' << g17(r.prop_tof) << ','
        << g17(r.prop_err_m) << ',' << g17(r.chronos_tof) << ','
        << g17(r.chronos_err_m) << ',' << r.flags_string() << "\n";
}

void write_cdf_csv(const std::string& path,
                   const std::vector<TrialRecord>& records, bool proposed) {
  std::vector<double> errors;
  for (const TrialRecord& r : records)
    if (proposed ? r.prop_ok : r.chronos_ok)
      errors.push_back(proposed ? r.prop_err_m : r.chronos_err_m);
  std::sort(errors.begin(), errors.end());
  std::vector<std::vector<double>> rows;
  rows.reserve(errors.size());
  for (size_t i = 0; i < errors.size(); ++i)
    rows.push_back({errors[i], static_cast<double>(i + 1) /
                                   static_cast<double>(errors.size())});
  write_table(path, "error_m,cdf", rows);
}

std::string summary_line(const MethodSummary& s) {
  auto fmt = [](double v) {
    if (std::isnan(v)) return std::string("undefined");
    if (std::isinf(v)) return std::string("inf");
    return g17(v);
  };
  return s.name + "," + std::to_string(s.usable) + "," + std::to_string(s.failed) +
         "," + fmt(s.p50) + "," + fmt(s.p90) + "," + fmt(s.p95) + "," +
         fmt(s.p50_incl) + "," + fmt(s.p90_incl) + "," + fmt(s.p95_incl);
}

void write_summary(const std::string& path, const ExperimentConfig& config,
                   const ExperimentResult& result) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  char stamp[64] = "unknown";
  std::time_t now = std::time(nullptr);
  std::tm tm_utc{};
  if (gmtime_r(&now, &tm_utc))
    std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  out << "# generated: " << stamp << "\n";
  out << "# trials=" << config.trials << " seed=" << config.seed
      << " snr_db=" << config.snr_db << " k=" << config.k_taps
      << " bands=" << config.num_bands << " subcarriers=" << config.subcarriers
      << "\n";
  out << "method,usable,failed,p50_m,p90_m,p95_m,p50_incl_m,p90_incl_m,p95_incl_m\n";
  out << summary_line(result.proposed) << "\n";
  out << summary_line(result.chronos) << "\n";
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config,
                                const std::string& out_dir) {
  if (config.trials < 1)
    throw std::invalid_argument("run_experiment: trials must be >= 1");

  TrialContext context = TrialContext::build(config);
  ExperimentResult result;
  result.records.resize(static_cast<size_t>(config.trials));

  int threads = config.threads > 0
                    ? config.threads
                    : static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  threads = std::min(threads, config.trials);

  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      int trial = next.fetch_add(1);
      if (trial >= config.trials) return;
      TrialRecord rec =
          run_trial(config, static_cast<uint64_t>(trial), &context);
      std::fprintf(stderr, "trial %d/%d prop_err_m=%s chronos_err_m=%s %s\n",
                   trial + 1, config.trials,
                   rec.prop_ok ? g17(rec.prop_err_m).c_str() : "fail",
                   rec.chronos_ok ? g17(rec.chronos_err_m).c_str() : "fail",
                   rec.flags_string().c_str());
      result.records[static_cast<size_t>(trial)] = std::move(rec);
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(threads));
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  result.proposed = summarize("proposed", result.records, true);
  result.chronos = summarize("chronos", result.records, false);
  if (result.proposed.usable == 0 || result.chronos.usable == 0)
    result.exit_code = 1;

  if (!out_dir.empty()) {
    write_results_csv(out_dir + "/results.csv", result.records);
    write_cdf_csv(out_dir + "/cdf_proposed.csv", result.records, true);
    write_cdf_csv(out_dir + "/cdf_chronos.csv", result.records, false);
    write_summary(out_dir + "/summary.txt", config, result);
  }
  return result;
}

}  // namespace mbsplice
