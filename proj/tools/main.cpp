// SPDX-License-Identifier: Apache-2.0
//
// mbsplice command line: simulate multi-band CSI scenarios, run the
// splicing estimator or the baseline on CSV inputs, and drive Monte-Carlo
// evaluations.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include "mbsplice/cleaner.hpp"
#include "mbsplice/csv.hpp"
#include "mbsplice/harness.hpp"
#include "mbsplice/model.hpp"

using namespace mbsplice;

namespace {

// Flat key=value config file; keys are the long flag names without dashes.
std::map<std::string, std::string> load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line is not key=value: " + line);
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

void apply_config_file(ExperimentConfig& config,
                       const std::map<std::string, std::string>& kv) {
  auto get_d = [&](const char* key, double& out) {
    auto it = kv.find(key);
    if (it != kv.end()) out = std::stod(it->second);
  };
  auto get_i = [&](const char* key, int& out) {
    auto it = kv.find(key);
    if (it != kv.end()) out = std::stoi(it->second);
  };
  get_i("trials", config.trials);
  get_d("snr-db", config.snr_db);
  get_i("k", config.k_taps);
  get_d("d-max", config.d_max_m);
  get_d("variance-base", config.variance_base);
  double delta_ns = config.delta_max_s * 1e9;
  get_d("delta-max-ns", delta_ns);
  config.delta_max_s = delta_ns * 1e-9;
  get_i("bands", config.num_bands);
  get_i("subcarriers", config.subcarriers);
  get_d("spacing", config.spacing);
  get_i("grid", config.grid_size);
  get_i("gprime", config.g_prime);
  get_i("tau-grid", config.tau_grid);
  get_i("theta-grid", config.theta_grid);
  get_i("threads", config.threads);
  get_i("sparsity-margin", config.sparsity_margin);
  get_d("eta", config.peak_eta);
  auto it = kv.find("seed");
  if (it != kv.end()) config.seed = std::stoull(it->second);
  it = kv.find("noiseless");
  if (it != kv.end()) config.noiseless = (it->second == "1" || it->second == "true");
}

// Pre-scan for --config so file values load before flag overrides.
void preload_config(int argc, char** argv, ExperimentConfig& config) {
  for (int i = 1; i < argc; ++i) {
    std::string arg = argv[i];
    if (arg.rfind("--config=", 0) == 0)
      apply_config_file(config, load_config_file(arg.substr(9)));
    else if (arg == "--config" && i + 1 < argc)
      apply_config_file(config, load_config_file(argv[i + 1]));
  }
}

void add_shared_flags(CLI::App* cmd, ExperimentConfig& config,
                      std::string& config_path) {
  cmd->add_option("--config", config_path, "flat key=value config file");
  cmd->add_option("--snr-db", config.snr_db, "SNR in dB");
  cmd->add_flag("--noiseless", config.noiseless, "disable the noise draw");
  cmd->add_option("--seed", config.seed, "master seed");
  cmd->add_option("--bands", config.num_bands, "number of bands M");
  cmd->add_option("--subcarriers", config.subcarriers, "subcarriers per band N (odd)");
  cmd->add_option("--spacing", config.spacing, "subcarrier spacing in Hz");
  cmd->add_option("--k", config.k_taps, "channel sparsity K");
  cmd->add_option("--d-max", config.d_max_m, "maximum path distance in meters");
  cmd->add_option("--variance-base", config.variance_base,
                  "per-tap gain variance decay base");
  auto* delta = cmd->add_option_function<double>(
      "--delta-max-ns",
      [&config](double v) { config.delta_max_s = v * 1e-9; },
      "max timing distortion in ns");
  delta->default_str("960");
  cmd->add_option("--grid", config.grid_size, "splicing grid size G (0: 2MN)");
  cmd->add_option("--gprime", config.g_prime, "baseline grid size G' (0: 32M)");
  cmd->add_option("--tau-grid", config.tau_grid, "handshake tau grid points");
  cmd->add_option("--theta-grid", config.theta_grid, "handshake theta grid points");
  cmd->add_option("--sparsity-margin", config.sparsity_margin,
                  "extra OMP columns beyond K");
  cmd->add_option("--eta", config.peak_eta, "baseline peak threshold");
}

void write_meta(const std::string& path, const ExperimentConfig& config,
                double true_tof, double chronos_eps) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "seed=" << config.seed << "\n";
  out << "snr-db=" << g17(config.snr_db) << "\n";
  out << "noiseless=" << (config.noiseless ? 1 : 0) << "\n";
  out << "k=" << config.k_taps << "\n";
  out << "bands=" << config.num_bands << "\n";
  out << "subcarriers=" << config.subcarriers << "\n";
  out << "spacing=" << g17(config.spacing) << "\n";
  out << "true_tof_s=" << g17(true_tof) << "\n";
  out << "chronos_eps=" << g17(chronos_eps) << "\n";
}

int cmd_simulate(const ExperimentConfig& config, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  BandPlan plan = config.plan();
  SplitRng trial_rng = SplitRng(config.seed).split(0);
  SplitRng rng_channel = trial_rng.split(1);
  SplitRng rng_dist = trial_rng.split(2);
  SplitRng rng_csi = trial_rng.split(3);
  SplitRng rng_hs = trial_rng.split(4);

  std::optional<NoiseModel> noise;
  if (!config.noiseless) noise = NoiseModel{config.snr()};
  Cir cir = draw_cir(rng_channel, config.k_taps, config.tau_max(),
                     config.variance_base);
  DistortionParams dist = draw_distortion(rng_dist, plan, config.delta_max_s);
  CsiMatrix ideal = synth_cfr(cir, plan);
  CsiMatrix distorted = apply_distortion(ideal, dist, plan, noise, rng_csi);
  HandshakeSamples hs = synth_handshake(cir, plan, dist, noise, rng_hs);

  std::vector<Complex> q = squared_cfr(hs);
  double eps = 0.0;
  for (int m = 0; m < plan.num_bands; ++m) {
    Complex h0 = ideal.values(m, ideal.col_of(0));
    eps += std::norm(q[(size_t)m] - h0 * h0);
  }
  eps = std::sqrt(eps);

  write_csi(out_dir + "/csi.csv", distorted);
  write_handshake(out_dir + "/handshake.csv", hs);
  write_cir(out_dir + "/cir_true.csv", cir);
  write_meta(out_dir + "/meta.txt", config, cir.tof(), eps);
  std::printf("scenario written to %s (true_tof_s=%s chronos_eps=%s)\n",
              out_dir.c_str(), g17(cir.tof()).c_str(), g17(eps).c_str());
  return 0;
}

int cmd_estimate(const ExperimentConfig& config, const std::string& csi_path,
                 const std::string& hs_path, const std::string& out_dir,
                 const std::string& dump_dual, const std::string& dump_cost) {
  CsiMatrix csi = read_csi(csi_path);
  HandshakeSamples hs = read_handshake(hs_path);
  BandPlan plan = make_band_plan(csi.num_bands(), csi.subcarriers_per_band(),
                                 config.spacing);
  if (hs.num_bands() != plan.num_bands)
    throw std::runtime_error("handshake and CSI band counts differ");

  CleanedBandSet cleaned = clean_all(csi, config.snr(), plan, config.denoise);
  if (!dump_dual.empty()) {
    double lambda = lambda_for(plan.subcarriers_per_band, config.snr());
    for (int m = 0; m < plan.num_bands; ++m) {
      CVec y = csi.values.row(m).transpose();
      DenoiseResult den = an_denoise(y, lambda, config.denoise.admm);
      if (den.x_hat.norm() == 0.0) continue;
      CVec qd = (y - den.x_hat) / lambda;
      int points = config.denoise.grid_mult * plan.subcarriers_per_band;
      RVec mag = dual_polynomial_abs(qd, points);
      std::vector<std::vector<double>> rows;
      for (int i = 0; i < points; ++i)
        rows.push_back({plan.unambiguous_delay() * i / points, mag(i)});
      write_table(dump_dual + "_band" + std::to_string(m + 1) + ".csv",
                  "tau_s,abs_Q", rows);
    }
  }

  Spliced spliced = splice(cleaned);
  Dictionary dict = build_dictionary(plan, config.grid_size);
  int sparsity = config.k_taps + config.sparsity_margin;
  RelativeCirEstimate h0 = omp(spliced.y, dict, sparsity, spliced.active_rows);

  std::vector<Complex> q = squared_cfr(hs);
  AmbiguityGrid grid =
      AmbiguityGrid::for_plan(plan, config.tau_grid, config.theta_grid);
  ResolvedCir resolved = resolve(h0, q, plan, grid);
  if (!resolved.ok) {
    std::fprintf(stderr, "ambiguity resolution failed (degenerate estimate)\n");
    return 1;
  }
  if (!dump_cost.empty()) {
    auto rows = cost_surface(h0, q, plan, grid, 256);
    std::vector<std::vector<double>> table;
    for (const auto& r : rows) table.push_back({r[0], r[1], r[2]});
    write_table(dump_cost, "tau_s,theta_rad,cost", table);
  }

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    write_cir(out_dir + "/cir_est.csv", resolved.cir);
    std::vector<std::vector<double>> rows;
    for (const auto& [idx, coeff] : h0.entries)
      rows.push_back({(double)idx, h0.grid_delay(idx), coeff.real(),
                      coeff.imag()});
    write_table(out_dir + "/h0_est.csv", "grid_index,delay_s,gain_re,gain_im",
                rows);
  }
  std::printf("tof_s=%s theta_rad=%s (mod pi) cost=%s usable_bands=%d\n",
              g17(resolved.tof).c_str(), g17(resolved.theta).c_str(),
              g17(resolved.cost).c_str(), cleaned.usable_count());
  return 0;
}

int cmd_baseline(const ExperimentConfig& config, const std::string& hs_path,
                 double eps, const std::string& solution_path) {
  HandshakeSamples hs = read_handshake(hs_path);
  BandPlan plan =
      make_band_plan(hs.num_bands(), config.subcarriers, config.spacing);
  ChronosEstimate est =
      chronos_tof(hs, plan, config.g_prime, eps, config.peak_eta);
  if (!solution_path.empty()) {
    BpdnProblem p = BpdnProblem::build(squared_cfr(hs), plan, config.g_prime, eps);
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < est.solution.size(); ++i)
      rows.push_back({(double)i, p.grid_delay(i), est.solution(i).real(),
                      est.solution(i).imag()});
    write_table(solution_path, "grid_index,delay_s,gain_re,gain_im", rows);
  }
  if (!est.ok) {
    std::fprintf(stderr, "baseline failed (all-zero solution)\n");
    return 1;
  }
  std::printf("tof_s=%s\n", g17(est.tof).c_str());
  return 0;
}

int cmd_evaluate(const ExperimentConfig& config, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  ExperimentResult result = run_experiment(config, out_dir);
  auto show = [](const MethodSummary& s) {
    auto fmt = [](double v) {
      if (std::isnan(v)) return std::string("undefined");
      if (std::isinf(v)) return std::string("inf");
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.4g", v);
      return std::string(buf);
    };
    std::printf("%-8s usable=%d failed=%d p50=%sm p90=%sm p95=%sm\n",
                s.name.c_str(), s.usable, s.failed, fmt(s.p50).c_str(),
                fmt(s.p90).c_str(), fmt(s.p95).c_str());
  };
  show(result.proposed);
  show(result.chronos);
  std::printf("outputs in %s\n", out_dir.c_str());
  return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-band CSI splicing: channel and time-of-flight estimation"};
  app.require_subcommand(1);

  ExperimentConfig config;
  try {
    preload_config(argc, argv, config);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  std::string config_path, out_dir = "out";
  std::string csi_path, hs_path, dump_dual, dump_cost, solution_path;
  double eps = 0.0;

  CLI::App* simulate = app.add_subcommand(
      "simulate", "generate one scenario's CSI/handshake/channel CSVs");
  add_shared_flags(simulate, config, config_path);
  simulate->add_option("--out", out_dir, "output directory");

  CLI::App* estimate = app.add_subcommand(
      "estimate", "run the splicing estimator on CSV inputs");
  add_shared_flags(estimate, config, config_path);
  estimate->add_option("--csi", csi_path, "distorted CSI CSV")->required();
  estimate->add_option("--handshake", hs_path, "handshake CSV")->required();
  estimate->add_option("--out", out_dir, "output directory");
  estimate->add_option("--dump-dual", dump_dual,
                       "prefix for per-band dual polynomial CSVs");
  estimate->add_option("--dump-cost", dump_cost,
                       "path for a decimated cost-surface CSV");

  CLI::App* baseline =
      app.add_subcommand("baseline", "run the squared-sample baseline");
  add_shared_flags(baseline, config, config_path);
  baseline->add_option("--handshake", hs_path, "handshake CSV")->required();
  baseline->add_option("--eps", eps, "noise-norm bound for the constraint")
      ->required();
  baseline->add_option("--out-solution", solution_path,
                       "write the sparse solution CSV here");

  CLI::App* evaluate =
      app.add_subcommand("evaluate", "Monte-Carlo comparison of both methods");
  add_shared_flags(evaluate, config, config_path);
  evaluate->add_option("--trials", config.trials, "number of trials");
  evaluate->add_option("--threads", config.threads, "worker threads (0: auto)");
  evaluate->add_option("--out", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return cmd_simulate(config, out_dir);
    if (estimate->parsed())
      return cmd_estimate(config, csi_path, hs_path, out_dir, dump_dual,
                          dump_cost);
    if (baseline->parsed())
      return cmd_baseline(config, hs_path, eps, solution_path);
    if (evaluate->parsed()) return cmd_evaluate(config, out_dir);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
