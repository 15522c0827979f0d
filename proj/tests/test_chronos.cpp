// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <map>

#include "mbsplice/chronos.hpp"
#include "mbsplice/handshake.hpp"
#include "mbsplice/model.hpp"

using namespace mbsplice;

namespace {

const BandPlan kPlan = default_band_plan();

}  // namespace

TEST_CASE("solve_bpdn returns zero when zero is feasible") {
  std::vector<Complex> q((size_t)16, Complex{0.1, -0.05});
  BpdnProblem p = BpdnProblem::build(q, kPlan, 0, 10.0);  // eps > ||q||
  CHECK(p.grid_size == 512);
  BpdnResult r = solve_bpdn(p);
  CHECK(r.converged);
  CHECK(r.x.norm() == 0.0);
  CHECK_THROWS_AS(BpdnProblem::build(q, kPlan, 0, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(BpdnProblem::build(q, kPlan, 8, 0.0), std::invalid_argument);
}

TEST_CASE("solve_bpdn with eps=0 recovers a unit spike from its own column") {
  std::vector<Complex> q((size_t)16);
  BpdnProblem probe = BpdnProblem::build(q, kPlan, 0, 0.0);
  const int spike = 137;
  for (int m = 0; m < 16; ++m) q[(size_t)m] = probe.fourier(m, spike);
  BpdnProblem p = BpdnProblem::build(q, kPlan, 0, 0.0);
  BpdnResult r = solve_bpdn(p);
  REQUIRE(r.converged);
  CHECK(std::abs(r.x(spike) - Complex{1.0, 0.0}) <= 1e-6);
  CVec rest = r.x;
  rest(spike) = Complex{0.0, 0.0};
  CHECK(rest.cwiseAbs().maxCoeff() <= 1e-6);
  CHECK(r.constraint_residual <= 1e-8);
}

TEST_CASE("solve_bpdn objective matches the generic convex-solver fixtures") {
  std::ifstream in(std::string(MBSPLICE_FIXTURE_DIR) + "/bpdn_oracle.json");
  REQUIRE(in.good());
  nlohmann::json fixtures = nlohmann::json::parse(in);
  REQUIRE(fixtures.size() == 20);

  for (const auto& inst : fixtures) {
    const int m = inst["m"];
    BandPlan plan;
    plan.num_bands = m;
    plan.subcarriers_per_band = 65;
    plan.subcarrier_spacing = inst["f_s"];
    for (double c : inst["carriers"]) plan.carriers.push_back(c);

    std::vector<Complex> q((size_t)m);
    for (int i = 0; i < m; ++i)
      q[(size_t)i] = Complex(inst["q_re"][(size_t)i], inst["q_im"][(size_t)i]);
    BpdnProblem p = BpdnProblem::build(q, plan, inst["g_prime"], inst["eps"]);
    BpdnResult r = solve_bpdn(p);
    REQUIRE(r.converged);
    double oracle = inst["objective"];
    CHECK(std::abs(r.objective() - oracle) <= 1e-5 * std::abs(oracle));
    CHECK(r.constraint_residual <= p.eps + 1e-8);
  }
}

TEST_CASE("chronos_tof is exact for a single tap on both grids, noiseless") {
  std::vector<Complex> dummy((size_t)16);
  BpdnProblem probe = BpdnProblem::build(dummy, kPlan, 0, 0.0);
  double tof = 0.5 * probe.grid_delay(64);  // 2*tof on the BPDN grid
  Cir cir{{{tof, 0.7 * cis_rad(0.4)}}};
  DistortionParams dist;
  SplitRng rng(201);
  dist.delta.assign(16, 0.0);
  dist.phi.assign(16, 0.0);
  for (int m = 0; m < 16; ++m) dist.phi[(size_t)m] = rng.uniform();
  SplitRng quiet(1);
  HandshakeSamples hs = synth_handshake(cir, kPlan, dist, std::nullopt, quiet);

  ChronosEstimate est = chronos_tof(hs, kPlan, 0, 0.0);
  REQUIRE(est.ok);
  CHECK(est.tof == tof);  // same grid formula on both sides
}

TEST_CASE("chronos_tof finds the first self-convolution component") {
  // Two taps whose pairwise delay sums all land on the BPDN grid. The
  // squared response transforms h*h with support {2t1, t1+t2, 2t2}; the
  // first significant entry sits at 2 t1.
  std::vector<Complex> dummy((size_t)16);
  BpdnProblem probe = BpdnProblem::build(dummy, kPlan, 0, 0.0);
  double t1 = 0.5 * probe.grid_delay(40);
  double t2 = 0.5 * probe.grid_delay(100);
  Complex c1 = 0.8 * cis_rad(0.3), c2 = 0.5 * cis_rad(-1.2);
  Cir cir{{{t1, c1}, {t2, c2}}};
  DistortionParams dist;
  dist.delta.assign(16, 0.0);
  dist.phi.assign(16, 0.0);
  SplitRng quiet(1);
  HandshakeSamples hs = synth_handshake(cir, kPlan, dist, std::nullopt, quiet);

  ChronosEstimate est = chronos_tof(hs, kPlan, 0, 0.0);
  REQUIRE(est.ok);
  CHECK(est.tof == t1);

  // Brute-force self-convolution oracle: support and coefficients.
  std::map<int, Complex> conv;
  for (const Tap& a : cir.taps)
    for (const Tap& b : cir.taps) {
      double delay = a.delay + b.delay;
      int idx = (int)std::llround(delay * kPlan.subcarrier_spacing *
                                  probe.grid_size);
      conv[idx] += a.gain * b.gain;
    }
  REQUIRE(conv.size() == 3);
  for (const auto& [idx, gain] : conv)
    CHECK(std::abs(est.solution(idx) - gain * std::sqrt(16.0)) <= 1e-5);
  CHECK(conv.begin()->first == 40);
}

TEST_CASE("chronos ToF is invariant under a global phase rotation of q") {
  SplitRng rng(205);
  Cir cir = draw_cir(rng, 3, 300e-9, 4.0);
  DistortionParams dist = draw_distortion(rng, kPlan, 960e-9);
  HandshakeSamples hs = synth_handshake(cir, kPlan, dist, NoiseModel{100.0}, rng);

  std::vector<Complex> q = squared_cfr(hs);
  std::vector<Complex> h_true((size_t)16);
  CsiMatrix ideal = synth_cfr(cir, kPlan);
  double eps = 0.0;
  for (int m = 0; m < 16; ++m) {
    Complex h = ideal.values(m, ideal.col_of(0));
    eps += std::norm(q[(size_t)m] - h * h);
  }
  eps = std::sqrt(eps);

  BpdnProblem p1 = BpdnProblem::build(q, kPlan, 0, eps);
  Complex rot = cis_rad(2.0 * 0.7);
  for (Complex& v : q) v *= rot;
  BpdnProblem p2 = BpdnProblem::build(q, kPlan, 0, eps);

  BpdnResult r1 = solve_bpdn(p1);
  BpdnResult r2 = solve_bpdn(p2);
  REQUIRE(r1.converged);
  REQUIRE(r2.converged);
  CHECK((r1.x.cwiseAbs() - r2.x.cwiseAbs()).cwiseAbs().maxCoeff() <= 1e-6);
  CHECK(r1.constraint_residual <= eps + 1e-8);
  CHECK(r2.constraint_residual <= eps + 1e-8);
}

TEST_CASE("chronos flags an all-zero solution instead of guessing") {
  HandshakeSamples hs;
  hs.tx.assign(16, Complex{0.0, 0.0});
  hs.rx.assign(16, Complex{0.0, 0.0});
  ChronosEstimate est = chronos_tof(hs, kPlan, 0, 0.5);
  CHECK_FALSE(est.ok);
}
