// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "mbsplice/model.hpp"
#include "mbsplice/splicer.hpp"

using namespace mbsplice;

namespace {

const BandPlan kPlan = default_band_plan();

// Hand-built cleaned set holding exact relative-channel samples.
CleanedBandSet exact_cleaned_set(const Cir& h0, const BandPlan& plan) {
  CleanedBandSet set;
  set.csi = synth_cfr(h0, plan);
  set.csi.kind = CsiKind::cleaned;
  set.estimated.delta.assign((size_t)plan.num_bands, 0.0);
  set.estimated.phi.assign((size_t)plan.num_bands, 0.0);
  set.k_hat.assign((size_t)plan.num_bands, h0.sparsity());
  set.usable.assign((size_t)plan.num_bands, true);
  set.band_estimates.resize((size_t)plan.num_bands);
  return set;
}

}  // namespace

TEST_CASE("dictionary columns: zero-delay column, norms, oracle entries") {
  Dictionary dict = build_dictionary(kPlan, 0);
  const int rows = 16 * 65;
  CHECK(dict.grid_size == 2 * rows);
  CHECK(dict.d.rows() == rows);

  double inv = 1.0 / std::sqrt((double)rows);
  for (int r = 0; r < rows; ++r)
    CHECK(std::abs(dict.d(r, 0) - Complex(inv, 0.0)) <= 1e-15);

  for (int i = 1; i < dict.grid_size; i += 97)
    CHECK(dict.d.col(i).norm() == doctest::Approx(1.0).epsilon(1e-13));

  // Element-wise extended-precision oracle on a sample of entries, evaluated
  // at the dictionary's own grid delays.
  const long double two_pi = 2.0L * 3.14159265358979323846264338327950288L;
  for (int i = 3; i < dict.grid_size; i += 211) {
    for (int r = 0; r < rows; r += 83) {
      long double cyc =
          -(long double)dict.row_freq(r) * (long double)dict.grid_delay(i);
      cyc -= floorl(cyc);
      Complex expected(static_cast<double>(inv * cosl(two_pi * cyc)),
                       static_cast<double>(inv * sinl(two_pi * cyc)));
      CHECK(std::abs(dict.d(r, i) - expected) <= 1e-15);
    }
  }

  CHECK_THROWS_AS(build_dictionary(kPlan, rows / 2), std::invalid_argument);
}

TEST_CASE("splice ordering and the single-band case") {
  SplitRng rng(9);
  Cir h0{{{0.0, {1.0, 0.0}}, {400e-9, {0.3, -0.2}}}};
  CleanedBandSet set = exact_cleaned_set(h0, kPlan);
  Spliced spliced = splice(set);
  REQUIRE(spliced.y.size() == 16 * 65);
  REQUIRE(spliced.active_rows.size() == 16 * 65);
  // Element (m-1)*N + n + (N-1)/2 holds band m, subcarrier n.
  for (int m : {0, 5, 15})
    for (int n : {-32, -1, 0, 17, 32})
      CHECK(spliced.y((m * 65) + n + 32) == set.csi.values(m, n + 32));

  BandPlan one = make_band_plan(1, 65, kPlan.subcarrier_spacing);
  CleanedBandSet single = exact_cleaned_set(h0, one);
  Spliced s1 = splice(single);
  REQUIRE(s1.y.size() == 65);
  for (int j = 0; j < 65; ++j) CHECK(s1.y(j) == single.csi.values(0, j));
  (void)rng;
}

TEST_CASE("splice drops unusable bands and rejects an empty set") {
  Cir h0{{{0.0, {1.0, 0.0}}}};
  CleanedBandSet set = exact_cleaned_set(h0, kPlan);
  set.usable[3] = false;
  set.csi.values.row(3).setZero();
  Spliced spliced = splice(set);
  CHECK(spliced.active_rows.size() == 15u * 65u);
  for (int row : spliced.active_rows) CHECK(row / 65 != 3);

  set.usable.assign(16, false);
  CHECK_THROWS_AS(splice(set), std::invalid_argument);
}

TEST_CASE("on-grid spliced vector equals the dictionary synthesis") {
  Dictionary dict = build_dictionary(kPlan, 0);
  // Taps on the dictionary grid.
  Cir h0{{{dict.grid_delay(0), {1.0, 0.0}},
          {dict.grid_delay(333), {-0.4, 0.25}},
          {dict.grid_delay(901), {0.05, 0.1}}}};
  CleanedBandSet set = exact_cleaned_set(h0, kPlan);
  Spliced spliced = splice(set);

  CVec x = CVec::Zero(dict.grid_size);
  double root = std::sqrt((double)(16 * 65));
  x(0) = root * h0.taps[0].gain;
  x(333) = root * h0.taps[1].gain;
  x(901) = root * h0.taps[2].gain;
  CVec expected = dict.d * x;
  CHECK((spliced.y - expected).norm() <= 1e-12 * expected.norm());
}

TEST_CASE("omp picks a pure column in one iteration with unit coefficient") {
  Dictionary dict = build_dictionary(kPlan, 0);
  CVec y = dict.d.col(777);
  RelativeCirEstimate est = omp(y, dict, 3);
  REQUIRE(est.entries.size() == 1);  // residual vanished after one pick
  CHECK(est.entries[0].first == 777);
  CHECK(std::abs(est.entries[0].second - Complex(1.0, 0.0)) <= 1e-12);
  REQUIRE(est.residual_norms.size() == 2);
  CHECK(est.residual_norms[1] <= 1e-12 * est.residual_norms[0]);
}

TEST_CASE("omp matches exhaustive two-sparse search on a small dictionary") {
  BandPlan small = make_band_plan(2, 5, kPlan.subcarrier_spacing);
  Dictionary dict = build_dictionary(small, 0);  // 10 x 20
  const int ia = 4, ib = 13;
  Complex ca(0.9, -0.3), cb(0.2, 0.45);
  CVec y = ca * dict.d.col(ia) + cb * dict.d.col(ib);

  RelativeCirEstimate est = omp(y, dict, 2);
  REQUIRE(est.entries.size() == 2);
  CHECK(est.entries[0].first == ia);
  CHECK(est.entries[1].first == ib);
  CHECK(std::abs(est.entries[0].second - ca) <= 1e-8);
  CHECK(std::abs(est.entries[1].second - cb) <= 1e-8);

  // Oracle: least-squares over every index pair.
  double best = 1e300;
  int best_i = -1, best_j = -1;
  for (int i = 0; i < dict.grid_size; ++i)
    for (int j = i + 1; j < dict.grid_size; ++j) {
      CMat a(10, 2);
      a.col(0) = dict.d.col(i);
      a.col(1) = dict.d.col(j);
      double resid = (y - a * a.colPivHouseholderQr().solve(y)).norm();
      if (resid < best) {
        best = resid;
        best_i = i;
        best_j = j;
      }
    }
  CHECK(best_i == ia);
  CHECK(best_j == ib);
}

TEST_CASE("omp residuals decrease and stay orthogonal to the selection") {
  Dictionary dict = build_dictionary(kPlan, 0);
  SplitRng rng(17);
  CVec y = CVec::Zero(16 * 65);
  for (int k = 0; k < 4; ++k) {
    int idx = (int)(rng.next_u64() % (uint64_t)dict.grid_size);
    y += rng.complex_gaussian(1.0) * dict.d.col(idx);
  }
  for (int r = 0; r < y.size(); ++r) y(r) += rng.complex_gaussian(1e-4);

  RelativeCirEstimate est = omp(y, dict, 4);
  REQUIRE(est.entries.size() == 4);
  for (size_t i = 1; i < est.residual_norms.size(); ++i)
    CHECK(est.residual_norms[i] < est.residual_norms[i - 1]);

  // Recompute the final residual and check orthogonality to each selection.
  CMat a(16 * 65, 4);
  for (int k = 0; k < 4; ++k) a.col(k) = dict.d.col(est.entries[(size_t)k].first);
  CVec coeffs(4);
  for (int k = 0; k < 4; ++k) coeffs(k) = est.entries[(size_t)k].second;
  CVec resid = y - a * coeffs;
  for (int k = 0; k < 4; ++k)
    CHECK(std::abs(a.col(k).dot(resid)) <= 1e-10 * y.norm());
}

TEST_CASE("multi-band resolution: adjacent taps split only with all bands") {
  Dictionary dict = build_dictionary(kPlan, 0);
  const int ia = 512, ib = 514;  // one multi-band resolution cell apart
  double ta = dict.grid_delay(ia), tb = dict.grid_delay(ib);
  CHECK(tb - ta ==
        doctest::Approx(1.0 / (16.0 * 65.0 * kPlan.subcarrier_spacing))
            .epsilon(1e-12));
  Complex ca(1.0, 0.0), cb = 0.7 * cis_rad(0.3);

  CVec y(16 * 65);
  for (int r = 0; r < y.size(); ++r)
    y(r) = ca * cis_cycles(-dict.row_freq(r) * ta) +
           cb * cis_cycles(-dict.row_freq(r) * tb);
  RelativeCirEstimate est = omp(y, dict, 2);
  REQUIRE(est.entries.size() == 2);
  CHECK(est.entries[0].first == ia);
  CHECK(est.entries[1].first == ib);
  CHECK(std::abs(est.entries[0].second * est.gain_scale - ca) <= 1e-8);
  CHECK(std::abs(est.entries[1].second * est.gain_scale - cb) <= 1e-8);

  // The single-band dictionary cannot separate them.
  BandPlan one = make_band_plan(1, 65, kPlan.subcarrier_spacing);
  Dictionary dict1 = build_dictionary(one, 0);
  CVec y1(65);
  for (int r = 0; r < 65; ++r)
    y1(r) = ca * cis_cycles(-dict1.row_freq(r) * ta) +
            cb * cis_cycles(-dict1.row_freq(r) * tb);
  RelativeCirEstimate est1 = omp(y1, dict1, 2);
  double tol = 0.5 * dict.grid_delay(1);
  int hits = 0;
  for (double truth : {ta, tb})
    for (const auto& [idx, coeff] : est1.entries)
      if (std::abs(dict1.grid_delay(idx) - truth) <= tol) ++hits;
  CHECK(hits < 2);
}

TEST_CASE("densifying the grid does not hurt on-grid recovery") {
  // Taps on the common refinement of the 2MN and 3MN grids (the MN grid).
  Dictionary d2 = build_dictionary(kPlan, 2 * 16 * 65);
  Dictionary d3 = build_dictionary(kPlan, 3 * 16 * 65);
  double ta = 100.0 / (16 * 65 * kPlan.subcarrier_spacing);
  double tb = 240.0 / (16 * 65 * kPlan.subcarrier_spacing);
  Complex ca(0.8, 0.1), cb(-0.2, 0.3);
  CVec y(16 * 65);
  for (int r = 0; r < y.size(); ++r)
    y(r) = ca * cis_cycles(-d2.row_freq(r) * ta) +
           cb * cis_cycles(-d2.row_freq(r) * tb);

  auto recovery_error = [&](const Dictionary& dict) {
    RelativeCirEstimate est = omp(y, dict, 2);
    CVec rebuilt = CVec::Zero(y.size());
    for (const auto& [idx, coeff] : est.entries)
      rebuilt += coeff * dict.d.col(idx);
    return (rebuilt - y).norm();
  };
  CHECK(recovery_error(d3) <= recovery_error(d2) + 1e-12);
}

TEST_CASE("omp respects the active-row mask") {
  Dictionary dict = build_dictionary(kPlan, 0);
  CVec y = Complex(0.7, -0.4) * dict.d.col(1234);
  // Drop two bands' rows: zero them in y and exclude them from the mask.
  std::vector<int> active;
  for (int r = 0; r < 16 * 65; ++r) {
    int band = r / 65;
    if (band == 2 || band == 9)
      y(r) = Complex(0.0, 0.0);
    else
      active.push_back(r);
  }
  RelativeCirEstimate est = omp(y, dict, 1, active);
  REQUIRE(est.entries.size() == 1);
  CHECK(est.entries[0].first == 1234);
  CHECK(std::abs(est.entries[0].second - Complex(0.7, -0.4)) <= 1e-10);

  std::vector<int> tiny(active.begin(), active.begin() + 1);
  CHECK_THROWS_AS(omp(y, dict, 2, tiny), std::invalid_argument);
}
