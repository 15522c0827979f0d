// SPDX-License-Identifier: Apache-2.0

#include "mbsplice/splicer.hpp"

#include <algorithm>
#include <cmath>

namespace mbsplice {

Dictionary build_dictionary(const BandPlan& plan, int grid_size) {
  plan.validate();
  const int rows = plan.num_bands * plan.subcarriers_per_band;
  if (grid_size == 0) grid_size = 2 * rows;
  if (grid_size < rows)
    throw std::invalid_argument("build_dictionary: grid must be overcomplete");

  Dictionary dict;
  dict.grid_size = grid_size;
  dict.f_s = plan.subcarrier_spacing;
  dict.row_freq.resize(rows);
  const int half = plan.half_span();
  for (int m = 0; m < plan.num_bands; ++m)
    for (int j = 0; j < plan.subcarriers_per_band; ++j)
      dict.row_freq(m * plan.subcarriers_per_band + j) = plan.freq(m, j - half);

  const double scale = 1.0 / std::sqrt(static_cast<double>(rows));
  dict.d.resize(rows, grid_size);
  for (int i = 0; i < grid_size; ++i) {
    double tau = dict.grid_delay(i);
    for (int r = 0; r < rows; ++r)
      dict.d(r, i) = scale * cis_cycles_prod(-dict.row_freq(r), tau);
  }
  return dict;
}

Spliced splice(const CleanedBandSet& cleaned) {
  const int bands = cleaned.csi.num_bands();
  const int n_sub = cleaned.csi.subcarriers_per_band();
  if (cleaned.usable_count() == 0)
    throw std::invalid_argument("splice: no usable bands");

  Spliced out;
  out.y = CVec::Zero(bands * n_sub);
  out.band_usable = cleaned.usable;
  out.active_rows.reserve(static_cast<size_t>(cleaned.usable_count()) *
                          static_cast<size_t>(n_sub));
  for (int m = 0; m < bands; ++m) {
    if (!cleaned.usable[static_cast<size_t>(m)]) continue;
    for (int j = 0; j < n_sub; ++j) {
      out.y(m * n_sub + j) = cleaned.csi.values(m, j);
      out.active_rows.push_back(m * n_sub + j);
    }
  }
  return out;
}

RelativeCirEstimate omp(const CVec& y, const Dictionary& dict, int sparsity,
                        const std::vector<int>& active_rows) {
  if (sparsity < 1) throw std::invalid_argument("omp: sparsity must be >= 1");
  const int rows = static_cast<int>(dict.d.rows());
  if (y.size() != rows) throw std::invalid_argument("omp: size mismatch");

  // Work on the active-row restriction. All dictionary entries share one
  // modulus, so renormalizing columns over the active rows is one scalar.
  const bool masked = !active_rows.empty() &&
                      static_cast<int>(active_rows.size()) != rows;
  const int n_active = masked ? static_cast<int>(active_rows.size()) : rows;
  if (n_active < sparsity)
    throw std::invalid_argument("omp: fewer active rows than sparsity");

  CMat a;          // active rows of the dictionary
  CVec y_act(n_active);
  if (masked) {
    a.resize(n_active, dict.d.cols());
    for (int r = 0; r < n_active; ++r) {
      a.row(r) = dict.d.row(active_rows[static_cast<size_t>(r)]);
      y_act(r) = y(active_rows[static_cast<size_t>(r)]);
    }
  } else {
    a = dict.d;
    y_act = y;
  }
  const double col_norm =
      std::sqrt(static_cast<double>(n_active) / static_cast<double>(rows));

  RelativeCirEstimate est;
  est.grid_size = dict.grid_size;
  est.f_s = dict.f_s;
  est.gain_scale = 1.0 / std::sqrt(static_cast<double>(rows));

  const double y_norm = y_act.norm();
  CVec resid = y_act;
  est.residual_norms.push_back(y_norm);

  std::vector<int> selected;
  CMat basis(n_active, sparsity);
  CVec coeffs;
  while (static_cast<int>(selected.size()) < sparsity &&
         resid.norm() >= 1e-12 * y_norm) {
    CVec corr = a.adjoint() * resid;
    int best = -1;
    double best_mag = -1.0;
    for (int i = 0; i < corr.size(); ++i) {
      if (std::find(selected.begin(), selected.end(), i) != selected.end())
        continue;
      double mag = std::abs(corr(i)) / col_norm;
      if (mag > best_mag) {  // strict: ties go to the smaller index
        best_mag = mag;
        best = i;
      }
    }
    if (best < 0) break;
    basis.col(static_cast<Eigen::Index>(selected.size())) = a.col(best);
    selected.push_back(best);

    auto active_basis = basis.leftCols(static_cast<Eigen::Index>(selected.size()));
    coeffs = active_basis.colPivHouseholderQr().solve(y_act);
    resid = y_act - active_basis * coeffs;
    est.residual_norms.push_back(resid.norm());
  }

  est.entries.reserve(selected.size());
  for (size_t k = 0; k < selected.size(); ++k)
    est.entries.emplace_back(selected[k], coeffs(static_cast<Eigen::Index>(k)));
  std::sort(est.entries.begin(), est.entries.end(),
            [](const auto& lhs, const auto& rhs) { return lhs.first < rhs.first; });
  return est;
}

}  // namespace mbsplice
