// SPDX-License-Identifier: Apache-2.0

#ifndef MBSPLICE_SPLICER_HPP
#define MBSPLICE_SPLICER_HPP

#include <utility>
#include <vector>

#include "mbsplice/cleaner.hpp"
#include "mbsplice/types.hpp"

namespace mbsplice {

/// Overcomplete delay dictionary over all MN subcarriers. Column i holds
/// (1/sqrt(MN)) exp(-j 2 pi f_r (i/G)/f_s) across the stacked subcarrier
/// frequencies f_r, rows band-major with subcarrier index ascending; every
/// column has unit norm when all rows are active.
struct Dictionary {
  CMat d;             // MN x G
  RVec row_freq;      // stacked subcarrier frequencies
  int grid_size = 0;
  double f_s = 0.0;

  double grid_delay(int i) const {
    return (static_cast<double>(i) / grid_size) / f_s;
  }
};

/// grid_size defaults to 2*M*N when 0.
Dictionary build_dictionary(const BandPlan& plan, int grid_size = 0);

/// Stacked cleaned measurements; element (m-1)*N + n + (N-1)/2 holds band
/// m's subcarrier n. Rows of unusable bands are zero and excluded from
/// active_rows. Throws when no band is usable.
struct Spliced {
  CVec y;
  std::vector<int> active_rows;
  std::vector<bool> band_usable;
};

Spliced splice(const CleanedBandSet& cleaned);

/// Sparse delay-domain estimate on the dictionary grid. Coefficients are in
/// the dictionary frame (a measurement equal to one dictionary column yields
/// coefficient 1); multiplying by gain_scale converts them to channel-gain
/// units, undoing the 1/sqrt(MN) column normalization.
struct RelativeCirEstimate {
  std::vector<std::pair<int, Complex>> entries;  // (grid index, coeff), ascending
  int grid_size = 0;
  double f_s = 0.0;
  double gain_scale = 1.0;
  std::vector<double> residual_norms;  // per iteration, starting at ||y||

  double grid_delay(int i) const {
    return (static_cast<double>(i) / grid_size) / f_s;
  }
};

/// Orthogonal matching pursuit: repeatedly select the column with the
/// largest residual correlation (ties to the smaller index), refit all
/// selected coefficients by least squares, and stop once `sparsity` columns
/// are selected or the residual norm falls below 1e-12 ||y||. Correlations
/// and fits run over active_rows only (empty means all rows); columns are
/// renormalized over the active rows so selection stays scale-invariant
/// under band dropout.
RelativeCirEstimate omp(const CVec& y, const Dictionary& dict, int sparsity,
                        const std::vector<int>& active_rows = {});

}  // namespace mbsplice

#endif  // MBSPLICE_SPLICER_HPP
