#pragma once

#include "heirs/numerics/linalg.hpp"

namespace heirs {

/// min(estimated + margin, min(rows, cols)). Throws on estimated < 1 or a
/// negative margin.
Index select_rank(Index estimated, Index margin, Index rows, Index cols);

struct FixedRankApproximation {
  CMatrix matrix;
  /// ||H - H~||_F. Below `epsilon` when inflating, sqrt(sum_{i>m} s_i^2) when
  /// truncating.
  double error = 0.0;
};

/// Rank-m neighbour of `h`. A matrix of numerical rank r < m gets its next
/// m - r singular values set to epsilon / sqrt(2 (m - r)), so the distance
/// stays below epsilon; a matrix of rank > m is truncated to its best rank-m
/// approximation; rank m returns `h` itself.
FixedRankApproximation nearest_fixed_rank(const CMatrix& h, Index m, double epsilon = 1e-9);

}  // namespace heirs
