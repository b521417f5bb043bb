#include "heirs/estimation/rank_selection.hpp"

#include <algorithm>
#include <cmath>

namespace heirs {

Index select_rank(Index estimated, Index margin, Index rows, Index cols) {
  if (estimated < 1) throw std::invalid_argument("select_rank: estimated rank must be >= 1");
  if (margin < 0) throw std::invalid_argument("select_rank: margin must be >= 0");
  return std::min(estimated + margin, std::min(rows, cols));
}

FixedRankApproximation nearest_fixed_rank(const CMatrix& h, Index m, double epsilon) {
  const Index min_dim = std::min(h.rows(), h.cols());
  if (m < 1 || m > min_dim) throw DimensionError("nearest_fixed_rank: rank out of range");
  const Index r = numerical_rank(h);
  if (r == m) return {h, 0.0};

  Eigen::BDCSVD<CMatrix> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const RVector& s = svd.singularValues();
  RVector sigma = s.head(m);
  double error = 0.0;
  if (r < m) {
    const double fill = epsilon / std::sqrt(2.0 * static_cast<double>(m - r));
    for (Index i = r; i < m; ++i) {
      error += (fill - s(i)) * (fill - s(i));
      sigma(i) = fill;
    }
  } else {
    error = s.tail(min_dim - m).squaredNorm();
  }
  FixedRankApproximation out;
  out.matrix = svd.matrixU().leftCols(m) * sigma.asDiagonal() * svd.matrixV().leftCols(m).adjoint();
  out.error = std::sqrt(error);
  return out;
}

}  // namespace heirs
