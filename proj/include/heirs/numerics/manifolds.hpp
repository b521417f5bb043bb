#pragma once

#include <optional>

#include "heirs/numerics/linalg.hpp"

namespace heirs {

/// Relative singular-value floor below which a fixed-rank point is
/// considered to have left the manifold.
inline constexpr double kRankFloor = 1e-12;

/// A rank-m complex matrix held in thin-SVD form U diag(sigma) V^H.
///
/// U (n1 x m) and V (n2 x m) have orthonormal columns and sigma is strictly
/// positive and non-increasing.
class FixedRankPoint {
 public:
  FixedRankPoint(CMatrix left, RVector sigma, CMatrix right);

  /// Truncated SVD of `x` to rank `rank`. Singular values under
  /// kRankFloor * sigma_max are raised to that floor so the result always
  /// has exactly the requested rank (singular-value inflation).
  static FixedRankPoint from_matrix(const CMatrix& x, Index rank);

  const CMatrix& left() const { return left_; }
  const RVector& sigma() const { return sigma_; }
  const CMatrix& right() const { return right_; }
  Index rank() const { return sigma_.size(); }
  Index rows() const { return left_.rows(); }
  Index cols() const { return right_.rows(); }

  CMatrix matrix() const;

 private:
  CMatrix left_;
  RVector sigma_;
  CMatrix right_;
};

/// Embedded manifold of n1 x n2 complex matrices of fixed rank m. Tangent
/// vectors are stored as ambient matrices; the metric is Re Tr(A^H B).
class FixedRankManifold {
 public:
  using Point = FixedRankPoint;
  using Tangent = CMatrix;

  FixedRankManifold(Index rows, Index cols, Index rank);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index rank() const { return rank_; }

  CMatrix ambient(const Point& x) const { return x.matrix(); }

  /// Orthogonal projection U U^H Z + Z V V^H - U U^H Z V V^H.
  Tangent project(const Point& x, const CMatrix& z) const;

  /// Metric projection of x + step * t back to rank m. `t` must be tangent
  /// at x; only its tangent component is used. Empty when the m-th singular
  /// value of the update falls below the rank floor.
  std::optional<Point> retract(const Point& x, const Tangent& t, double step) const;

  Tangent transport(const Point& to, const Tangent& t) const { return project(to, t); }

  double inner(const Point&, const Tangent& a, const Tangent& b) const {
    return real_inner(a, b);
  }

 private:
  Index rows_;
  Index cols_;
  Index rank_;
};

/// Vector of unit-modulus complex entries.
class CirclePoint {
 public:
  explicit CirclePoint(CVector phases);

  static CirclePoint from_angles(const RVector& radians);

  const CVector& phases() const { return phases_; }
  Index size() const { return phases_.size(); }

 private:
  CVector phases_;
};

/// Complex circle manifold {w : |w_i| = 1}. Metric Re(a^H b).
class CircleManifold {
 public:
  using Point = CirclePoint;
  using Tangent = CVector;

  explicit CircleManifold(Index size) : size_(size) {}

  Index size() const { return size_; }

  CVector ambient(const Point& x) const { return x.phases(); }

  /// z - Re{z o w*} o w
  Tangent project(const Point& x, const CVector& z) const;

  /// Entry-wise renormalization of w + step * t; empty if any entry vanishes.
  std::optional<Point> retract(const Point& x, const Tangent& t, double step) const;

  Tangent transport(const Point& to, const Tangent& t) const { return project(to, t); }

  double inner(const Point&, const Tangent& a, const Tangent& b) const {
    return real_inner(a, b);
  }

 private:
  Index size_;
};

}  // namespace heirs
