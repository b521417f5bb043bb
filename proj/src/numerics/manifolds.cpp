#include "heirs/numerics/manifolds.hpp"

#include <cmath>
#include <string>

namespace heirs {

FixedRankPoint::FixedRankPoint(CMatrix left, RVector sigma, CMatrix right)
    : left_(std::move(left)), sigma_(std::move(sigma)), right_(std::move(right)) {
  const Index m = sigma_.size();
  if (m < 1 || left_.cols() != m || right_.cols() != m) {
    throw DimensionError("FixedRankPoint: factor shapes disagree with rank " + std::to_string(m));
  }
  if (left_.rows() < m || right_.rows() < m) {
    throw DimensionError("FixedRankPoint: rank exceeds matrix dimensions");
  }
  for (Index i = 0; i < m; ++i) {
    if (!(sigma_(i) > 0.0) || !std::isfinite(sigma_(i))) {
      throw NumericalError("FixedRankPoint: singular values must be positive and finite");
    }
  }
}

FixedRankPoint FixedRankPoint::from_matrix(const CMatrix& x, Index rank) {
  if (rank < 1 || rank > std::min(x.rows(), x.cols())) {
    throw DimensionError("FixedRankPoint::from_matrix: rank " + std::to_string(rank) +
                         " outside [1, min dims]");
  }
  if (!x.allFinite()) throw NumericalError("FixedRankPoint::from_matrix: non-finite input");
  Eigen::BDCSVD<CMatrix> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  RVector s = svd.singularValues().head(rank);
  double floor = kRankFloor * s(0);
  if (!(floor > 0.0)) floor = kRankFloor;
  for (Index i = 0; i < rank; ++i) {
    if (s(i) < floor) s(i) = floor;
  }
  return FixedRankPoint(svd.matrixU().leftCols(rank), s, svd.matrixV().leftCols(rank));
}

CMatrix FixedRankPoint::matrix() const {
  return left_ * sigma_.asDiagonal() * right_.adjoint();
}

FixedRankManifold::FixedRankManifold(Index rows, Index cols, Index rank)
    : rows_(rows), cols_(cols), rank_(rank) {
  if (rank < 1 || rank > std::min(rows, cols)) {
    throw DimensionError("FixedRankManifold: rank " + std::to_string(rank) +
                         " outside [1, min dims]");
  }
}

CMatrix FixedRankManifold::project(const Point& x, const CMatrix& z) const {
  if (z.rows() != rows_ || z.cols() != cols_) {
    throw DimensionError("FixedRankManifold::project: ambient shape mismatch");
  }
  const CMatrix& u = x.left();
  const CMatrix& v = x.right();
  const CMatrix uhz = u.adjoint() * z;   // m x n2
  const CMatrix zv = z * v;              // n1 x m
  const CMatrix uhzv = uhz * v;          // m x m
  return u * uhz + zv * v.adjoint() - u * uhzv * v.adjoint();
}

std::optional<FixedRankPoint> FixedRankManifold::retract(const Point& x, const Tangent& t,
                                                         double step) const {
  if (step == 0.0) return x;
  if (!t.allFinite() || !std::isfinite(step)) return std::nullopt;
  const Index m = rank_;
  Eigen::BDCSVD<CMatrix> svd;
  CMatrix left, right;
  if (2 * m <= std::min(rows_, cols_)) {
    // x + step t has rank <= 2m for tangent t; factor it through a 2m x 2m core.
    const CMatrix& u = x.left();
    const CMatrix& v = x.right();
    const CMatrix tv = t * v;
    const CMatrix thu = t.adjoint() * u;
    const CMatrix mid = u.adjoint() * tv;
    Eigen::HouseholderQR<CMatrix> qr_u(tv - u * mid);
    Eigen::HouseholderQR<CMatrix> qr_v(thu - v * mid.adjoint());
    const CMatrix q_u = qr_u.householderQ() * CMatrix::Identity(rows_, m);
    const CMatrix q_v = qr_v.householderQ() * CMatrix::Identity(cols_, m);
    const CMatrix r_u = qr_u.matrixQR().topRows(m).triangularView<Eigen::Upper>();
    const CMatrix r_v = qr_v.matrixQR().topRows(m).triangularView<Eigen::Upper>();
    CMatrix core = CMatrix::Zero(2 * m, 2 * m);
    core.topLeftCorner(m, m) = step * mid;
    core.topLeftCorner(m, m).diagonal() += x.sigma().cast<Complex>();
    core.topRightCorner(m, m) = step * r_v.adjoint();
    core.bottomLeftCorner(m, m) = step * r_u;
    if (!core.allFinite()) return std::nullopt;
    svd.compute(core, Eigen::ComputeThinU | Eigen::ComputeThinV);
    left.resize(rows_, 2 * m);
    left << u, q_u;
    right.resize(cols_, 2 * m);
    right << v, q_v;
    left = left * svd.matrixU().leftCols(m);
    right = right * svd.matrixV().leftCols(m);
  } else {
    const CMatrix y = x.matrix() + step * t;
    if (!y.allFinite()) return std::nullopt;
    svd.compute(y, Eigen::ComputeThinU | Eigen::ComputeThinV);
    left = svd.matrixU().leftCols(m);
    right = svd.matrixV().leftCols(m);
  }
  const RVector& s = svd.singularValues();
  // A result at roundoff level of the inputs is a collapse, not a point.
  const double scale = x.sigma()(0) + std::abs(step) * t.norm();
  if (!(s(0) > 1e-13 * scale) || s(m - 1) < kRankFloor * s(0)) return std::nullopt;
  return FixedRankPoint(std::move(left), s.head(m), std::move(right));
}

CirclePoint::CirclePoint(CVector phases) : phases_(std::move(phases)) {
  for (Index i = 0; i < phases_.size(); ++i) {
    if (std::abs(std::abs(phases_(i)) - 1.0) > 1e-12) {
      throw NumericalError("CirclePoint: entry " + std::to_string(i) + " is not unit modulus");
    }
  }
}

CirclePoint CirclePoint::from_angles(const RVector& radians) {
  CVector w(radians.size());
  for (Index i = 0; i < radians.size(); ++i) w(i) = std::polar(1.0, radians(i));
  return CirclePoint(std::move(w));
}

CVector CircleManifold::project(const Point& x, const CVector& z) const {
  if (z.size() != size_) throw DimensionError("CircleManifold::project: size mismatch");
  const CVector& w = x.phases();
  CVector out(size_);
  for (Index i = 0; i < size_; ++i) {
    out(i) = z(i) - (z(i) * std::conj(w(i))).real() * w(i);
  }
  return out;
}

std::optional<CirclePoint> CircleManifold::retract(const Point& x, const Tangent& t,
                                                   double step) const {
  if (step == 0.0) return x;
  CVector y = x.phases() + step * t;
  for (Index i = 0; i < size_; ++i) {
    const double r = std::abs(y(i));
    if (!(r > 0.0) || !std::isfinite(r)) return std::nullopt;
    y(i) /= r;
  }
  return CirclePoint(std::move(y));
}

}  // namespace heirs
