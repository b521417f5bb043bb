#include "heirs/numerics/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace heirs {

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index j = 0; j < a.cols(); ++j) {
    for (Index i = 0; i < a.rows(); ++i) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

CMatrix khatri_rao(const CMatrix& a, const CMatrix& b) {
  if (a.cols() != b.cols()) {
    throw DimensionError("khatri_rao: column counts differ (" + std::to_string(a.cols()) +
                         " vs " + std::to_string(b.cols()) + ")");
  }
  CMatrix out(a.rows() * b.rows(), a.cols());
  for (Index j = 0; j < a.cols(); ++j) {
    for (Index i = 0; i < a.rows(); ++i) {
      out.col(j).segment(i * b.rows(), b.rows()) = a(i, j) * b.col(j);
    }
  }
  return out;
}

CMatrix hadamard(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("hadamard: shapes differ");
  }
  return a.cwiseProduct(b);
}

CVector vec(const CMatrix& a) {
  return Eigen::Map<const CVector>(a.data(), a.size());
}

CMatrix mat(const CVector& v, Index rows, Index cols) {
  if (rows < 0 || cols < 0 || v.size() != rows * cols) {
    throw DimensionError("mat: vector length " + std::to_string(v.size()) + " != " +
                         std::to_string(rows) + "x" + std::to_string(cols));
  }
  return Eigen::Map<const CMatrix>(v.data(), rows, cols);
}

double real_inner(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("real_inner: shapes differ");
  }
  return (a.conjugate().cwiseProduct(b)).sum().real();
}

bool all_finite(const CMatrix& a) {
  return a.allFinite();
}

RVector singular_values(const CMatrix& a) {
  if (a.size() == 0) return RVector();
  return Eigen::BDCSVD<CMatrix>(a).singularValues();
}

namespace {

double default_tolerance(const CMatrix& a, const RVector& s) {
  const double smax = s.size() > 0 ? s(0) : 0.0;
  return static_cast<double>(std::max(a.rows(), a.cols())) *
         std::numeric_limits<double>::epsilon() * smax;
}

}  // namespace

Index numerical_rank(const CMatrix& a, double tolerance) {
  const RVector s = singular_values(a);
  const double tol = tolerance < 0.0 ? default_tolerance(a, s) : tolerance;
  Index r = 0;
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) > tol) ++r;
  }
  return r;
}

CMatrix pseudo_inverse(const CMatrix& a, double tolerance) {
  if (a.size() == 0) return CMatrix::Zero(a.cols(), a.rows());
  Eigen::BDCSVD<CMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RVector& s = svd.singularValues();
  const double tol = tolerance < 0.0 ? default_tolerance(a, s) : tolerance;
  RVector inv = RVector::Zero(s.size());
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) > tol) inv(i) = 1.0 / s(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint();
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double linear) { return 10.0 * std::log10(linear); }
double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
double watt_to_dbm(double watt) { return 10.0 * std::log10(watt) + 30.0; }

}  // namespace heirs
