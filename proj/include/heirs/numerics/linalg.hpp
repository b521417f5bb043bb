#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace heirs {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Thrown when operand shapes do not agree.
class DimensionError : public std::invalid_argument {
 public:
  explicit DimensionError(const std::string& what) : std::invalid_argument(what) {}
};

/// Thrown when a numerical routine produces NaN/Inf or cannot make progress.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

inline constexpr double kPi = 3.14159265358979323846;

CMatrix kron(const CMatrix& a, const CMatrix& b);

/// Column-wise Kronecker product. Both operands need the same column count.
CMatrix khatri_rao(const CMatrix& a, const CMatrix& b);

CMatrix hadamard(const CMatrix& a, const CMatrix& b);

/// Column-major stacking of the columns of `a`.
CVector vec(const CMatrix& a);

/// Inverse of vec(): reshapes a rows*cols vector column-major.
CMatrix mat(const CVector& v, Index rows, Index cols);

/// Re{Tr(A^H B)}, the real Frobenius inner product.
double real_inner(const CMatrix& a, const CMatrix& b);

bool all_finite(const CMatrix& a);

/// Numerical rank from the singular values. A negative tolerance selects
/// max(rows, cols) * eps * sigma_max.
Index numerical_rank(const CMatrix& a, double tolerance = -1.0);

RVector singular_values(const CMatrix& a);

/// Moore-Penrose pseudo-inverse via SVD with the same default tolerance as
/// numerical_rank().
CMatrix pseudo_inverse(const CMatrix& a, double tolerance = -1.0);

double db_to_linear(double db);
double linear_to_db(double linear);
double dbm_to_watt(double dbm);
double watt_to_dbm(double watt);

}  // namespace heirs
