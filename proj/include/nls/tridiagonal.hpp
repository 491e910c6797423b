#pragma once

#include <Eigen/Core>

#include <cmath>
#include <complex>
#include <stdexcept>

namespace nls {

/// Tridiagonal matrix stored by diagonals. `lower(i)` couples rows i+1 and i,
/// `upper(i)` couples rows i and i+1.
template <typename Scalar>
struct Tridiagonal {
  using VectorType = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  VectorType lower;
  VectorType diag;
  VectorType upper;

  Tridiagonal() = default;
  explicit Tridiagonal(Eigen::Index n)
      : lower(VectorType::Zero(n > 0 ? n - 1 : 0)),
        diag(VectorType::Zero(n)),
        upper(VectorType::Zero(n > 0 ? n - 1 : 0)) {}

  Eigen::Index size() const { return diag.size(); }

  template <typename Derived>
  VectorType operator*(const Eigen::MatrixBase<Derived>& x) const {
    const Eigen::Index n = size();
    VectorType y = diag.cwiseProduct(x);
    if (n > 1) {
      y.head(n - 1) += upper.cwiseProduct(x.tail(n - 1));
      y.tail(n - 1) += lower.cwiseProduct(x.head(n - 1));
    }
    return y;
  }
};

/// Solves A x = b by Gaussian elimination with partial pivoting (the LAPACK
/// gtsv algorithm). Works for indefinite and complex systems.
template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> solve(Tridiagonal<Scalar> a,
                                               const Eigen::MatrixBase<Derived>& rhs) {
  using std::abs;
  using VectorType = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Eigen::Index n = a.size();
  VectorType b = rhs;
  if (n == 0) return b;
  // `dl` is reused to hold the second superdiagonal created by pivoting.
  VectorType& dl = a.lower;
  VectorType& d = a.diag;
  VectorType& du = a.upper;
  const auto singular = [] { throw std::runtime_error("singular tridiagonal system"); };

  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    if (abs(d(i)) >= abs(dl(i))) {
      if (d(i) == Scalar(0)) singular();
      const Scalar fact = dl(i) / d(i);
      d(i + 1) -= fact * du(i);
      b(i + 1) -= fact * b(i);
      dl(i) = Scalar(0);
    } else {
      const Scalar fact = d(i) / dl(i);
      d(i) = dl(i);
      const Scalar temp = d(i + 1);
      d(i + 1) = du(i) - fact * temp;
      if (i + 2 < n) {
        dl(i) = du(i + 1);
        du(i + 1) = -fact * dl(i);
      } else {
        dl(i) = Scalar(0);
      }
      du(i) = temp;
      const Scalar bi = b(i);
      b(i) = b(i + 1);
      b(i + 1) = bi - fact * b(i + 1);
    }
  }
  if (d(n - 1) == Scalar(0)) singular();

  b(n - 1) /= d(n - 1);
  if (n > 1) b(n - 2) = (b(n - 2) - du(n - 2) * b(n - 1)) / d(n - 2);
  for (Eigen::Index i = n - 3; i >= 0; --i) {
    b(i) = (b(i) - du(i) * b(i + 1) - dl(i) * b(i + 2)) / d(i);
  }
  return b;
}

namespace detail {
inline double reciprocal(double x) { return 1.0 / x; }
inline std::complex<double> reciprocal(const std::complex<double>& z) { return std::conj(z) / std::norm(z); }
}  // namespace detail

/// Thomas algorithm without pivoting, for diagonally dominant systems. Where
/// |diag| and |lower| agree to rounding (rows whose weight is negligible next
/// to the coupling) pivoting flips rows and loses the small terms; this keeps
/// them.
template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> solve_dominant(const Tridiagonal<Scalar>& a,
                                                        const Eigen::MatrixBase<Derived>& rhs) {
  using VectorType = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Eigen::Index n = a.size();
  VectorType b = rhs;
  if (n == 0) return b;
  // Inverse pivots; complex reciprocals via conj/norm avoid the slow
  // library division (which guards against overflow we cannot reach here).
  VectorType inv(n);
  Scalar d = a.diag(0);
  for (Eigen::Index i = 0;; ++i) {
    if (d == Scalar(0)) throw std::runtime_error("zero pivot in tridiagonal system");
    inv(i) = detail::reciprocal(d);
    if (i + 1 == n) break;
    const Scalar fact = a.lower(i) * inv(i);
    d = a.diag(i + 1) - fact * a.upper(i);
    b(i + 1) -= fact * b(i);
  }
  b(n - 1) *= inv(n - 1);
  for (Eigen::Index i = n - 2; i >= 0; --i) b(i) = (b(i) - a.upper(i) * b(i + 1)) * inv(i);
  return b;
}

}  // namespace nls
