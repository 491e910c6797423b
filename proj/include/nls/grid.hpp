#pragma once

#include <Eigen/Core>

#include <complex>
#include <functional>
#include <memory>
#include <stdexcept>
#include <type_traits>

#include "nls/tridiagonal.hpp"

namespace nls {

using Vector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;

/// Radial discretization of R^N on (0, r_max].
///
/// Nodes follow the algebraic map r(s) = r_max s^2 / (1 + c (1 - s^2)) over the
/// uniform parameter s_i = (i + 1) / n, with stretch c = r_max / core_scale. For
/// r << r_max this is r ~ core_scale s^2 / (1 - s^2): nodes cluster at the
/// origin and thin out algebraically, so both exponentially decaying solitons
/// and r^{-(N-2)} bubble tails are smooth functions of s. The last node sits at
/// r_max, where profiles take the Dirichlet value 0.
///
/// Quadrature is product integration: on every interval the integrand is
/// replaced by the cubic through the four nearest nodes and integrated exactly
/// against the surface measure omega_{N-1} r^{N-1}. The origin interval
/// [0, r_0] uses the first four nodes. The rule is exact for cubic f, except
/// on coarse, strongly stretched layouts (e.g. r_max = 1e3 with n = 2048)
/// where a cubic weight would turn nonpositive and the affected intervals
/// fall back to hat functions.
///
/// Kinetic energy uses piecewise-linear interpolation, i.e. centered
/// differences at cell midpoints, with the exact measure of each cell:
///   ||grad u||^2 = sum_j k_j (u_j - u_{j-1})^2,
///   k_j = omega_{N-1} (r_j^N - r_{j-1}^N) / (N (r_j - r_{j-1})^2).
/// The origin cell carries the Neumann condition u'(0) = 0.
class RadialGrid {
 public:
  static constexpr double kDefaultCoreScale = 2.0;

  RadialGrid(int dim, double r_max, int n, double core_scale = kDefaultCoreScale);

  int dim() const { return dim_; }
  double r_max() const { return r_max_; }
  int size() const { return n_; }
  double core_scale() const { return core_scale_; }
  /// omega_{N-1} = 2 pi^{N/2} / Gamma(N/2).
  double surface_area() const { return surface_; }

  const Vector& nodes() const { return nodes_; }
  /// Quadrature weights including the surface measure: integral = w . f.
  const Vector& weights() const { return weights_; }
  /// Cell conductances k_j for j = 1..n-1 (cell between nodes j-1 and j).
  const Vector& conductances() const { return conductance_; }

  /// The stiffness matrix of the kinetic form, u^T K u = ||grad u||^2.
  Tridiagonal<double> stiffness() const;

  /// Grid with every radius divided by `tau` (same map, same n). A profile
  /// sampled at the old nodes and multiplied by tau^{N/2} represents the
  /// dilation u_tau(x) = tau^{N/2} u(tau x) exactly.
  RadialGrid scaled(double tau) const;

  bool same_layout(const RadialGrid& other) const;

 private:
  int dim_;
  double r_max_;
  int n_;
  double core_scale_;
  double surface_;
  Vector nodes_;
  Vector weights_;
  Vector conductance_;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

/// Validated factory: dim >= 3, r_max > 0, n >= 16.
GridPtr make_grid(int dim, double r_max, int n,
                  double core_scale = RadialGrid::kDefaultCoreScale);

/// Radial function sampled on the nodes of a grid. The boundary value at r_max
/// is the last sample; solvers pin it to zero.
template <typename Scalar>
struct BasicProfile {
  using VectorType = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  GridPtr grid;
  VectorType values;

  BasicProfile() = default;
  BasicProfile(GridPtr g, VectorType v) : grid(std::move(g)), values(std::move(v)) {
    if (!grid) throw std::invalid_argument("profile needs a grid");
    if (values.size() != grid->size()) {
      throw std::invalid_argument("profile size does not match grid");
    }
  }

  static BasicProfile zero(GridPtr g) {
    const auto n = g->size();
    return BasicProfile(std::move(g), VectorType::Zero(n));
  }

  /// Samples f(r) at every node.
  template <typename F>
  static BasicProfile sample(GridPtr g, F&& f) {
    VectorType v(g->size());
    for (int i = 0; i < g->size(); ++i) v(i) = f(g->nodes()(i));
    return BasicProfile(std::move(g), std::move(v));
  }

  Eigen::Index size() const { return values.size(); }
};

using Profile = BasicProfile<double>;
using ComplexProfile = BasicProfile<std::complex<double>>;

inline ComplexProfile to_complex(const Profile& u) {
  return ComplexProfile(u.grid, u.values.cast<std::complex<double>>());
}

/// Integral over R^N of a radial field sampled on the nodes.
template <typename Derived>
typename Derived::Scalar integrate(const RadialGrid& grid, const Eigen::MatrixBase<Derived>& f) {
  if (f.size() != grid.size()) throw std::invalid_argument("field size does not match grid");
  return (grid.weights().template cast<typename Derived::Scalar>().array() * f.array()).sum();
}

/// (integral |u|^t)^{1/t} for t >= 1.
template <typename Scalar>
double lq_norm(const BasicProfile<Scalar>& u, double t);

/// integral |u|^t (the t-th power of the L^t norm).
template <typename Scalar>
double lq_power(const BasicProfile<Scalar>& u, double t);

/// ||grad u||_2^2 via the cell-centered differences.
template <typename Scalar>
double grad_l2_sq(const BasicProfile<Scalar>& u);

/// Nodal derivative u'(r): three-point centered differences on the graded
/// grid, one-sided at both ends.
Vector derivative(const Profile& u);

/// Monotone (Fritsch-Carlson) cubic interpolation of u at radius r; 0 beyond
/// r_max, the first sample below the first node.
double interpolate(const Profile& u, double r);

/// u_tau(r) = tau^{N/2} u(tau r) resampled on the same grid.
Profile rescale(const Profile& u, double tau);

/// Exact dilation: u_tau represented on grid.scaled(tau) with the same samples
/// times tau^{N/2}. Norms obey the scaling laws to rounding.
template <typename Scalar>
BasicProfile<Scalar> dilate(const BasicProfile<Scalar>& u, double tau);

/// alpha * u(beta x) represented exactly on grid.scaled(beta).
Profile amplitude_dilate(const Profile& u, double alpha, double beta);

}  // namespace nls
