#include "nls/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace nls {

namespace {

struct GaussRule {
  std::vector<double> x;  // on [-1, 1]
  std::vector<double> w;
};

GaussRule gauss_legendre(int m) {
  GaussRule rule{std::vector<double>(m), std::vector<double>(m)};
  for (int i = 0; i < (m + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= m; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = m * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.x[i] = -x;
    rule.x[m - 1 - i] = x;
    rule.w[i] = rule.w[m - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

// r_b^N - r_a^N without cancellation, divided by (r_b - r_a).
double power_difference_quotient(double ra, double rb, int dim) {
  double sum = 0.0;
  for (int k = 0; k < dim; ++k) sum += std::pow(rb, k) * std::pow(ra, dim - 1 - k);
  return sum;
}

}  // namespace

RadialGrid::RadialGrid(int dim, double r_max, int n, double core_scale)
    : dim_(dim), r_max_(r_max), n_(n), core_scale_(core_scale) {
  if (dim < 3) throw std::invalid_argument("radial grid requires dimension N >= 3");
  if (!(r_max > 0.0) || !std::isfinite(r_max)) {
    throw std::invalid_argument("radial grid requires r_max > 0");
  }
  if (n < 16) throw std::invalid_argument("radial grid requires at least 16 nodes");
  if (!(core_scale > 0.0)) throw std::invalid_argument("core scale must be positive");

  surface_ = 2.0 * std::pow(std::numbers::pi, 0.5 * dim) / std::tgamma(0.5 * dim);

  const double stretch = r_max / core_scale;
  nodes_.resize(n);
  for (int i = 0; i < n; ++i) {
    const double s = double(i + 1) / n;
    const double gap = (1.0 - s) * (1.0 + s);
    nodes_(i) = r_max * s * s / (1.0 + stretch * gap);
  }
  nodes_(n - 1) = r_max;

  // Cubic product integration per interval. Where strongly uneven spacing
  // (origin, stretched far end) yields a nonpositive weight, the intervals
  // feeding that node fall back to hat functions, which are always positive.
  const GaussRule rule = gauss_legendre(dim / 2 + 3);
  std::vector<char> linear(n, 0);
  for (int pass = 0; pass <= n; ++pass) {
    weights_ = Vector::Zero(n);
    for (int j = 0; j < n; ++j) {
      const double a = (j == 0) ? 0.0 : nodes_(j - 1);
      const double b = nodes_(j);
      const double half = 0.5 * (b - a);
      const double mid = 0.5 * (b + a);
      const bool cubic = !linear[j];
      const int first = cubic ? std::clamp(j - 2, 0, n - 4) : std::max(j - 1, 0);
      const int count = cubic ? 4 : (j == 0 ? 1 : 2);
      const double* x = nodes_.data() + first;
      for (std::size_t g = 0; g < rule.x.size(); ++g) {
        const double r = mid + half * rule.x[g];
        const double measure = half * rule.w[g] * std::pow(r, dim - 1);
        for (int k = 0; k < count; ++k) {
          double basis = 1.0;
          for (int m = 0; m < count; ++m) {
            if (m != k) basis *= (r - x[m]) / (x[k] - x[m]);
          }
          weights_(first + k) += measure * basis;
        }
      }
    }
    bool positive = true;
    for (int i = 0; i < n; ++i) {
      if (weights_(i) > 0.0) continue;
      positive = false;
      for (int j = std::max(i - 2, 0); j <= std::min(i + 3, n - 1); ++j) linear[j] = 1;
    }
    if (positive) break;
  }
  weights_ *= surface_;

  conductance_.resize(n - 1);
  for (int j = 1; j < n; ++j) {
    const double ra = nodes_(j - 1);
    const double rb = nodes_(j);
    conductance_(j - 1) = surface_ * power_difference_quotient(ra, rb, dim) / (dim * (rb - ra));
  }
}

Tridiagonal<double> RadialGrid::stiffness() const {
  Tridiagonal<double> k(n_);
  for (int j = 1; j < n_; ++j) {
    const double c = conductance_(j - 1);
    k.diag(j - 1) += c;
    k.diag(j) += c;
    k.upper(j - 1) = -c;
    k.lower(j - 1) = -c;
  }
  return k;
}

RadialGrid RadialGrid::scaled(double tau) const {
  if (!(tau > 0.0)) throw std::invalid_argument("dilation factor must be positive");
  return RadialGrid(dim_, r_max_ / tau, n_, core_scale_ / tau);
}

bool RadialGrid::same_layout(const RadialGrid& other) const {
  return dim_ == other.dim_ && n_ == other.n_ && r_max_ == other.r_max_ &&
         core_scale_ == other.core_scale_;
}

GridPtr make_grid(int dim, double r_max, int n, double core_scale) {
  return std::make_shared<const RadialGrid>(dim, r_max, n, core_scale);
}

template <typename Scalar>
double lq_power(const BasicProfile<Scalar>& u, double t) {
  if (!(t >= 1.0)) throw std::invalid_argument("L^t norm requires t >= 1");
  const Vector mag = u.values.cwiseAbs();
  return integrate(*u.grid, mag.array().pow(t).matrix());
}

template <typename Scalar>
double lq_norm(const BasicProfile<Scalar>& u, double t) {
  const double p = lq_power(u, t);
  return p > 0.0 ? std::pow(p, 1.0 / t) : 0.0;
}

template <typename Scalar>
double grad_l2_sq(const BasicProfile<Scalar>& u) {
  const auto n = u.size();
  const auto diff = (u.values.tail(n - 1) - u.values.head(n - 1)).cwiseAbs2();
  return u.grid->conductances().dot(diff);
}

template double lq_power(const Profile&, double);
template double lq_power(const ComplexProfile&, double);
template double lq_norm(const Profile&, double);
template double lq_norm(const ComplexProfile&, double);
template double grad_l2_sq(const Profile&);
template double grad_l2_sq(const ComplexProfile&);

Vector derivative(const Profile& u) {
  const Vector& r = u.grid->nodes();
  const Vector& f = u.values;
  const int n = u.grid->size();
  Vector d(n);
  const auto three_point = [&](int i0, int at) {
    // derivative at node `at` of the parabola through i0, i0+1, i0+2
    const double x0 = r(i0), x1 = r(i0 + 1), x2 = r(i0 + 2), x = r(at);
    return f(i0) * ((x - x1) + (x - x2)) / ((x0 - x1) * (x0 - x2)) +
           f(i0 + 1) * ((x - x0) + (x - x2)) / ((x1 - x0) * (x1 - x2)) +
           f(i0 + 2) * ((x - x0) + (x - x1)) / ((x2 - x0) * (x2 - x1));
  };
  d(0) = three_point(0, 0);
  for (int i = 1; i + 1 < n; ++i) d(i) = three_point(i - 1, i);
  d(n - 1) = three_point(n - 3, n - 1);
  return d;
}

namespace {

// Hermite slopes: second-order nodal derivatives with the Fritsch-Carlson
// limiter applied where monotonicity of the data would be violated.
Vector monotone_slopes(const Profile& u) {
  const Vector& r = u.grid->nodes();
  const Vector& f = u.values;
  const int n = u.grid->size();
  Vector m = derivative(u);
  for (int k = 0; k + 1 < n; ++k) {
    const double delta = (f(k + 1) - f(k)) / (r(k + 1) - r(k));
    if (delta == 0.0) {
      m(k) = m(k + 1) = 0.0;
      continue;
    }
    if (m(k) * delta < 0.0) m(k) = 0.0;
    if (m(k + 1) * delta < 0.0) m(k + 1) = 0.0;
    const double alpha = m(k) / delta;
    const double beta = m(k + 1) / delta;
    const double norm = alpha * alpha + beta * beta;
    if (norm > 9.0) {
      const double t = 3.0 / std::sqrt(norm);
      m(k) = t * alpha * delta;
      m(k + 1) = t * beta * delta;
    }
  }
  return m;
}

double hermite(const Vector& r, const Vector& f, const Vector& m, int k, double x) {
  const double h = r(k + 1) - r(k);
  const double t = (x - r(k)) / h;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * f(k) + (t3 - 2 * t2 + t) * h * m(k) +
         (-2 * t3 + 3 * t2) * f(k + 1) + (t3 - t2) * h * m(k + 1);
}

}  // namespace

double interpolate(const Profile& u, double x) {
  const Vector& r = u.grid->nodes();
  if (x > u.grid->r_max()) return 0.0;
  if (x <= r(0)) return u.values(0);
  const Vector m = monotone_slopes(u);
  const auto it = std::upper_bound(r.data(), r.data() + r.size(), x);
  const int k = int(it - r.data()) - 1;
  return hermite(r, u.values, m, std::min(k, u.grid->size() - 2), x);
}

Profile rescale(const Profile& u, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("dilation factor must be positive");
  const RadialGrid& g = *u.grid;
  const Vector& r = g.nodes();
  const Vector m = monotone_slopes(u);
  const double amp = std::pow(tau, 0.5 * g.dim());
  Vector out(g.size());
  int k = 0;
  for (int i = 0; i < g.size(); ++i) {
    const double x = tau * r(i);
    if (x > g.r_max()) {
      out(i) = 0.0;
    } else if (x <= r(0)) {
      out(i) = amp * u.values(0);
    } else {
      while (k + 2 < g.size() && r(k + 1) < x) ++k;
      while (k > 0 && r(k) > x) --k;
      out(i) = amp * hermite(r, u.values, m, k, x);
    }
  }
  return Profile(u.grid, std::move(out));
}

template <typename Scalar>
BasicProfile<Scalar> dilate(const BasicProfile<Scalar>& u, double tau) {
  auto g = std::make_shared<const RadialGrid>(u.grid->scaled(tau));
  const double amp = std::pow(tau, 0.5 * g->dim());
  return BasicProfile<Scalar>(std::move(g), u.values * Scalar(amp));
}

template Profile dilate(const Profile&, double);
template ComplexProfile dilate(const ComplexProfile&, double);

Profile amplitude_dilate(const Profile& u, double alpha, double beta) {
  auto g = std::make_shared<const RadialGrid>(u.grid->scaled(beta));
  return Profile(std::move(g), alpha * u.values);
}

}  // namespace nls
