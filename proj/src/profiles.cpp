#include "nls/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace nls {

namespace {

enum class Outcome { Turning, Crossing };

struct Trajectory {
  Outcome outcome;
  std::vector<double> w, dw;
};

Trajectory integrate_from(double w0, int dim, double q, const ShootingConfig& cfg) {
  const double h = cfg.step;
  const double r0 = h;
  const double c2 = (w0 - std::pow(w0, q - 1.0)) / (2.0 * dim);
  const auto rhs = [dim, q](double r, double w, double v) {
    return w - std::pow(std::abs(w), q - 2.0) * w - (dim - 1.0) * v / r;
  };

  Trajectory t{Outcome::Turning, {}, {}};
  const auto steps = std::size_t(cfg.r_end / h);
  t.w.reserve(steps + 1);
  t.dw.reserve(steps + 1);
  double w = w0 + c2 * r0 * r0;
  double v = 2.0 * c2 * r0;
  t.w.push_back(w);
  t.dw.push_back(v);
  for (std::size_t i = 0; i < steps; ++i) {
    const double r = r0 + i * h;
    const double k1w = v, k1v = rhs(r, w, v);
    const double k2w = v + 0.5 * h * k1v, k2v = rhs(r + 0.5 * h, w + 0.5 * h * k1w, k2w);
    const double k3w = v + 0.5 * h * k2v, k3v = rhs(r + 0.5 * h, w + 0.5 * h * k2w, k3w);
    const double k4w = v + h * k3v, k4v = rhs(r + h, w + h * k3w, k4w);
    w += h / 6.0 * (k1w + 2 * k2w + 2 * k3w + k4w);
    v += h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
    t.w.push_back(w);
    t.dw.push_back(v);
    if (w < 0.0) {
      t.outcome = Outcome::Crossing;
      return t;
    }
    if (v > 0.0) return t;
  }
  return t;
}

}  // namespace

double ShootingSolution::operator()(double r) const {
  if (r <= r_start) {
    const double c2 = (w0 - std::pow(w0, q - 1.0)) / (2.0 * dim);
    return w0 + c2 * r * r;
  }
  if (r >= r_split) {
    const double ws = w.back();
    const double decay = 0.5 * (dim - 1.0);
    return ws * std::pow(r_split / r, decay) * std::exp(-(r - r_split));
  }
  const double x = (r - r_start) / step;
  const auto k = std::min(std::size_t(x), w.size() - 2);
  const double t = x - double(k);
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * w[k] + (t3 - 2 * t2 + t) * step * dw[k] +
         (-2 * t3 + 3 * t2) * w[k + 1] + (t3 - t2) * step * dw[k + 1];
}

ShootingSolution shoot_ground_state(int dim, double q, const ShootingConfig& cfg) {
  if (dim < 3) throw DomainError("invalid_parameter", "shooting requires N >= 3");
  const double two_star = 2.0 * dim / (dim - 2.0);
  if (!(q > 2.0 && q < two_star)) throw DomainError("invalid_parameter", "q must lie in (2, 2*)");

  double lo = cfg.lower;
  double hi = cfg.upper;
  int it = 0;
  if (integrate_from(lo, dim, q, cfg).outcome != Outcome::Turning) {
    throw ShootingError("lower shooting value does not turn", lo, hi);
  }
  while (integrate_from(hi, dim, q, cfg).outcome != Outcome::Crossing) {
    lo = hi;
    hi *= 2.0;
    if (++it > 60) throw ShootingError("no crossing trajectory found", lo, hi);
  }
  while (hi - lo > cfg.bracket_tol * hi) {
    if (++it > cfg.max_iterations) throw ShootingError("bisection did not converge", lo, hi);
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (integrate_from(mid, dim, q, cfg).outcome == Outcome::Crossing) {
      hi = mid;
    } else {
      lo = mid;
    }
  }

  const Trajectory below = integrate_from(lo, dim, q, cfg);
  const Trajectory above = integrate_from(hi, dim, q, cfg);
  const std::size_t common = std::min(below.w.size(), above.w.size());

  ShootingSolution sol;
  sol.w0 = 0.5 * (lo + hi);
  sol.step = cfg.step;
  sol.r_start = cfg.step;
  sol.dim = dim;
  sol.q = q;
  sol.iterations = it;
  std::size_t split = 0;
  for (; split < common; ++split) {
    const double wl = below.w[split], wh = above.w[split];
    if (std::abs(wl - wh) > 1e-7 * std::abs(wl) || below.dw[split] >= 0.0) break;
    sol.w.push_back(0.5 * (wl + wh));
    sol.dw.push_back(0.5 * (below.dw[split] + above.dw[split]));
  }
  if (sol.w.size() < 3) throw ShootingError("shooting trajectories never agree", lo, hi);
  sol.r_split = sol.r_start + double(sol.w.size() - 1) * sol.step;
  return sol;
}

WeinsteinCoefficients weinstein_coefficients(int dim, double q) {
  return {(q - 2.0) * dim / 4.0, 1.0 + (q - 2.0) * (2.0 - dim) / 4.0, q};
}

double WeinsteinCoefficients::amplitude() const { return std::pow(beta, 1.0 / (q - 2.0)); }

double WeinsteinCoefficients::rate() const { return std::sqrt(beta / alpha); }

GridPtr weinstein_grid(int dim, double q, int n) {
  const double k = weinstein_coefficients(dim, q).rate();
  return make_grid(dim, 40.0 / k, n, 2.0 / k);
}

GroundStateReport weinstein_ground_state(int dim, double q, const GridPtr& grid,
                                         const ShootingConfig& cfg) {
  if (grid->dim() != dim) throw std::invalid_argument("grid dimension mismatch");
  const ShootingSolution w = shoot_ground_state(dim, q, cfg);
  const WeinsteinCoefficients c = weinstein_coefficients(dim, q);
  const double amp = c.amplitude();
  const double rate = c.rate();

  const int n = grid->size();
  Vector u(n);
  for (int i = 0; i < n; ++i) u(i) = amp * w(rate * grid->nodes()(i));
  u(n - 1) = 0.0;

  // Newton on alpha K u + beta W u - W |u|^{q-2} u = 0 with u(r_max) = 0.
  const Tridiagonal<double> stiff = grid->stiffness();
  const Vector& wts = grid->weights();
  const int m = n - 1;
  GroundStateReport rep;
  double last_step = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 50; ++it) {
    const Vector pot = u.cwiseAbs().array().pow(q - 2.0).matrix();
    Vector f = c.alpha * (stiff * u) + c.beta * wts.cwiseProduct(u) -
               wts.cwiseProduct(pot.cwiseProduct(u));
    Tridiagonal<double> jac(m);
    jac.diag = c.alpha * stiff.diag.head(m) + c.beta * wts.head(m) -
               (q - 1.0) * wts.head(m).cwiseProduct(pot.head(m));
    jac.lower = c.alpha * stiff.lower.head(m - 1);
    jac.upper = c.alpha * stiff.upper.head(m - 1);
    const Vector du = solve(jac, f.head(m));
    u.head(m) -= du;
    rep.newton_iterations = it + 1;
    // Converged, or stalled at the rounding floor of the residual.
    const double step = du.lpNorm<Eigen::Infinity>();
    if (step <= 1e-14 * u.lpNorm<Eigen::Infinity>() || (it > 2 && step > 0.5 * last_step)) break;
    last_step = step;
  }

  const Vector pot = u.cwiseAbs().array().pow(q - 2.0).matrix();
  const Vector f = c.alpha * (stiff * u) + c.beta * wts.cwiseProduct(u) -
                   wts.cwiseProduct(pot.cwiseProduct(u));
  const double umax = u.lpNorm<Eigen::Infinity>();
  const double eps = std::numeric_limits<double>::epsilon();
  double res_max = 0.0, res_l2 = 0.0;
  for (int i = 0; i < m; ++i) {
    res_l2 += f(i) * f(i) / wts(i);
    // Nodes whose cells are so small that the difference Laplacian sits
    // below rounding resolution are excluded from the max norm.
    const double floor = eps * umax * c.alpha * stiff.diag(i) / wts(i);
    if (i > 0 && floor < 1e-9) res_max = std::max(res_max, std::abs(f(i)) / wts(i));
  }
  rep.profile = Profile(grid, std::move(u));
  rep.residual_max = res_max;
  rep.residual_l2 = std::sqrt(res_l2);
  rep.shooting_w0 = w.w0;
  return rep;
}

Profile aubin_talenti(int dim, double b, const GridPtr& grid, double amplitude) {
  if (!(b > 0.0) || !(amplitude > 0.0)) {
    throw std::invalid_argument("bubble parameters must be positive");
  }
  const double e = 0.5 * (dim - 2.0);
  return Profile::sample(grid, [=](double r) { return amplitude * std::pow(b / (b * b + r * r), e); });
}

double cutoff(double t) {
  if (t <= 1.0) return 1.0;
  if (t >= 2.0) return 0.0;
  const double x = t - 1.0;
  return 1.0 - x * x * x * (10.0 - 15.0 * x + 6.0 * x * x);
}

Profile cutoff_profile(const Profile& u, double n) {
  if (!(n > 0.0)) throw std::invalid_argument("cutoff radius must be positive");
  if (2.0 * n > u.grid->r_max()) throw std::invalid_argument("cutoff requires 2n <= r_max");
  Vector v = u.values;
  for (int i = 0; i < v.size(); ++i) v(i) *= cutoff(u.grid->nodes()(i) / n);
  return Profile(u.grid, std::move(v));
}

Profile gaussian(const ProblemParams& p, double sigma, const GridPtr& grid) {
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian width must be positive");
  const double c = std::sqrt(p.a / std::pow(std::numbers::pi * sigma * sigma, 0.5 * grid->dim()));
  return Profile::sample(grid, [=](double r) { return c * std::exp(-r * r / (2 * sigma * sigma)); });
}

Profile normalize_mass(const Profile& u, double a) {
  const double m = lq_power(u, 2.0);
  if (!(m > 0.0)) throw std::invalid_argument("cannot normalize the zero profile");
  return Profile(u.grid, u.values * std::sqrt(a / m));
}

Profile normalize_mass_lq(const Profile& u, const ProblemParams& p) {
  if (!is_l2_critical(p.dim, p.q)) {
    throw DomainError("regime", "mass/L^q normalization is defined for q = 2 + 4/N only");
  }
  const double l2 = lq_norm(u, 2.0);
  const double lq = lq_norm(u, p.q);
  if (!(l2 > 0.0) || !(lq > 0.0)) throw std::invalid_argument("cannot normalize the zero profile");
  const double ratio = l2 / (std::sqrt(p.a) * lq);
  const double alpha = std::pow(ratio, 0.5 * p.dim) / lq;
  const double beta = std::pow(ratio, 0.5 * p.q);
  return amplitude_dilate(u, alpha, beta);
}

Profile bump(const GridPtr& grid, double r0, double r1) {
  if (!(r1 > r0)) throw std::invalid_argument("bump support must be a proper interval");
  const double mid = 0.5 * (r0 + r1), half = 0.5 * (r1 - r0);
  return Profile::sample(grid, [=](double r) {
    const double t = (r - mid) / half;
    return std::abs(t) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - t * t)) : 0.0;
  });
}

Profile random_trial_profile(const ProblemParams& p, const GridPtr& grid, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double sigma = 0.5 * std::exp(std::log(8.0) * unit(rng));
  const double c1 = 2.0 * unit(rng) - 0.5;
  const double c2 = unit(rng);
  const Profile g = Profile::sample(grid, [=](double r) {
    const double x = r / sigma;
    const double mod = 1.0 + c1 * x * x + c2 * x * x * x * x;
    return std::max(mod, 0.05) * std::exp(-0.5 * x * x);
  });
  Profile out = normalize_mass(g, p.a);
  out.values(out.size() - 1) = 0.0;
  return out;
}

}  // namespace nls
