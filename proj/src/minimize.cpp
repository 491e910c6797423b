#include "nls/minimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "nls/profiles.hpp"

namespace nls {

namespace {

void require_minimization_regime(const ProblemParams& p, const SharpConstants& c) {
  validate(p);
  if (exponents(p).q_class != QClass::Subcritical) {
    throw DomainError("regime", "the local minimizer on V_a requires q < 2 + 4/N");
  }
  if (classify(p, c) == Regime::Omega3) {
    throw DomainError("regime", "the local minimizer on V_a requires Omega1 or Omega2");
  }
}

Tridiagonal<double> interior_operator(const RadialGrid& g, double sigma) {
  const Tridiagonal<double> k = g.stiffness();
  const int m = g.size() - 1;
  Tridiagonal<double> a(m);
  a.diag = k.diag.head(m) + sigma * g.weights().head(m);
  a.lower = k.lower.head(m - 1);
  a.upper = k.upper.head(m - 1);
  return a;
}

Vector apply_inverse(const Tridiagonal<double>& a, const Vector& v) {
  Vector out = Vector::Zero(v.size());
  out.head(a.size()) = solve_dominant(a, v.head(a.size()));
  return out;
}

}  // namespace

GridPtr soliton_grid(int dim, double r_max, int n) { return make_grid(dim, r_max, n); }

SolveReport minimize_local(const ProblemParams& p, const Profile& init, const SharpConstants& c,
                           const MinimizeOptions& opts) {
  require_minimization_regime(p, c);
  const double r0 = rho0(p, c);
  const RadialGrid& g = *init.grid;
  const Vector& w = g.weights();
  const int n = g.size();

  Profile u = normalize_mass(init, p.a);
  u.values(n - 1) = 0.0;
  u = normalize_mass(u, p.a);
  if (opts.project_init) {
    const FiberReport f = fiber_critical_points(p, u, c);
    u = normalize_mass(rescale(u, *f.tau_plus), p.a);
  }
  for (int k = 0; grad_l2_sq(u) >= r0; ++k) {
    if (k > 200) throw DomainError("convergence", "cannot dilate the initial profile into V_a");
    u = normalize_mass(rescale(u, 0.9), p.a);
  }

  SolveReport rep;
  Norms nu = norms(p, u);
  double e = energy(p, nu);
  double step = 1.0;
  int it = 0;
  bool ball_rejections = false;
  for (;; ++it) {
    const Vector grad = energy_gradient(p, u);
    const Vector wu = w.cwiseProduct(u.values);
    const double nu_mult = u.values.dot(grad) / u.values.dot(wu);
    const double sigma = std::max(-nu_mult, 1e-3);
    const Tridiagonal<double> precond = interior_operator(g, sigma);

    const Vector proj = grad - nu_mult * wu;
    rep.grad_residual = std::sqrt(std::max(0.0, proj.dot(apply_inverse(precond, proj))));

    if (it % std::max(opts.trace_stride, 1) == 0) {
      rep.trace.push_back({it, e, pohozaev(p, nu), nu.grad});
    }
    if (rep.grad_residual < opts.tol * std::max(1.0, std::abs(e))) {
      rep.converged = true;
      rep.status = "converged";
      break;
    }
    if (it >= opts.max_iterations) {
      rep.status = "iteration cap reached";
      break;
    }

    const Vector z = apply_inverse(precond, proj);
    const Vector y = apply_inverse(precond, wu);
    const Vector d = z - (wu.dot(z) / wu.dot(y)) * y;
    const double slope = proj.dot(d);
    // Below this predicted decrease, energy differences are rounding noise.
    const double noise = 64.0 * std::numeric_limits<double>::epsilon() *
                         (0.5 * nu.grad + nu.crit + p.mu * nu.lq);
    if (!(slope > 0.0)) {
      rep.status = "no descent direction";
      break;
    }

    step = std::min(1.0, 2.0 * step);
    bool accepted = false;
    for (int ls = 0; ls < 60 && !accepted; ++ls, step *= 0.5) {
      Profile v(u.grid, u.values - step * d);
      v = normalize_mass(v, p.a);
      const Norms nv = norms(p, v);
      if (nv.grad >= r0) {
        ball_rejections = true;
        continue;
      }
      const double ev = energy(p, nv);
      const bool armijo = ev <= e - opts.armijo * step * slope;
      const bool unresolved = step * slope < noise && ev <= e + noise;
      if (armijo || unresolved) {
        u = std::move(v);
        nu = nv;
        e = ev;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      rep.status = "line search stalled at rounding level";
      break;
    }
  }

  const Vector grad = energy_gradient(p, u);
  const Vector wu = w.cwiseProduct(u.values);
  const double nu_mult = u.values.dot(grad) / u.values.dot(wu);
  const Vector proj = grad - nu_mult * wu;
  rep.l2_residual = std::sqrt(proj.head(n - 1).cwiseAbs2().cwiseQuotient(w.head(n - 1)).sum());

  rep.iterations = it;
  rep.energy = e;
  rep.pohozaev = pohozaev(p, nu);
  rep.lambda = lagrange_multiplier(p, nu);
  rep.mass = nu.mass;
  rep.boundary_hit = nu.grad >= (1.0 - 1e-3) * r0 || (ball_rejections && !rep.converged);
  if (rep.trace.empty() || rep.trace.back().iteration != it) {
    rep.trace.push_back({it, e, rep.pohozaev, nu.grad});
  }
  rep.final = std::move(u);
  return rep;
}

SolveReport minimize_local(const ProblemParams& p, const Profile& init,
                           const MinimizeOptions& opts) {
  return minimize_local(p, init, sharp_constants(p.dim, p.q), opts);
}

SolveReport minimize_from_gaussian(const ProblemParams& p, const GridPtr& grid,
                                   const SharpConstants& c, const MinimizeOptions& opts) {
  return minimize_local(p, gaussian(p, 1.0, grid), c, opts);
}

double boundary_energy(const ProblemParams& p, const Profile& u, const SharpConstants& c) {
  const double r0 = rho0(p, c);
  const Norms n = norms(p, u);
  const Profile on_boundary = dilate(u, std::sqrt(r0 / n.grad));
  return energy(p, on_boundary);
}

BoundaryScanReport boundary_scan(const ProblemParams& p, const GridPtr& grid, int samples,
                                 std::uint64_t seed, const SharpConstants& c) {
  require_minimization_regime(p, c);
  if (samples < 1) throw std::invalid_argument("boundary scan needs at least one sample");
  std::mt19937_64 rng(seed);
  BoundaryScanReport rep;
  rep.energies.reserve(samples);
  for (int i = 0; i < samples; ++i) {
    rep.energies.push_back(boundary_energy(p, random_trial_profile(p, grid, rng), c));
  }
  rep.min_energy = *std::min_element(rep.energies.begin(), rep.energies.end());
  return rep;
}

SubadditivityReport subadditivity_check(const ProblemParams& p, const GridPtr& grid, double a1,
                                        const SharpConstants& c, const MinimizeOptions& opts) {
  if (!(a1 > 0.0 && a1 < p.a)) throw DomainError("invalid_parameter", "a1 must lie in (0, a)");
  const auto level = [&](double mass) {
    ProblemParams q = p;
    q.a = mass;
    const SolveReport r = minimize_from_gaussian(q, grid, c, opts);
    if (!r.converged) throw DomainError("convergence", "minimization at mass " + std::to_string(mass) + ": " + r.status);
    return r.energy;
  };
  SubadditivityReport rep;
  rep.m_a = level(p.a);
  rep.m_a1 = level(a1);
  rep.m_a_minus_a1 = level(p.a - a1);
  rep.gap = rep.m_a1 + rep.m_a_minus_a1 - rep.m_a;
  rep.strict = rep.gap > 0.0;
  return rep;
}

}  // namespace nls
