#include "nls/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <complex>
#include <numbers>
#include <utility>

#include "nls/functionals.hpp"
#include "nls/profiles.hpp"

namespace nls {

namespace {

using cd = std::complex<double>;

struct Stepper {
  const ProblemParams& p;
  const RadialGrid& g;
  const EvolveOptions& opts;
  Exponents x;
  Tridiagonal<double> k;
  double dt = 0.0;

  Stepper(const ProblemParams& params, const RadialGrid& grid, const EvolveOptions& o)
      : p(params), g(grid), opts(o), x(exponents(params)), k(grid.stiffness()) {}

  void set_dt(double h) { dt = h; }

  // Discrete H^1 norm. The first nodes carry weights near 1e-23 and the
  // solve leaves rounding noise there that no norm of interest sees, so the
  // iteration is judged in this norm rather than node by node.
  double h1_norm(const ComplexVector& v) const {
    double s = 0.0;
    const Vector& w = g.weights();
    for (int i = 0; i + 1 < v.size(); ++i) s += -k.upper(i) * std::norm(v(i) - v(i + 1)) + w(i) * std::norm(v(i));
    s += w(v.size() - 1) * std::norm(v(v.size() - 1));
    return std::sqrt(s);
  }

  // x^e with fast paths for the exponents of N = 3, 4 and q = 2.5, 3, 4.
  static double power(double x, double e) {
    if (e == 1.0) return x;
    if (e == 2.0) return x * x;
    if (e == 0.5) return std::sqrt(x);
    if (e == 0.25) return std::sqrt(std::sqrt(x));
    return std::pow(x, e);
  }

  // (r1^k - r0^k) / (r1 - r0), accurate for nearby arguments.
  static double power_quotient(double r0, double r1, double k) {
    if (r0 > r1) std::swap(r0, r1);
    if (r1 == r0) return k * power(r0, k - 1.0);
    if (r0 == 0.0) return power(r1, k - 1.0);
    const double delta = (r1 - r0) / r0;
    return power(r0, k - 1.0) * std::expm1(k * std::log1p(delta)) / delta;
  }

  // f = c * (a + b) / 2; returns the pointwise coefficient c.
  Vector coefficients(const ComplexVector& a, const ComplexVector& b) const {
    const int n = int(a.size());
    Vector out(n);
    for (int i = 0; i < n; ++i) {
      const cd mid = 0.5 * (a(i) + b(i));
      double coeff;
      if (opts.scheme == TimeScheme::Midpoint) {
        const double rho = std::norm(mid);
        coeff = rho > 0.0 ? power(rho, 0.5 * x.two_star - 1.0) + p.mu * power(rho, 0.5 * p.q - 1.0) : 0.0;
      } else {
        // 2 (F(r1) - F(r0)) / (r1 - r0) with F(rho) = rho^{2*/2}/2* + mu/q rho^{q/2}.
        const double r0 = std::norm(a(i)), r1 = std::norm(b(i));
        coeff = 2.0 * (power_quotient(r0, r1, 0.5 * x.two_star) / x.two_star +
                       p.mu / p.q * power_quotient(r0, r1, 0.5 * p.q));
      }
      out(i) = coeff;
    }
    return out;
  }

  // One implicit step from psi; false if the iteration fails. The
  // coefficient c of the nonlinearity is frozen at the current iterate and
  // moved into the implicit operator,
  //   (iW - dt/2 K + dt/2 W c) next = (iW + dt/2 K - dt/2 W c) psi,
  // so only the variation of c has to be resolved by iteration.
  bool step(const ComplexVector& psi, const ComplexVector& guess, ComplexVector& next) const {
    const int m = g.size() - 1;
    const Vector& w = g.weights();
    ComplexVector kpsi(m);
    for (int i = 0; i < m; ++i) {
      // Difference form: rows of K sum to zero away from r_max, and the
      // expanded product cancels badly where weights are tiny.
      cd v = -k.upper(i) * (psi(i) - psi(i + 1));
      if (i > 0) v -= k.lower(i - 1) * (psi(i) - psi(i - 1));
      kpsi(i) = v;
    }
    Tridiagonal<cd> lhs(m);
    for (int i = 0; i + 1 < m; ++i) {
      lhs.lower(i) = -0.5 * dt * k.lower(i);
      lhs.upper(i) = -0.5 * dt * k.upper(i);
    }
    next = guess;
    next(m) = 0.0;
    double last = std::numeric_limits<double>::infinity();
    const int iterations = opts.nonlinear ? opts.max_fixed_point : 1;
    for (int it = 0; it < iterations; ++it) {
      const Vector c = opts.nonlinear ? coefficients(psi, next) : Vector::Zero(m + 1);
      ComplexVector rhs(m);
      for (int i = 0; i < m; ++i) {
        const double wc = 0.5 * dt * w(i) * c(i);
        lhs.diag(i) = cd(-0.5 * dt * k.diag(i) + wc, w(i));
        rhs(i) = cd(-wc, w(i)) * psi(i) + 0.5 * dt * kpsi(i);
      }
      ComplexVector updated = ComplexVector::Zero(m + 1);
      updated.head(m) = solve_dominant(lhs, rhs);
      const double change = h1_norm(updated - next);
      const double size = std::max(1e-300, h1_norm(updated));
      next = std::move(updated);
      if (!std::isfinite(change)) return false;
      if (change <= opts.fixed_point_tol * size || !opts.nonlinear || change == 0.0) return true;
      if (it > 3 && change > 0.9 * last) return false;
      last = change;
    }
    return false;
  }
};

cd weighted_inner(const RadialGrid& g, const ComplexVector& a, const ComplexVector& b) {
  return (g.weights().cast<cd>().array() * a.conjugate().array() * b.array()).sum();
}

}  // namespace

double h1_distance(const ComplexProfile& psi, const Profile& u) {
  if (!psi.grid->same_layout(*u.grid)) throw std::invalid_argument("profiles live on different grids");
  const RadialGrid& g = *u.grid;
  const Tridiagonal<double> k = g.stiffness();
  const ComplexVector uc = u.values.cast<cd>();
  // Optimal phase from the H^1 inner product <u, psi>, then the distance
  // evaluated directly (no cancellation for nearby profiles).
  const Vector ku = k * u.values;
  const cd h1 = (ku.cast<cd>().array() * psi.values.array()).sum() + weighted_inner(g, uc, psi.values);
  const cd phase = std::abs(h1) > 0.0 ? h1 / std::abs(h1) : cd(1.0, 0.0);
  const ComplexProfile diff(psi.grid, psi.values - phase * uc);
  return std::sqrt(grad_l2_sq(diff) + lq_power(diff, 2.0));
}

TrajectorySummary evolve(const ProblemParams& p, const ComplexProfile& psi0, const EvolveOptions& opts) {
  if (!(opts.dt > 0.0)) throw DomainError("invalid_parameter", "dt must be positive");
  if (!(opts.t_end >= 0.0)) throw DomainError("invalid_parameter", "t_end must be nonnegative");
  if (!psi0.values.allFinite()) throw DomainError("invalid_parameter", "initial datum is not finite");
  exponents(p);
  const RadialGrid& g = *psi0.grid;
  if (opts.reference && !opts.reference->grid->same_layout(g)) {
    throw std::invalid_argument("reference profile lives on a different grid");
  }

  TrajectorySummary out;
  Stepper stepper(p, g, opts);
  ComplexVector psi = psi0.values;
  psi(psi.size() - 1) = 0.0;
  ComplexVector prev = psi;
  const ComplexVector start = psi;
  double unwrapped = 0.0, last_arg = 0.0;

  const auto record = [&](double t) {
    const ComplexProfile cur(psi0.grid, psi);
    const Norms n = norms(p, cur);
    out.times.push_back(t);
    out.mass.push_back(n.mass);
    out.energy.push_back(energy(p, n));
    out.grad_norm.push_back(std::sqrt(n.grad));
    if (opts.reference) out.h1_distance.push_back(h1_distance(cur, *opts.reference));
    out.modulus_drift.push_back((psi.cwiseAbs() - start.cwiseAbs()).cwiseAbs().maxCoeff());
    const cd overlap = weighted_inner(g, start, psi);
    const double arg = std::abs(overlap) > 0.0 ? std::arg(overlap) : 0.0;
    double delta = arg - last_arg;
    while (delta > std::numbers::pi) delta -= 2.0 * std::numbers::pi;
    while (delta < -std::numbers::pi) delta += 2.0 * std::numbers::pi;
    unwrapped += delta;
    last_arg = arg;
    out.phase.push_back(unwrapped);
  };

  record(0.0);
  const double grad0 = out.grad_norm.front();
  double t = 0.0;
  double dt = opts.dt;
  out.smallest_dt = dt;
  int since_cut = 0;
  int step = 0;
  const double eps_t = 1e-12 * std::max(1.0, opts.t_end);
  while (t < opts.t_end - eps_t) {
    const double h = std::min(dt, opts.t_end - t);
    stepper.set_dt(h);
    const ComplexVector guess = (step > 0 && h == opts.dt) ? ComplexVector(2.0 * psi - prev) : psi;
    ComplexVector next;
    if (!stepper.step(psi, guess, next)) {
      dt *= 0.5;
      since_cut = 0;
      out.smallest_dt = std::min(out.smallest_dt, dt);
      if (dt < opts.min_dt) {
        out.blowup = true;
        out.blowup_time = t;
        out.blowup_reason = "implicit step failed at dt below the minimum";
        break;
      }
      continue;
    }
    prev = psi;
    psi = std::move(next);
    t += h;
    ++step;
    if (dt < opts.dt && ++since_cut >= 20) {
      dt = std::min(opts.dt, 2.0 * dt);
      since_cut = 0;
    }
    const double grad = std::sqrt(grad_l2_sq(ComplexProfile(psi0.grid, psi)));
    const bool exploded = !std::isfinite(grad) || (grad0 > 0.0 && grad > opts.blowup_factor * grad0);
    if (exploded) {
      record(t);
      out.blowup = true;
      out.blowup_time = t;
      out.blowup_reason = "gradient norm exceeded the blow-up factor";
      break;
    }
    if (step % std::max(opts.sample_stride, 1) == 0 || t >= opts.t_end - eps_t) record(t);
  }
  out.steps = step;
  out.final = ComplexProfile(psi0.grid, psi);
  return out;
}

StabilityReport stability_probe(const ProblemParams& p, const Profile& u, double eps,
                                EvolveOptions opts) {
  validate(p);
  Profile perturbed = u;
  for (int i = 0; i < u.size(); ++i) {
    const double r = u.grid->nodes()(i);
    perturbed.values(i) *= 1.0 + eps * std::exp(-0.25 * r * r);
  }
  perturbed = normalize_mass(perturbed, p.a);
  opts.reference = u;
  StabilityReport rep;
  rep.trajectory = evolve(p, to_complex(perturbed), opts);
  const auto& d = rep.trajectory.h1_distance;
  rep.initial_distance = d.front();
  rep.max_distance = *std::max_element(d.begin(), d.end());
  rep.bounded = !rep.trajectory.blowup &&
                rep.max_distance <= rep.bound_factor * std::max(rep.initial_distance, 1e-6);
  return rep;
}

BlowupReport blowup_probe(const ProblemParams& p, const Profile& v, double amplification,
                          EvolveOptions opts) {
  validate(p);
  if (!(amplification > 0.0)) throw DomainError("invalid_parameter", "amplification must be positive");
  Profile datum = amplification == 1.0 ? v : rescale(v, amplification);
  datum.values(datum.size() - 1) = 0.0;
  datum = normalize_mass(datum, p.a);
  BlowupReport rep;
  rep.amplification = amplification;
  const Norms n = norms(p, datum);
  rep.initial_energy = energy(p, n);
  rep.initial_pohozaev = pohozaev(p, n);
  rep.trajectory = evolve(p, to_complex(datum), opts);
  const auto& gn = rep.trajectory.grad_norm;
  rep.max_grad_growth = *std::max_element(gn.begin(), gn.end()) / gn.front();
  rep.blowup = rep.trajectory.blowup;
  rep.blowup_time = rep.trajectory.blowup_time;
  return rep;
}

}  // namespace nls
