#include "nls/functionals.hpp"

#include <boost/math/tools/toms748_solve.hpp>

#include <cmath>
#include <sstream>

namespace nls {

template <typename Scalar>
Norms norms(const ProblemParams& p, const BasicProfile<Scalar>& u) {
  const Exponents x = exponents(p);
  if (u.grid->dim() != p.dim) throw std::invalid_argument("profile dimension differs from N");
  return {grad_l2_sq(u), lq_power(u, x.two_star), lq_power(u, p.q), lq_power(u, 2.0)};
}

template Norms norms(const ProblemParams&, const Profile&);
template Norms norms(const ProblemParams&, const ComplexProfile&);

double energy(const ProblemParams& p, const Norms& n) {
  const Exponents x = exponents(p);
  return 0.5 * n.grad - n.crit / x.two_star - p.mu / p.q * n.lq;
}

double pohozaev(const ProblemParams& p, const Norms& n) {
  const Exponents x = exponents(p);
  return n.grad - n.crit - p.mu * x.gamma_q * n.lq;
}

double lagrange_multiplier(const ProblemParams& p, const Norms& n) {
  return (n.grad - n.crit - p.mu * n.lq) / p.a;
}

double lagrange_multiplier(const ProblemParams& p, const Profile& u) {
  return lagrange_multiplier(p, norms(p, u));
}

Vector nonlinearity(const ProblemParams& p, const Vector& u) {
  const Exponents x = exponents(p);
  const Eigen::ArrayXd mag = u.array().abs();
  return (mag.pow(x.two_star - 2.0) * u.array() + p.mu * mag.pow(p.q - 2.0) * u.array()).matrix();
}

Vector energy_gradient(const ProblemParams& p, const Profile& u) {
  const Tridiagonal<double> k = u.grid->stiffness();
  Vector g = k * u.values - u.grid->weights().cwiseProduct(nonlinearity(p, u.values));
  g(g.size() - 1) = 0.0;
  return g;
}

double fiber_energy(const ProblemParams& p, const Norms& n, double tau) {
  const Exponents x = exponents(p);
  return 0.5 * tau * tau * n.grad - std::pow(tau, x.two_star) * n.crit / x.two_star -
         p.mu / p.q * std::pow(tau, x.q_gamma_q) * n.lq;
}

double fiber_pohozaev(const ProblemParams& p, const Norms& n, double tau) {
  const Exponents x = exponents(p);
  return tau * tau * n.grad - std::pow(tau, x.two_star) * n.crit -
         p.mu * x.gamma_q * std::pow(tau, x.q_gamma_q) * n.lq;
}

double fiber_second(const ProblemParams& p, const Norms& n, double tau) {
  const Exponents x = exponents(p);
  return n.grad - (x.two_star - 1.0) * std::pow(tau, x.two_star - 2.0) * n.crit -
         p.mu * x.gamma_q * (x.q_gamma_q - 1.0) * std::pow(tau, x.q_gamma_q - 2.0) * n.lq;
}

void require_mass(const ProblemParams& p, const Profile& u, double tol) {
  const double m = lq_power(u, 2.0);
  if (std::abs(m - p.a) > tol * p.a) {
    std::ostringstream os;
    os.precision(17);
    os << "profile mass " << m << " differs from a = " << p.a;
    throw DomainError("mass", os.str());
  }
}

double bracketed_root(const std::function<double(double)>& f, double lo, double hi,
                      int max_iterations) {
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) throw DomainError("bracket", "no sign change in root bracket");
  boost::uintmax_t iters = max_iterations;
  const auto r = boost::math::tools::toms748_solve(
      f, lo, hi, flo, fhi, boost::math::tools::eps_tolerance<double>(52), iters);
  return 0.5 * (r.first + r.second);
}

FiberReport fiber_critical_points(const ProblemParams& p, const Profile& u, const SharpConstants& c,
                                  const FiberOptions& opts) {
  validate(p);
  const Exponents x = exponents(p);
  if (x.q_class == QClass::Supercritical) {
    throw DomainError("regime", "fiber structure is analyzed for q <= 2 + 4/N only");
  }
  if (x.q_class == QClass::Subcritical && classify(p, c) == Regime::Omega3) {
    throw DomainError("regime",
                      "fiber structure is only established in Omega1 and Omega2; refusing Omega3");
  }
  require_mass(p, u, opts.mass_tolerance);

  FiberReport rep;
  const Norms n = norms(p, u);
  rep.norms = n;
  if (!(n.grad > 0.0) || !(n.crit > 0.0)) throw DomainError("structure", "degenerate profile");

  // Phi_u(tau) / tau^2 in t = log tau: same roots, and the bracketing scan is
  // insensitive to the overall growth of the fiber map.
  const auto reduced = [&](double t) {
    return n.grad - std::exp((x.two_star - 2.0) * t) * n.crit -
           p.mu * x.gamma_q * std::exp((x.q_gamma_q - 2.0) * t) * n.lq;
  };

  const int m = std::max(opts.samples, 2);
  std::vector<double> ts(m), gs(m);
  rep.samples.reserve(m);
  for (int i = 0; i < m; ++i) {
    ts[i] = opts.log_tau_min + (opts.log_tau_max - opts.log_tau_min) * i / (m - 1);
    gs[i] = reduced(ts[i]);
    const double tau = std::exp(ts[i]);
    rep.samples.push_back({tau, fiber_energy(p, n, tau), fiber_pohozaev(p, n, tau)});
  }
  std::vector<double> roots;
  for (int i = 0; i + 1 < m; ++i) {
    if (gs[i] == 0.0) {
      roots.push_back(ts[i]);
    } else if ((gs[i] > 0.0) != (gs[i + 1] > 0.0) && gs[i + 1] != 0.0) {
      roots.push_back(bracketed_root(reduced, ts[i], ts[i + 1]));
    }
  }

  if (x.q_class == QClass::Critical) {
    const double excess = n.grad - p.mu * x.gamma_q * n.lq;
    if (excess <= 0.0) {
      if (!roots.empty()) throw DomainError("structure", "fiber map has a root in the decreasing case");
      rep.decreasing = true;
      return rep;
    }
    const double tau = std::pow(excess / n.crit, 1.0 / (x.two_star - 2.0));
    rep.tau_u = tau;
    rep.E_at_tau_u = fiber_energy(p, n, tau);
    if (roots.size() == 1) rep.tau_u_scan = std::exp(roots.front());
    return rep;
  }

  if (roots.size() != 2) {
    std::ostringstream os;
    os << "expected two fiber critical points on the scan, found " << roots.size();
    throw DomainError("structure", os.str());
  }
  const double tp = std::exp(roots[0]), tm = std::exp(roots[1]);
  rep.tau_plus = tp;
  rep.tau_minus = tm;
  rep.E_at_tau_plus = fiber_energy(p, n, tp);
  rep.E_at_tau_minus = fiber_energy(p, n, tm);
  rep.psi_second_at_tau_minus = fiber_second(p, n, tm);
  return rep;
}

FiberReport fiber_critical_points(const ProblemParams& p, const Profile& u,
                                  const FiberOptions& opts) {
  return fiber_critical_points(p, u, sharp_constants(p.dim, p.q), opts);
}

}  // namespace nls
