#include "nls/mountainpass.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "nls/parallel.hpp"
#include "nls/profiles.hpp"

namespace nls {

namespace {

// Phi_u(tau)/tau^2 as a function of t = log tau.
struct ReducedFiber {
  const ProblemParams& p;
  const Norms& n;
  Exponents x;

  double operator()(double t) const {
    return n.grad - std::exp((x.two_star - 2.0) * t) * n.crit -
           p.mu * x.gamma_q * std::exp((x.q_gamma_q - 2.0) * t) * n.lq;
  }
};

// tau- for subcritical q, tau_u at critical q.
std::optional<double> tau_minus(const ProblemParams& p, const Norms& n) {
  const Exponents x = exponents(p);
  if (!(n.crit > 0.0) || !(n.grad > 0.0)) return std::nullopt;
  if (x.q_class == QClass::Critical) {
    const double excess = n.grad - p.mu * x.gamma_q * n.lq;
    if (excess <= 0.0) return std::nullopt;
    return std::pow(excess / n.crit, 1.0 / (x.two_star - 2.0));
  }
  if (x.q_class != QClass::Subcritical) return std::nullopt;
  const ReducedFiber g{p, n, x};
  // The reduced fiber map is maximal where its t-derivative vanishes.
  const double t_star = std::log(p.mu * x.gamma_q * (2.0 - x.q_gamma_q) * n.lq /
                                 ((x.two_star - 2.0) * n.crit)) /
                        (x.two_star - x.q_gamma_q);
  if (!(g(t_star) > 0.0)) return std::nullopt;
  double hi = t_star + 1.0;
  for (int k = 0; g(hi) > 0.0; ++k) {
    if (k > 60) return std::nullopt;
    hi += 1.0;
  }
  return std::exp(bracketed_root(g, t_star, hi));
}

void require_subcritical_admissible(const ProblemParams& p, const SharpConstants& c) {
  validate(p);
  if (exponents(p).q_class != QClass::Subcritical) {
    throw DomainError("regime", "the mountain-pass level is estimated for q < 2 + 4/N");
  }
  if (classify(p, c) == Regime::Omega3) {
    throw DomainError("regime", "the mountain-pass level is estimated in Omega1 and Omega2 only");
  }
}

void require_critical(const ProblemParams& p) {
  validate(p);
  if (exponents(p).q_class != QClass::Critical) {
    throw DomainError("regime", "the c^po sequences are built at q = 2 + 4/N only");
  }
}

Tridiagonal<double> interior_operator(const RadialGrid& g, double kinetic, double sigma) {
  const Tridiagonal<double> k = g.stiffness();
  const int m = g.size() - 1;
  Tridiagonal<double> a(m);
  a.diag = kinetic * k.diag.head(m) + sigma * g.weights().head(m);
  a.lower = kinetic * k.lower.head(m - 1);
  a.upper = kinetic * k.upper.head(m - 1);
  return a;
}

Vector apply_inverse(const Tridiagonal<double>& a, const Vector& v) {
  Vector out = Vector::Zero(v.size());
  out.head(a.size()) = solve_dominant(a, v.head(a.size()));
  return out;
}

// Gradient of u -> Psi_u(tau) at fixed tau (envelope of the fiber maximum).
Vector projected_gradient(const ProblemParams& p, const Profile& u, double tau) {
  const Exponents x = exponents(p);
  const RadialGrid& g = *u.grid;
  const Eigen::ArrayXd mag = u.values.array().abs();
  const Eigen::ArrayXd f = std::pow(tau, x.two_star) * mag.pow(x.two_star - 2.0) * u.values.array() +
                           p.mu * std::pow(tau, x.q_gamma_q) * mag.pow(p.q - 2.0) * u.values.array();
  Vector grad = tau * tau * (g.stiffness() * u.values) - g.weights().cwiseProduct(f.matrix());
  grad(grad.size() - 1) = 0.0;
  return grad;
}

Profile with_zero_boundary(Profile u) {
  u.values(u.size() - 1) = 0.0;
  return u;
}

bool strictly_decreasing_positive(const std::vector<CpoItem>& items) {
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (!(items[i].ratio > 0.0) || !(items[i].projected_energy > 0.0)) return false;
    if (i > 0 && !(items[i].ratio < items[i - 1].ratio &&
                   items[i].projected_energy < items[i - 1].projected_energy)) {
      return false;
    }
  }
  return !items.empty();
}

CpoItem cpo_item(const ProblemParams& p, const Profile& u, double parameter) {
  const Exponents x = exponents(p);
  const Norms n = norms(p, u);
  CpoItem it;
  it.parameter = parameter;
  it.mass = n.mass;
  it.excess = n.grad - p.mu * x.gamma_q * n.lq;
  it.l2star_norm = std::pow(n.crit, 1.0 / x.two_star);
  it.lq_norm = std::pow(n.lq, 1.0 / p.q);
  it.ratio = it.excess / (it.l2star_norm * it.l2star_norm);
  it.closed_form = it.ratio > 0.0 ? std::pow(it.ratio, 0.5 * p.dim) / p.dim : 0.0;
  it.projected_energy = it.excess > 0.0 ? projected_energy(p, n) : 0.0;
  return it;
}

}  // namespace

double projected_energy(const ProblemParams& p, const Norms& n) {
  const auto tau = tau_minus(p, n);
  if (!tau) throw DomainError("regime", "the fiber map has no maximum point (no tau-)");
  return fiber_energy(p, n, *tau);
}

double projected_energy(const ProblemParams& p, const Profile& u) {
  return projected_energy(p, norms(p, u));
}

Profile project_to_pohozaev_minus(const ProblemParams& p, const Profile& u, const SharpConstants& c) {
  validate(p);
  const Exponents x = exponents(p);
  if (x.q_class == QClass::Supercritical) {
    throw DomainError("regime", "projection onto P_{a,-} requires q <= 2 + 4/N");
  }
  if (x.q_class == QClass::Subcritical && classify(p, c) == Regime::Omega3) {
    throw DomainError("regime", "projection onto P_{a,-} requires Omega1 or Omega2");
  }
  require_mass(p, u);
  const auto tau = tau_minus(p, norms(p, u));
  if (!tau) {
    throw DomainError("regime", x.q_class == QClass::Critical
                                    ? "fiber map strictly decreasing: no admissible dilation"
                                    : "fiber map has no maximum point");
  }
  const auto resampled = [&](double t) {
    return normalize_mass(with_zero_boundary(rescale(u, t)), p.a);
  };
  const auto discrete_p = [&](double log_t) { return pohozaev(p, resampled(std::exp(log_t))); };
  const double t0 = std::log(*tau);
  // P decreases through its root at tau-: bracket around the analytic value.
  for (double width = 1e-3; width < 1.0; width *= 4.0) {
    const double lo = t0 - width, hi = t0 + width;
    if (discrete_p(lo) > 0.0 && discrete_p(hi) < 0.0) {
      return resampled(std::exp(bracketed_root(discrete_p, lo, hi)));
    }
  }
  throw DomainError("bracket", "discrete Pohozaev root not bracketed near the fiber maximum");
}

ProjectedDescent descend_projected_energy(const ProblemParams& p, const Profile& init,
                                          int max_iterations, double tol) {
  const RadialGrid& g = *init.grid;
  const Vector& w = g.weights();
  ProjectedDescent out;
  Profile u = normalize_mass(with_zero_boundary(init), p.a);
  Norms nu = norms(p, u);
  auto tau = tau_minus(p, nu);
  if (!tau) throw DomainError("regime", "initial profile has no fiber maximum");
  double level = fiber_energy(p, nu, *tau);
  double step = 1.0;
  int it = 0;
  for (; it < max_iterations; ++it) {
    // Keep the fiber maximum near tau = 1 so that u itself stays resolved.
    if (std::abs(std::log(*tau)) > 0.05) {
      Profile v = normalize_mass(with_zero_boundary(rescale(u, *tau)), p.a);
      const Norms nv = norms(p, v);
      const auto tv = tau_minus(p, nv);
      if (tv) {
        u = std::move(v);
        nu = nv;
        tau = tv;
        level = fiber_energy(p, nu, *tau);
      }
    }
    const Vector grad = projected_gradient(p, u, *tau);
    const Vector wu = w.cwiseProduct(u.values);
    const double nu_mult = u.values.dot(grad) / u.values.dot(wu);
    const Tridiagonal<double> precond =
        interior_operator(g, (*tau) * (*tau), std::max(-nu_mult, 1e-3));
    const Vector proj = grad - nu_mult * wu;
    const Vector z = apply_inverse(precond, proj);
    out.residual = std::sqrt(std::max(0.0, proj.dot(z)));
    if (out.residual < tol * std::max(1.0, std::abs(level))) {
      out.converged = true;
      break;
    }
    const Vector y = apply_inverse(precond, wu);
    const Vector d = z - (wu.dot(z) / wu.dot(y)) * y;
    const double slope = proj.dot(d);
    if (!(slope > 0.0)) break;
    const double noise = 64.0 * std::numeric_limits<double>::epsilon() *
                         (0.5 * nu.grad + nu.crit + p.mu * nu.lq) * std::max(1.0, (*tau) * (*tau));

    step = std::min(1.0, 2.0 * step);
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls, step *= 0.5) {
      Profile v = normalize_mass(Profile(u.grid, u.values - step * d), p.a);
      const Norms nv = norms(p, v);
      const auto tv = tau_minus(p, nv);
      if (!tv) continue;
      const double lv = fiber_energy(p, nv, *tv);
      if (lv <= level - 1e-4 * step * slope || (step * slope < noise && lv <= level + noise)) {
        u = std::move(v);
        nu = nv;
        tau = tv;
        level = lv;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  out.profile = std::move(u);
  out.level = level;
  out.iterations = it;
  return out;
}

LevelEstimate estimate_mp_level(const ProblemParams& p, const GridPtr& grid, const SharpConstants& c,
                                const FamilySpec& spec, const std::optional<SolveReport>& minimizer) {
  require_subcritical_admissible(p, c);
  if (spec.members < 1) throw std::invalid_argument("trial family needs at least one member");
  LevelEstimate est;
  const SolveReport min = minimizer ? *minimizer : minimize_from_gaussian(p, grid, c);
  if (!min.converged) throw DomainError("convergence", "local minimizer did not converge: " + min.status);
  est.m_a = min.energy;
  est.upper_bound = est.m_a + std::pow(c.sobolev, 0.5 * p.dim) / p.dim;

  const Profile bubble = cutoff_profile(aubin_talenti(p.dim, spec.bubble_b, grid), spec.cutoff_radius);
  const Profile& base = min.final;
  std::vector<std::optional<double>> levels(spec.members);
  std::vector<std::string> failures(spec.members);
  const auto member = [&](std::size_t i) {
    const double s = spec.members == 1 ? 0.0 : spec.s_max * double(i) / (spec.members - 1);
    return normalize_mass(Profile(grid, base.values + s * bubble.values), p.a);
  };
  parallel_for(levels.size(), [&](std::size_t i) {
    try {
      levels[i] = projected_energy(p, member(i));
    } catch (const DomainError& e) {
      failures[i] = e.what();
    }
  });
  int best = -1;
  for (int i = 0; i < spec.members; ++i) {
    const double s = spec.members == 1 ? 0.0 : spec.s_max * double(i) / (spec.members - 1);
    if (!levels[i]) continue;
    est.family_trace.push_back({s, *levels[i]});
    if (best < 0 || *levels[i] < *levels[best]) best = i;
  }
  if (best < 0) {
    std::ostringstream os;
    os << "no family member admits a projection onto P_{a,-}";
    for (const auto& f : failures) {
      if (!f.empty()) {
        os << "; " << f;
        break;
      }
    }
    throw DomainError("structure", os.str());
  }
  est.family_level = *levels[best];

  Profile start = member(best);
  est.level = est.family_level;
  if (spec.refine_iterations > 0) {
    const ProjectedDescent d = descend_projected_energy(p, start, spec.refine_iterations, spec.refine_tol);
    est.refine_iterations = d.iterations;
    est.refine_residual = d.residual;
    if (d.level < est.level) {
      est.level = d.level;
      start = d.profile;
    }
  }
  est.witness = project_to_pohozaev_minus(p, start, c);
  const Norms wn = norms(p, est.witness);
  est.witness_energy = energy(p, wn);
  est.witness_pohozaev = pohozaev(p, wn);
  est.witness_mass = wn.mass;
  est.witness_lambda = lagrange_multiplier(p, wn);
  est.accepted = est.level > 0.0 && est.level < est.upper_bound;
  return est;
}

PositivityProbe omega2_positivity_probe(const ProblemParams& p, const GridPtr& grid, int trials,
                                        std::uint64_t seed, const SharpConstants& c,
                                        int descent_steps) {
  require_subcritical_admissible(p, c);
  if (trials < 1) throw std::invalid_argument("probe needs at least one trial");
  const Exponents x = exponents(p);
  const double r0 = rho0(p, c);
  std::vector<double> levels(trials), rho_gap(trials), gn_ratio(trials);
  parallel_for(std::size_t(trials), [&](std::size_t i) {
    std::seed_seq seq{std::uint64_t(seed), std::uint64_t(i)};
    std::mt19937_64 rng(seq);
    Profile u = random_trial_profile(p, grid, rng);
    if (descent_steps > 0) u = descend_projected_energy(p, u, descent_steps, 0.0).profile;
    const Norms n = norms(p, u);
    const auto tau = tau_minus(p, n);
    if (!tau) throw DomainError("structure", "trial profile has no fiber maximum");
    levels[i] = fiber_energy(p, n, *tau);
    rho_gap[i] = std::abs((*tau) * (*tau) * n.grad - r0);
    gn_ratio[i] = gn_quotient(u, p.q, x.gamma_q) / c.gagliardo_nirenberg;
  });
  PositivityProbe rep;
  rep.levels = levels;
  rep.min_level = *std::min_element(levels.begin(), levels.end());
  std::vector<int> order(trials);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return levels[a] < levels[b]; });
  const int low = std::max(1, trials / 10);
  for (int k = 0; k < low; ++k) {
    rep.low_rho_gap.push_back(rho_gap[order[k]]);
    rep.low_gn_ratio.push_back(gn_ratio[order[k]]);
  }
  rep.positive = rep.min_level > 0.0;
  return rep;
}

double interpolation_theta(int dim, double q) {
  const double two_star = 2.0 * dim / (dim - 2.0);
  return (0.5 - 1.0 / q) / (0.5 - 1.0 / two_star);
}

double mass_for_abar_multiple(const ProblemParams& p, const SharpConstants& c, double multiple) {
  require_critical(p);
  if (!(multiple > 0.0)) throw DomainError("invalid_parameter", "mass multiple must be positive");
  const Exponents x = exponents(p);
  const double e = 0.5 * p.q * (1.0 - x.gamma_q);
  return std::exp((std::log(multiple * abar(p, c)) - std::log(p.mu)) / e);
}

CpoSequenceReport cpo_sequence_case1(const ProblemParams& p, const std::vector<double>& n_values,
                                     const SharpConstants& c) {
  require_critical(p);
  if (n_values.empty()) throw std::invalid_argument("case 1 needs at least one cutoff radius");
  const Exponents x = exponents(p);
  const double n_max = *std::max_element(n_values.begin(), n_values.end());
  if (!(*std::min_element(n_values.begin(), n_values.end()) > 0.0)) {
    throw DomainError("invalid_parameter", "cutoff radii must be positive");
  }

  const GroundStateReport gs = weinstein_ground_state(p.dim, p.q, weinstein_grid(p.dim, p.q));
  // Widen Q so that its tail at the largest radius is still above the
  // rounding level of the ratio (about e^-7 in amplitude).
  const double rate = weinstein_coefficients(p.dim, p.q).rate();
  const double widen = std::min(1.0, 7.0 / (rate * n_max));
  const Profile wide = dilate(gs.profile, widen);
  if (2.0 * n_max > wide.grid->r_max()) {
    throw DomainError("invalid_parameter", "2 max(n) exceeds the grid radius");
  }

  CpoSequenceReport rep;
  rep.case_id = 1;
  rep.mu = p.mu;
  const double e = 0.5 * p.q * (1.0 - x.gamma_q);
  const double c_grid = gn_quotient(wide, p.q, x.gamma_q);
  rep.abar = p.q / (2.0 * std::pow(c_grid, p.q));
  rep.a = std::exp((std::log(rep.abar) - std::log(p.mu)) / e);
  ProblemParams pa = p;
  pa.a = rep.a;
  const Profile u = normalize_mass(wide, rep.a);

  rep.theta = interpolation_theta(p.dim, p.q);
  rep.interpolation_bound = std::pow(rep.a, -(1.0 - rep.theta) / (2.0 * rep.theta));
  rep.epsilon = 0.05 * std::pow(c.sobolev, 0.5 * p.dim) / p.dim;
  rep.items.resize(n_values.size());
  parallel_for(n_values.size(), [&](std::size_t i) {
    const Profile un = normalize_mass(cutoff_profile(u, n_values[i]), rep.a);
    rep.items[i] = cpo_item(pa, un, n_values[i]);
  });
  rep.monotone = strictly_decreasing_positive(rep.items);
  rep.below_epsilon = rep.items.back().projected_energy < rep.epsilon;
  return rep;
}

CpoSequenceReport cpo_sequence_case2(const ProblemParams& p, const std::vector<double>& A_values,
                                     const SharpConstants& c) {
  require_critical(p);
  if (A_values.empty()) throw std::invalid_argument("case 2 needs at least one value A_n");
  for (std::size_t i = 0; i < A_values.size(); ++i) {
    if (!(A_values[i] > 0.0) || (i > 0 && !(A_values[i] < A_values[i - 1]))) {
      throw DomainError("invalid_parameter", "A_n must be positive and strictly decreasing");
    }
  }
  const Exponents x = exponents(p);
  const double e = 0.5 * p.q * (1.0 - x.gamma_q);
  const double ab = abar(p, c);
  if (!(log_mass_coupling(p) > std::log(ab) + 1e-10 * std::max(1.0, std::abs(std::log(ab))))) {
    throw DomainError("regime", "case 2 requires mu a^{q(1-gamma_q)/2} > abar_N");
  }

  const GridPtr grid = weinstein_grid(p.dim, p.q);
  const Profile q0 = weinstein_ground_state(p.dim, p.q, grid).profile;
  const Profile g = bump(grid, 1.0, 2.0);
  // f(u) = ||grad u||^{q gamma} ||u||_2^{q(1-gamma)} / ||u||_q^q, at q gamma = 2.
  const auto f = [&](double s) {
    const Norms n = norms(p, Profile(grid, q0.values + s * g.values));
    return n.grad * std::pow(n.mass, e) / n.lq;
  };

  CpoSequenceReport rep;
  rep.case_id = 2;
  rep.mu = p.mu;
  rep.a = p.a;
  rep.abar = ab;
  rep.theta = interpolation_theta(p.dim, p.q);
  rep.interpolation_bound = std::pow(p.a, -(1.0 - rep.theta) / (2.0 * rep.theta));
  rep.epsilon = 0.05 * std::pow(c.sobolev, 0.5 * p.dim) / p.dim;
  rep.items.resize(A_values.size());
  parallel_for(A_values.size(), [&](std::size_t i) {
    const double target = (p.mu * x.gamma_q + A_values[i]) * std::pow(p.a, e);
    double hi = 1.0;
    for (int k = 0; f(hi) < target; ++k) {
      if (k > 60) {
        std::ostringstream os;
        os.precision(17);
        os << "f(u_s) never reaches M_n = " << target << "; achieved range [" << f(0.0) << ", "
           << f(hi) << "]";
        throw DomainError("bracket", os.str());
      }
      hi *= 2.0;
    }
    const double s = bracketed_root([&](double t) { return f(t) - target; }, 0.0, hi);
    const Profile un = normalize_mass_lq(Profile(grid, q0.values + s * g.values), p);
    rep.items[i] = cpo_item(p, un, A_values[i]);
    rep.items[i].s = s;
  });
  rep.monotone = strictly_decreasing_positive(rep.items);
  rep.below_epsilon = rep.items.back().projected_energy < rep.epsilon;
  return rep;
}

}  // namespace nls
