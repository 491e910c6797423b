#include "nls/constants.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <utility>
#include <vector>

#include "nls/grid.hpp"
#include "nls/profiles.hpp"

namespace nls {

namespace {

struct Logs {
  double s2, qg, e, log_S, log_C;
};

Logs logs(const ProblemParams& p, const SharpConstants& c) {
  const Exponents x = exponents(p);
  return {x.two_star, x.q_gamma_q, 0.5 * p.q * (1.0 - x.gamma_q), std::log(c.sobolev),
          std::log(c.gagliardo_nirenberg)};
}

void require_subcritical(const ProblemParams& p, const char* what) {
  if (exponents(p).q_class != QClass::Subcritical) {
    throw DomainError("regime", std::string(what) + " is defined for q < 2 + 4/N only");
  }
}

// log of (2*/2 - 1 + ...) base of rho_{mu,a}, without the mu a^e factor.
double log_rho_base(const ProblemParams& p, const Logs& l) {
  return std::log(2.0 - l.qg) + std::log(l.s2) + 0.5 * l.s2 * l.log_S + p.q * l.log_C -
         std::log(p.q) - std::log(l.s2 - 2.0);
}

double log_k(const ProblemParams& p, const Logs& l) {
  return std::log(l.s2 - l.qg) - std::log(l.s2 * (2.0 - l.qg)) - 0.5 * l.s2 * l.log_S +
         (l.s2 - 2.0) / (l.s2 - l.qg) * log_rho_base(p, l);
}

// log of (2K)^{(q gamma_q - 2*)/(2* - 2)}.
double log_threshold(const ProblemParams& p, const Logs& l) {
  return (l.qg - l.s2) / (l.s2 - 2.0) * (std::log(2.0) + log_k(p, l));
}

// Bubble tail beyond R, in closed quadrature: with r = R/t the integrands of
// |u'|^2 r^{N-1} and u^{2*} r^{N-1} become polynomials over (b^2 t^2 + R^2)^N.
std::pair<double, double> bubble_tail(int dim, double b, double R) {
  constexpr int kPoints = 24;
  double grad = 0.0, crit = 0.0;
  // Gauss-Legendre nodes on [0, 1] by Newton on P_m.
  for (int i = 0; i < kPoints; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (kPoints + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= kPoints; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = kPoints * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 1.0 / ((1.0 - x * x) * dp * dp);  // halved for [0, 1]
    const double t = 0.5 * (x + 1.0);
    const double den = std::pow(b * b * t * t + R * R, dim);
    grad += w * std::pow(R, dim + 2) * std::pow(t, dim - 3) / den;
    crit += w * std::pow(R, dim) * std::pow(t, dim - 1) / den;
  }
  const double omega = 2.0 * std::pow(std::numbers::pi, 0.5 * dim) / std::tgamma(0.5 * dim);
  grad *= omega * (dim - 2.0) * (dim - 2.0) * std::pow(b, dim - 2.0);
  crit *= omega * std::pow(b, double(dim));
  return {grad, crit};
}

template <typename Key, typename F>
double cached(std::map<Key, double>& cache, std::mutex& m, const Key& key, F&& compute) {
  {
    std::lock_guard<std::mutex> lock(m);
    const auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  const double value = compute();
  std::lock_guard<std::mutex> lock(m);
  cache.emplace(key, value);
  return value;
}

}  // namespace

std::string to_string(Regime r) {
  switch (r) {
    case Regime::Omega1: return "Omega1";
    case Regime::Omega2: return "Omega2";
    case Regime::Omega3: return "Omega3";
    case Regime::BelowAbar: return "below_abar";
    case Regime::AtOrAboveAbar: return "at_or_above_abar";
  }
  return "unknown";
}

std::string to_string(QClass c) {
  switch (c) {
    case QClass::Subcritical: return "subcritical";
    case QClass::Critical: return "critical";
    case QClass::Supercritical: return "supercritical";
  }
  return "unknown";
}

void validate(const ProblemParams& p) {
  if (p.dim < 3) throw DomainError("invalid_parameter", "dimension N must be at least 3");
  const double two_star = 2.0 * p.dim / (p.dim - 2.0);
  if (!(p.q > 2.0 && p.q < two_star)) {
    throw DomainError("invalid_parameter", "q must lie in (2, 2N/(N-2))");
  }
  if (!(p.mu > 0.0) || !std::isfinite(p.mu)) throw DomainError("invalid_parameter", "mu must be positive");
  if (!(p.a > 0.0) || !std::isfinite(p.a)) throw DomainError("invalid_parameter", "mass a must be positive");
}

double l2_critical_exponent(int dim) { return 2.0 + 4.0 / dim; }

bool is_l2_critical(int dim, double q) {
  return std::abs(q - l2_critical_exponent(dim)) <= 1e-12 * q;
}

Exponents exponents(const ProblemParams& p) {
  if (p.dim < 3) throw DomainError("invalid_parameter", "dimension N must be at least 3");
  if (!(p.q > 2.0 && p.q < 2.0 * p.dim / (p.dim - 2.0))) {
    throw DomainError("invalid_parameter", "q must lie in (2, 2N/(N-2))");
  }
  Exponents x;
  x.two_star = 2.0 * p.dim / (p.dim - 2.0);
  if (is_l2_critical(p.dim, p.q)) {
    x.q_class = QClass::Critical;
    x.gamma_q = 2.0 / l2_critical_exponent(p.dim);
    x.q_gamma_q = 2.0;
  } else {
    x.q_class = p.q < l2_critical_exponent(p.dim) ? QClass::Subcritical : QClass::Supercritical;
    x.gamma_q = 0.5 * p.dim - p.dim / p.q;
    x.q_gamma_q = p.q * x.gamma_q;
  }
  return x;
}

double bubble_sobolev_quotient(int dim, double b, double r_max, int n) {
  const GridPtr g = make_grid(dim, r_max, n);
  const Profile u = aubin_talenti(dim, b, g);
  const auto [grad_tail, crit_tail] = bubble_tail(dim, b, r_max);
  const double two_star = 2.0 * dim / (dim - 2.0);
  const double grad = grad_l2_sq(u) + grad_tail;
  const double crit = lq_power(u, two_star) + crit_tail;
  return grad / std::pow(crit, 2.0 / two_star);
}

double sobolev_constant(int dim) {
  if (dim < 3) throw DomainError("invalid_parameter", "dimension N must be at least 3");
  static std::map<int, double> cache;
  static std::mutex m;
  return cached(cache, m, dim, [dim] {
    // Romberg over n, 2n, 4n: leading error O(n^-2), next O(n^-4).
    const double s1 = bubble_sobolev_quotient(dim, 1.0, 1e3, 4096);
    const double s2 = bubble_sobolev_quotient(dim, 1.0, 1e3, 8192);
    const double s3 = bubble_sobolev_quotient(dim, 1.0, 1e3, 16384);
    const double r1 = (4.0 * s2 - s1) / 3.0;
    const double r2 = (4.0 * s3 - s2) / 3.0;
    return (16.0 * r2 - r1) / 15.0;
  });
}

double sobolev_constant_closed_form(int dim) {
  const double ratio = std::exp(std::lgamma(0.5 * dim) - std::lgamma(double(dim)));
  return std::numbers::pi * dim * (dim - 2.0) * std::pow(ratio, 2.0 / dim);
}

double gn_constant(const ProblemParams& p) {
  const Exponents x = exponents(p);
  static std::map<std::pair<int, double>, double> cache;
  static std::mutex m;
  return cached(cache, m, std::make_pair(p.dim, p.q), [&] {
    const GroundStateReport gs = weinstein_ground_state(p.dim, p.q, weinstein_grid(p.dim, p.q));
    return gn_quotient(gs.profile, p.q, x.gamma_q);
  });
}

double gn_quotient(const Profile& u, double q, double gamma_q) {
  const double grad = std::sqrt(grad_l2_sq(u));
  const double l2 = lq_norm(u, 2.0);
  if (!(grad > 0.0) || !(l2 > 0.0)) throw std::invalid_argument("GN quotient of the zero profile");
  return lq_norm(u, q) / (std::pow(grad, gamma_q) * std::pow(l2, 1.0 - gamma_q));
}

SharpConstants sharp_constants(int dim, double q) {
  ProblemParams p;
  p.dim = dim;
  p.q = q;
  return {sobolev_constant(dim), gn_constant(p)};
}

double f_mu_a(const ProblemParams& p, const SharpConstants& c, double rho) {
  if (!(rho > 0.0)) throw std::invalid_argument("rho must be positive");
  const Logs l = logs(p, c);
  const double sob = std::exp(-0.5 * l.s2 * l.log_S + (0.5 * l.s2 - 1.0) * std::log(rho)) / l.s2;
  const double gn = std::exp(std::log(p.mu / p.q) + p.q * l.log_C + l.e * std::log(p.a) +
                             (0.5 * l.qg - 1.0) * std::log(rho));
  return 0.5 - sob - gn;
}

double rho_crit(const ProblemParams& p, const SharpConstants& c) {
  require_subcritical(p, "rho_{mu,a}");
  const Logs l = logs(p, c);
  return std::exp(2.0 / (l.s2 - l.qg) * (log_rho_base(p, l) + log_mass_coupling(p)));
}

double k_constant(const ProblemParams& p, const SharpConstants& c) {
  require_subcritical(p, "K");
  return std::exp(log_k(p, logs(p, c)));
}

double a0(const ProblemParams& p, const SharpConstants& c) {
  require_subcritical(p, "a0");
  const Logs l = logs(p, c);
  return std::exp((log_threshold(p, l) - std::log(p.mu)) / l.e);
}

double rho0(const ProblemParams& p, const SharpConstants& c) {
  require_subcritical(p, "rho0");
  const Logs l = logs(p, c);
  return std::exp(2.0 / (l.s2 - 2.0) *
                  (std::log(l.s2 * (2.0 - l.qg)) + 0.5 * l.s2 * l.log_S -
                   std::log(2.0 * (l.s2 - l.qg))));
}

double abar(const ProblemParams& p, const SharpConstants& c) {
  if (exponents(p).q_class != QClass::Critical) {
    throw DomainError("regime", "abar_N is defined for q = 2 + 4/N only");
  }
  return std::exp(std::log(p.q / 2.0) - p.q * std::log(c.gagliardo_nirenberg));
}

double log_mass_coupling(const ProblemParams& p) {
  const Exponents x = exponents(p);
  return std::log(p.mu) + 0.5 * p.q * (1.0 - x.gamma_q) * std::log(p.a);
}

Regime classify(const ProblemParams& p, const SharpConstants& c) {
  const Exponents x = exponents(p);
  const double lhs = log_mass_coupling(p);
  switch (x.q_class) {
    case QClass::Subcritical: {
      const double rhs = log_threshold(p, logs(p, c));
      if (std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(rhs))) return Regime::Omega2;
      return lhs < rhs ? Regime::Omega1 : Regime::Omega3;
    }
    case QClass::Critical: {
      const double rhs = std::log(abar(p, c));
      if (std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(rhs))) return Regime::AtOrAboveAbar;
      return lhs < rhs ? Regime::BelowAbar : Regime::AtOrAboveAbar;
    }
    case QClass::Supercritical:
      break;
  }
  throw DomainError("regime", "no regime partition is defined for q > 2 + 4/N");
}

Thresholds thresholds(const ProblemParams& p, const SharpConstants& c) {
  const Exponents x = exponents(p);
  Thresholds t;
  t.S = c.sobolev;
  t.C_Nq = c.gagliardo_nirenberg;
  if (x.q_class == QClass::Subcritical) {
    t.K = k_constant(p, c);
    t.a0 = a0(p, c);
    t.rho_crit = rho_crit(p, c);
    t.rho0 = rho0(p, c);
  } else if (x.q_class == QClass::Critical) {
    t.abar_N = abar(p, c);
  }
  if (x.q_class != QClass::Supercritical) t.regime = classify(p, c);
  return t;
}

Thresholds thresholds(const ProblemParams& p) {
  validate(p);
  return thresholds(p, sharp_constants(p.dim, p.q));
}

}  // namespace nls
