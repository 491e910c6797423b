#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "nls/constants.hpp"
#include "nls/grid.hpp"

namespace nls {

/// The four integrals every functional is built from.
struct Norms {
  double grad = 0.0;  // ||grad u||_2^2
  double crit = 0.0;  // ||u||_{2*}^{2*}
  double lq = 0.0;    // ||u||_q^q
  double mass = 0.0;  // ||u||_2^2
};

template <typename Scalar>
Norms norms(const ProblemParams& p, const BasicProfile<Scalar>& u);

/// E(u) = 1/2 ||grad u||^2 - 1/2* ||u||_{2*}^{2*} - mu/q ||u||_q^q.
double energy(const ProblemParams& p, const Norms& n);
template <typename Scalar>
double energy(const ProblemParams& p, const BasicProfile<Scalar>& u) {
  return energy(p, norms(p, u));
}

/// P(u) = ||grad u||^2 - ||u||_{2*}^{2*} - mu gamma_q ||u||_q^q.
double pohozaev(const ProblemParams& p, const Norms& n);
template <typename Scalar>
double pohozaev(const ProblemParams& p, const BasicProfile<Scalar>& u) {
  return pohozaev(p, norms(p, u));
}

/// lambda = (||grad u||^2 - ||u||_{2*}^{2*} - mu ||u||_q^q) / a.
double lagrange_multiplier(const ProblemParams& p, const Norms& n);
double lagrange_multiplier(const ProblemParams& p, const Profile& u);

/// |u|^{2*-2} u + mu |u|^{q-2} u, pointwise.
Vector nonlinearity(const ProblemParams& p, const Vector& u);

/// Gradient of the discrete energy with respect to the nodal values:
/// K u - W (|u|^{2*-2} u + mu |u|^{q-2} u), zero at the Dirichlet node.
Vector energy_gradient(const ProblemParams& p, const Profile& u);

/// Fiber maps along the mass-preserving dilation u_tau = tau^{N/2} u(tau x),
/// evaluated from the norms of u:
///   Psi_u(tau) = E(u_tau), Phi_u(tau) = tau Psi_u'(tau) = P(u_tau).
double fiber_energy(const ProblemParams& p, const Norms& n, double tau);
double fiber_pohozaev(const ProblemParams& p, const Norms& n, double tau);
double fiber_second(const ProblemParams& p, const Norms& n, double tau);

struct FiberSample {
  double tau, psi, phi;
};

struct FiberReport {
  Norms norms;
  std::optional<double> tau_plus;
  std::optional<double> tau_minus;
  std::optional<double> tau_u;        // critical q: the unique root
  std::optional<double> tau_u_scan;   // critical q: the same root from the scan
  std::optional<double> E_at_tau_plus;
  std::optional<double> E_at_tau_minus;
  std::optional<double> E_at_tau_u;
  std::optional<double> psi_second_at_tau_minus;
  bool decreasing = false;  // critical q with ||grad u||^2 <= mu gamma_q ||u||_q^q
  std::vector<FiberSample> samples;
};

struct FiberOptions {
  int samples = 512;
  double log_tau_min = -6.0;
  double log_tau_max = 6.0;
  double mass_tolerance = 1e-6;  // relative, for membership in S_a
};

/// Critical points of the fiber map of u in S_a.
///
/// q < 2 + 4/N, regimes Omega1/Omega2: the two roots tau+ < tau- of Phi_u,
/// bracketed on a log-spaced scan and polished by TOMS 748.
/// q = 2 + 4/N: the unique root from
///   tau^{2*-2} = (||grad u||^2 - mu gamma_q ||u||_q^q) / ||u||_{2*}^{2*}
/// when the numerator is positive (cross-checked on the scan), otherwise the
/// decreasing flag.
FiberReport fiber_critical_points(const ProblemParams& p, const Profile& u, const SharpConstants& c,
                                  const FiberOptions& opts = {});
FiberReport fiber_critical_points(const ProblemParams& p, const Profile& u,
                                  const FiberOptions& opts = {});

/// Throws DomainError("mass") unless | ||u||^2 - a | <= tol a.
void require_mass(const ProblemParams& p, const Profile& u, double tol = 1e-6);

/// Root of a continuous f on [lo, hi] with a sign change (TOMS 748).
double bracketed_root(const std::function<double(double)>& f, double lo, double hi,
                      int max_iterations = 200);

}  // namespace nls
