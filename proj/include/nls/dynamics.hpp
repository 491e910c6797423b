#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nls/constants.hpp"
#include "nls/grid.hpp"

namespace nls {

enum class TimeScheme {
  /// Implicit midpoint (Crank-Nicolson) with the nonlinearity at the midpoint.
  Midpoint,
  /// Delfour-Fortin-Payre: the nonlinearity as a difference quotient of the
  /// potential, which conserves the discrete energy exactly.
  Conservative,
};

struct EvolveOptions {
  double dt = 1e-3;
  double t_end = 1.0;
  int sample_stride = 10;          // record every stride-th step
  TimeScheme scheme = TimeScheme::Midpoint;
  double fixed_point_tol = 1e-13;  // relative H^1 update
  int max_fixed_point = 60;
  double blowup_factor = 1e3;      // grad_norm / initial grad_norm
  double min_dt = 1e-8;
  bool nonlinear = true;           // false evolves the free Schrodinger equation
  std::optional<Profile> reference;  // for h1_distance
};

struct TrajectorySummary {
  std::vector<double> times;
  std::vector<double> mass;
  std::vector<double> energy;
  std::vector<double> grad_norm;       // ||grad psi||_2
  std::vector<double> h1_distance;     // inf over phase of ||psi - e^{i theta} u||_{H^1}
  std::vector<double> modulus_drift;   // max_r | |psi(t)| - |psi(0)| |
  std::vector<double> phase;           // unwrapped arg <psi(0), psi(t)>
  bool blowup = false;
  std::optional<double> blowup_time;
  std::string blowup_reason;
  int steps = 0;
  double smallest_dt = 0.0;
  ComplexProfile final;
};

/// i psi_t + Delta psi + |psi|^{2*-2} psi + mu |psi|^{q-2} psi = 0 on the
/// radial grid, Dirichlet at r_max:  i W psi_t = K psi - W f(psi).
/// Each step solves the implicit relation by fixed-point iteration with a
/// complex tridiagonal solve; a step whose iteration fails is retried with dt
/// halved, and the run stops with the blow-up indicator once dt < min_dt or
/// the gradient norm exceeds blowup_factor times its initial value.
TrajectorySummary evolve(const ProblemParams& p, const ComplexProfile& psi0, const EvolveOptions& opts);

/// inf over theta of ||psi - e^{i theta} u||_{H^1}.
double h1_distance(const ComplexProfile& psi, const Profile& u);

struct StabilityReport {
  double initial_distance = 0.0;
  double max_distance = 0.0;
  double bound_factor = 10.0;
  bool bounded = false;  // max_distance <= bound_factor * initial_distance (or tiny)
  TrajectorySummary trajectory;
};

/// Evolves (1 + eps e^{-r^2/4}) u renormalized to mass a and tracks the
/// distance to the orbit of u.
StabilityReport stability_probe(const ProblemParams& p, const Profile& u, double eps,
                                EvolveOptions opts);

struct BlowupReport {
  double amplification = 1.0;
  double initial_energy = 0.0;
  double initial_pohozaev = 0.0;
  double max_grad_growth = 1.0;  // max grad_norm / initial grad_norm
  bool blowup = false;
  std::optional<double> blowup_time;
  TrajectorySummary trajectory;
};

/// Evolves the dilated datum v_tau, tau = amplification, renormalized to mass a.
BlowupReport blowup_probe(const ProblemParams& p, const Profile& v, double amplification,
                          EvolveOptions opts);

}  // namespace nls
