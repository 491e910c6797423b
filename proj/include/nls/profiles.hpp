#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "nls/constants.hpp"
#include "nls/grid.hpp"

namespace nls {

/// Bisection shooting for the ground state of Delta w - w + w^{q-1} = 0.
struct ShootingConfig {
  double lower = 1.0;          // w(0) giving a trajectory that turns back up
  double upper = 2.0;          // doubled until the trajectory crosses zero
  double step = 1e-3;          // RK4 step in the normalized radius
  double r_end = 80.0;         // integration horizon (normalized radius)
  double bracket_tol = 1e-12;  // on w(0)
  int max_iterations = 400;
};

/// RK4 trajectory of the normalized equation, sampled every `step`.
struct ShootingSolution {
  double w0 = 0.0;             // central value
  double step = 0.0;
  double r_start = 0.0;        // first sample radius (series start)
  double r_split = 0.0;        // beyond this the exponential tail is used
  std::vector<double> w;
  std::vector<double> dw;
  int dim = 3;
  double q = 2.0;
  int iterations = 0;

  /// w(r) from the Hermite interpolant of the samples, the Taylor start near
  /// 0 and the matched Bessel-type tail beyond r_split.
  double operator()(double r) const;
};

class ShootingError : public DomainError {
 public:
  ShootingError(const std::string& what, double lo, double hi)
      : DomainError("bracket", what), lo_(lo), hi_(hi) {}
  double lower() const { return lo_; }
  double upper() const { return hi_; }

 private:
  double lo_, hi_;
};

ShootingSolution shoot_ground_state(int dim, double q, const ShootingConfig& cfg = {});

/// Coefficients of the Weinstein equation
///   alpha Delta u - beta u + |u|^{q-2} u = 0,
/// alpha = (q-2)N/4, beta = 1 + (q-2)(2-N)/4.
struct WeinsteinCoefficients {
  double alpha;
  double beta;
  double q;
  /// Q(r) = amplitude * w(rate * r) in terms of the normalized solution w.
  double amplitude() const;
  double rate() const;
};

WeinsteinCoefficients weinstein_coefficients(int dim, double q);

/// Report attached to the grid ground state.
struct GroundStateReport {
  Profile profile;
  double residual_max = 0.0;   // max |alpha Delta_h Q - beta Q + Q^{q-1}| over resolved nodes
  double residual_l2 = 0.0;    // same residual in L^2
  int newton_iterations = 0;
  double shooting_w0 = 0.0;
};

/// Positive radial ground state Q of the Weinstein equation on `grid`:
/// shooting gives the ODE solution, Newton on the grid equations removes the
/// discretization residual.
GroundStateReport weinstein_ground_state(int dim, double q, const GridPtr& grid,
                                         const ShootingConfig& cfg = {});

/// Grid suited to Q for (N, q): r_max and core scale follow the decay rate.
GridPtr weinstein_grid(int dim, double q, int n = 8192);

/// C (b / (b^2 + r^2))^{(N-2)/2}.
Profile aubin_talenti(int dim, double b, const GridPtr& grid, double amplitude = 1.0);

/// Quintic smoothstep cutoff: 1 on [0, 1], 0 on [2, inf).
double cutoff(double t);

/// phi(r/n) u(r); rejects 2n > r_max.
Profile cutoff_profile(const Profile& u, double n);

/// c exp(-r^2/(2 sigma^2)) with c chosen analytically so ||u||_2^2 = a.
Profile gaussian(const ProblemParams& p, double sigma, const GridPtr& grid);

/// sqrt(a) u / ||u||_2.
Profile normalize_mass(const Profile& u, double a);

/// u~(x) = alpha u(beta x) with ||u~||_2^2 = a and ||u~||_q = 1; critical q only.
/// The result lives on the exactly dilated grid.
Profile normalize_mass_lq(const Profile& u, const ProblemParams& p);

/// Smooth compact bump supported in [r0, r1], peak 1.
Profile bump(const GridPtr& grid, double r0, double r1);

/// Seeded trial profile: Gaussian with random width times a random positive
/// low-order polynomial modulation, normalized to mass a.
Profile random_trial_profile(const ProblemParams& p, const GridPtr& grid, std::mt19937_64& rng);

}  // namespace nls
