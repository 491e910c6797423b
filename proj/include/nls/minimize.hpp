#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nls/constants.hpp"
#include "nls/functionals.hpp"
#include "nls/grid.hpp"

namespace nls {

struct TraceEntry {
  int iteration;
  double energy;
  double pohozaev;
  double grad;  // ||grad u||^2
};

/// Result of a constrained descent run.
struct SolveReport {
  Profile final;
  double energy = 0.0;
  double pohozaev = 0.0;
  double lambda = 0.0;
  double grad_residual = 0.0;  // mass-projected gradient, dual norm of the preconditioner
  double l2_residual = 0.0;    // || -Delta u - f(u) - lambda u ||_2 (diagnostic)
  double mass = 0.0;
  int iterations = 0;
  bool converged = false;
  bool boundary_hit = false;
  std::string status;
  std::vector<TraceEntry> trace;
};

struct MinimizeOptions {
  double tol = 1e-8;          // on grad_residual / max(1, |E|)
  int max_iterations = 20000;
  int trace_stride = 1;
  bool project_init = true;   // start from the fiber minimum u_{tau+} of the initial profile
  double armijo = 1e-4;
};

/// Local minimizer of E on V_a = S_a intersected with {||grad u||^2 < rho0}.
///
/// Preconditioned projected gradient: the direction is (K + sigma W)^{-1}
/// applied to the energy gradient, made tangent to the mass sphere in the
/// W inner product; sigma tracks -lambda. Every trial point is renormalized
/// to mass a exactly; steps that leave the ball are rejected and the step
/// is halved (Armijo backtracking, monotone energy).
SolveReport minimize_local(const ProblemParams& p, const Profile& init, const SharpConstants& c,
                           const MinimizeOptions& opts = {});
SolveReport minimize_local(const ProblemParams& p, const Profile& init,
                           const MinimizeOptions& opts = {});

/// Default grid for soliton problems: r_max = 50, n = 8192.
GridPtr soliton_grid(int dim, double r_max = 50.0, int n = 8192);

/// Gaussian initial guess with the default width 1.
SolveReport minimize_from_gaussian(const ProblemParams& p, const GridPtr& grid,
                                   const SharpConstants& c, const MinimizeOptions& opts = {});

/// Energy of u dilated onto the sphere ||grad u||^2 = rho0 (exact dilation).
double boundary_energy(const ProblemParams& p, const Profile& u, const SharpConstants& c);

struct BoundaryScanReport {
  double min_energy = 0.0;
  std::vector<double> energies;
};

/// `samples` seeded random profiles dilated onto the boundary of V_a.
BoundaryScanReport boundary_scan(const ProblemParams& p, const GridPtr& grid, int samples,
                                 std::uint64_t seed, const SharpConstants& c);

struct SubadditivityReport {
  double m_a = 0.0;
  double m_a1 = 0.0;
  double m_a_minus_a1 = 0.0;
  double gap = 0.0;  // m_{a1} + m_{a - a1} - m_a
  bool strict = false;
};

SubadditivityReport subadditivity_check(const ProblemParams& p, const GridPtr& grid, double a1,
                                        const SharpConstants& c, const MinimizeOptions& opts = {});

}  // namespace nls
