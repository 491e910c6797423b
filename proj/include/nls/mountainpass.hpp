#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nls/constants.hpp"
#include "nls/functionals.hpp"
#include "nls/grid.hpp"
#include "nls/minimize.hpp"

namespace nls {

/// u_{tau-} (or u_{tau_u} at critical q) resampled on the grid of u. The
/// analytic root is polished against the discrete P of the resampled,
/// renormalized profile, so |P| is at rounding level on the returned grid.
Profile project_to_pohozaev_minus(const ProblemParams& p, const Profile& u, const SharpConstants& c);

/// max over tau of E(u_tau) for u in S_a: Psi_u(tau-) (subcritical) or
/// Psi_u(tau_u) (critical). Throws if no such critical point exists.
double projected_energy(const ProblemParams& p, const Norms& n);
double projected_energy(const ProblemParams& p, const Profile& u);

struct FamilySample {
  double s;
  double projected_energy;
};

/// Trial family u_min + s * (cutoff bubble), renormalized to mass a.
struct FamilySpec {
  int members = 64;
  double s_max = 4.0;
  double bubble_b = 0.05;       // concentration of the bubble
  double cutoff_radius = 1.0;   // bubble cut off on [R, 2R]
  int refine_iterations = 3000; // descent on the projected energy after the sweep
  double refine_tol = 1e-8;
};

struct LevelEstimate {
  double level = 0.0;
  double family_level = 0.0;  // best value of the sweep alone
  Profile witness;
  double witness_energy = 0.0;
  double witness_pohozaev = 0.0;
  double witness_mass = 0.0;
  double witness_lambda = 0.0;
  double m_a = 0.0;
  double upper_bound = 0.0;   // m_a + S^{N/2}/N
  bool accepted = false;      // 0 < level < upper_bound
  int refine_iterations = 0;
  double refine_residual = 0.0;
  std::vector<FamilySample> family_trace;
};

/// Upper estimate of inf over P_{a,-} of E: sweep of the soliton-plus-bubble
/// family, then descent of u -> max_tau E(u_tau) on S_a started from the best
/// member. The final profile is projected onto P_{a,-} on the base grid.
LevelEstimate estimate_mp_level(const ProblemParams& p, const GridPtr& grid, const SharpConstants& c,
                                const FamilySpec& spec = {},
                                const std::optional<SolveReport>& minimizer = std::nullopt);

struct ProjectedDescent {
  Profile profile;  // not projected; its fiber maximum carries the level
  double level = 0.0;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Preconditioned projected descent of J(u) = max_tau E(u_tau) on S_a.
ProjectedDescent descend_projected_energy(const ProblemParams& p, const Profile& init,
                                          int max_iterations, double tol);

struct PositivityProbe {
  double min_level = 0.0;
  std::vector<double> levels;
  /// For the lowest tenth of the trials: | ||grad u||^2 - rho0 | at the
  /// projected member, and its GN quotient over the sharp constant.
  std::vector<double> low_rho_gap;
  std::vector<double> low_gn_ratio;
  bool positive = false;
};

PositivityProbe omega2_positivity_probe(const ProblemParams& p, const GridPtr& grid, int trials,
                                        std::uint64_t seed, const SharpConstants& c,
                                        int descent_steps = 25);

struct CpoItem {
  double parameter = 0.0;        // n (case 1) or A_n (case 2)
  double ratio = 0.0;            // (||grad u||^2 - mu gamma_q ||u||_q^q) / ||u||_{2*}^2
  double projected_energy = 0.0; // E(u_{n, tau_u}) from the fiber map
  double closed_form = 0.0;      // (1/N) ratio^{N/2}
  double mass = 0.0;
  double excess = 0.0;           // ||grad u||^2 - mu gamma_q ||u||_q^q
  double l2star_norm = 0.0;      // ||u||_{2*}
  double lq_norm = 0.0;          // ||u||_q
  double s = 0.0;                // case 2 family parameter
};

struct CpoSequenceReport {
  int case_id = 1;
  double mu = 0.0;
  double a = 0.0;
  double abar = 0.0;             // the value of abar_N used for the mass
  double theta = 0.0;            // 1/q = (1 - theta)/2 + theta/2*
  double interpolation_bound = 0.0;  // a^{-(1-theta)/(2 theta)}
  double epsilon = 0.0;          // 0.05 S^{N/2}/N
  std::vector<CpoItem> items;
  bool monotone = false;         // ratios and energies positive, strictly decreasing
  bool below_epsilon = false;    // final projected energy < epsilon
};

/// Cutoff construction at mu a^{q(1-gamma_q)/2} = abar_N. The mass a is fixed
/// from mu; abar_N is taken from the GN quotient of the base ground state on
/// the working grid, so that the discrete base profile attains equality.
CpoSequenceReport cpo_sequence_case1(const ProblemParams& p, const std::vector<double>& n_values,
                                     const SharpConstants& c);

/// Family construction at mu a^{q(1-gamma_q)/2} > abar_N (a taken from p).
CpoSequenceReport cpo_sequence_case2(const ProblemParams& p, const std::vector<double>& A_values,
                                     const SharpConstants& c);

/// a with mu a^{q(1-gamma_q)/2} = multiple * abar_N.
double mass_for_abar_multiple(const ProblemParams& p, const SharpConstants& c, double multiple);

/// theta in 1/q = (1 - theta)/2 + theta/2*.
double interpolation_theta(int dim, double q);

}  // namespace nls
