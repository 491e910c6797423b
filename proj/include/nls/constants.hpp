#pragma once

#include <optional>
#include <stdexcept>
#include <string>

#include "nls/grid.hpp"

namespace nls {

/// Equation data: dimension N, exponent q in (2, 2*), coupling mu > 0 and
/// prescribed mass a > 0.
struct ProblemParams {
  int dim = 3;
  double q = 2.5;
  double mu = 1.0;
  double a = 1.0;

  bool operator==(const ProblemParams&) const = default;
};

enum class QClass { Subcritical, Critical, Supercritical };

struct Exponents {
  double two_star;    // 2N/(N-2)
  double gamma_q;     // N/2 - N/q
  double q_gamma_q;   // q * gamma_q
  QClass q_class;
};

/// Omega1/2/3 partition for q < 2 + 4/N; at q = 2 + 4/N the comparison of
/// mu a^{q(1-gamma_q)/2} with abar_N.
enum class Regime { Omega1, Omega2, Omega3, BelowAbar, AtOrAboveAbar };

std::string to_string(Regime r);
std::string to_string(QClass c);

/// Pair of sharp constants entering the energy estimates.
struct SharpConstants {
  double sobolev;             // S
  double gagliardo_nirenberg; // C_{N,q}
};

struct Thresholds {
  double S = 0.0;
  double C_Nq = 0.0;
  std::optional<double> K;
  std::optional<double> a0;
  std::optional<double> rho_crit;
  std::optional<double> rho0;
  std::optional<double> abar_N;
  std::optional<Regime> regime;  // none for q > 2 + 4/N
};

/// Raised for calls outside the parameter domain (bad q, wrong regime).
class DomainError : public std::runtime_error {
 public:
  DomainError(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

void validate(const ProblemParams& p);

/// Checks N and q only, so that mu = 0 (linear tests) remains usable.
Exponents exponents(const ProblemParams& p);

/// Critical exponent 2 + 4/N.
double l2_critical_exponent(int dim);

/// True when q equals 2 + 4/N up to rounding of rational input.
bool is_l2_critical(int dim, double q);

/// Sharp Sobolev constant: Rayleigh quotient of the Aubin-Talenti bubble on
/// graded grids (with the analytic far field beyond r_max added), Richardson
/// extrapolated over three resolutions.
double sobolev_constant(int dim);

/// grad_l2_sq / ||u||_{2*}^2 of the bubble with parameter b on the default
/// layout (r_max, n), including the exact far field beyond r_max.
double bubble_sobolev_quotient(int dim, double b, double r_max, int n);

/// Closed form pi N (N-2) (Gamma(N/2)/Gamma(N))^{2/N}. Reference value only.
double sobolev_constant_closed_form(int dim);

/// C_{N,q} evaluated as the Gagliardo-Nirenberg quotient of the Weinstein
/// ground state.
double gn_constant(const ProblemParams& p);

/// ||u||_q / (||grad u||^gamma ||u||_2^{1-gamma}).
double gn_quotient(const Profile& u, double q, double gamma_q);

SharpConstants sharp_constants(int dim, double q);

/// f_{mu,a}(rho) = 1/2 - S^{-2*/2} rho^{2*/2-1}/2* - (mu/q) C^q a^{q(1-g)/2} rho^{q g/2-1}.
double f_mu_a(const ProblemParams& p, const SharpConstants& c, double rho);

/// rho_{mu,a}, the maximizer of f_{mu,a}; requires q subcritical.
double rho_crit(const ProblemParams& p, const SharpConstants& c);

/// K, a0 (for the given mu) and rho0; subcritical q only.
double k_constant(const ProblemParams& p, const SharpConstants& c);
double a0(const ProblemParams& p, const SharpConstants& c);
double rho0(const ProblemParams& p, const SharpConstants& c);

/// abar_N = q / (2 C^q); critical q only.
double abar(const ProblemParams& p, const SharpConstants& c);

/// log(mu a^{q(1-gamma_q)/2}).
double log_mass_coupling(const ProblemParams& p);

Regime classify(const ProblemParams& p, const SharpConstants& c);

Thresholds thresholds(const ProblemParams& p, const SharpConstants& c);
Thresholds thresholds(const ProblemParams& p);

}  // namespace nls
