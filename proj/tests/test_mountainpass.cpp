#include <doctest.h>

#include <cmath>
#include <vector>

#include "nls/constants.hpp"
#include "nls/functionals.hpp"
#include "nls/minimize.hpp"
#include "nls/mountainpass.hpp"
#include "nls/profiles.hpp"

using namespace nls;

namespace {

ProblemParams params(int dim, double q, double mu = 1.0, double a = 1.0) {
  ProblemParams p;
  p.dim = dim;
  p.q = q;
  p.mu = mu;
  p.a = a;
  return p;
}

const SharpConstants& c3() {
  static const SharpConstants c = sharp_constants(3, 2.5);
  return c;
}

const SharpConstants& c4() {
  static const SharpConstants c = sharp_constants(4, 3.0);
  return c;
}

ProblemParams at_fraction(double frac) {
  ProblemParams p = params(3, 2.5);
  p.a = frac * a0(p, c3());
  return p;
}

}  // namespace

TEST_CASE("projection onto the Pohozaev manifold") {
  const GridPtr g = soliton_grid(3);
  for (double frac : {0.5, 1.0}) {
    const ProblemParams p = at_fraction(frac);
    for (double sigma : {0.7, 1.0, 2.0}) {
      const Profile u = gaussian(p, sigma, g);
      const Profile v = project_to_pohozaev_minus(p, u, c3());
      CHECK(v.grid->same_layout(*g));
      CHECK(std::abs(pohozaev(p, v)) < 1e-6 * grad_l2_sq(v));
      CHECK(energy(p, v) > 0.0);
      CHECK(lq_power(v, 2.0) == doctest::Approx(p.a).epsilon(1e-6));
      CHECK(energy(p, v) == doctest::Approx(projected_energy(p, u)).epsilon(1e-5));
      // Idempotent: the projected profile is its own fiber maximum.
      const FiberReport fr = fiber_critical_points(p, v, c3());
      CHECK(*fr.tau_minus == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
}

TEST_CASE("projection at the critical exponent") {
  const ProblemParams p = params(4, 3.0, 1.0, 0.5);
  const GridPtr g = soliton_grid(4);
  const Profile u = gaussian(p, 1.0, g);
  const Profile v = project_to_pohozaev_minus(p, u, c4());
  CHECK(std::abs(pohozaev(p, v)) < 1e-6 * grad_l2_sq(v));
  CHECK(energy(p, v) > 0.0);

  ProblemParams big = p;
  const Profile Q = weinstein_ground_state(4, 3.0, g).profile;
  big.a = 2.0 * lq_power(Q, 2.0);
  CHECK_THROWS_AS(project_to_pohozaev_minus(big, normalize_mass(Q, big.a), c4()), DomainError);
}

TEST_CASE("mountain-pass level bounds at a0/2 and a0") {
  const GridPtr g = soliton_grid(3);
  const double bound_gap = std::pow(c3().sobolev, 1.5) / 3.0;
  for (double frac : {0.5, 1.0}) {
    const ProblemParams p = at_fraction(frac);
    const SolveReport minimizer = minimize_from_gaussian(p, g, c3());
    FamilySpec spec;
    spec.refine_iterations = 400;
    const LevelEstimate est = estimate_mp_level(p, g, c3(), spec, minimizer);
    CHECK(est.accepted);
    CHECK(est.level > 0.0);
    CHECK(est.level < est.upper_bound);
    CHECK(est.upper_bound == doctest::Approx(minimizer.energy + bound_gap).epsilon(1e-12));
    CHECK(est.m_a == doctest::Approx(minimizer.energy).epsilon(1e-12));
    CHECK(est.level <= est.family_level);
    CHECK(est.family_trace.size() == 64);
    CHECK(est.witness_energy == doctest::Approx(est.level).epsilon(1e-6));
    CHECK(std::abs(est.witness_pohozaev) < 1e-6 * grad_l2_sq(est.witness));
    CHECK(est.witness_mass == doctest::Approx(p.a).epsilon(1e-6));
    CHECK(energy(p, est.witness) > 0.0);
    // The s = 0 member is the minimizer's own fiber maximum.
    CHECK(est.family_trace.front().s == 0.0);
    CHECK(est.family_trace.front().projected_energy == doctest::Approx(projected_energy(p, minimizer.final)).epsilon(1e-9));
    CHECK(est.family_trace.front().projected_energy > 0.0);
  }
}

TEST_CASE("adding family members never raises the sweep level") {
  const GridPtr g = soliton_grid(3);
  const ProblemParams p = at_fraction(0.5);
  const SolveReport minimizer = minimize_from_gaussian(p, g, c3());
  double last = INFINITY;
  for (int members : {9, 17, 33}) {
    FamilySpec spec;
    spec.members = members;
    spec.refine_iterations = 0;
    const LevelEstimate est = estimate_mp_level(p, g, c3(), spec, minimizer);
    CHECK(est.family_level <= last);
    last = est.family_level;
  }
}

TEST_CASE("mountain-pass estimation refuses the critical exponent") {
  const ProblemParams p = params(4, 3.0, 1.0, 0.5);
  CHECK_THROWS_AS(estimate_mp_level(p, soliton_grid(4), c4()), DomainError);
}

TEST_CASE("positivity probe in Omega1 and Omega2") {
  const GridPtr g = soliton_grid(3);
  for (double frac : {0.5, 1.0}) {
    const ProblemParams p = at_fraction(frac);
    const PositivityProbe probe = omega2_positivity_probe(p, g, 32, 7, c3());
    CHECK(probe.levels.size() == 32);
    CHECK(probe.positive);
    CHECK(probe.min_level > 0.0);
    CHECK(!probe.low_rho_gap.empty());
    for (double r : probe.low_gn_ratio) {
      CHECK(r > 0.0);
      CHECK(r <= 1.0 + 1e-6);
    }
    const PositivityProbe again = omega2_positivity_probe(p, g, 32, 7, c3());
    CHECK(again.levels == probe.levels);
  }
}

TEST_CASE("interpolation exponent") {
  const double theta = interpolation_theta(4, 3.0);
  CHECK(theta == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  for (int dim : {3, 4, 5}) {
    const double q = 2.0 + 4.0 / dim;
    const double t = interpolation_theta(dim, q);
    const double s2 = 2.0 * dim / (dim - 2.0);
    CHECK(t > 0.0);
    CHECK(t < 1.0);
    CHECK(1.0 / q == doctest::Approx((1.0 - t) / 2.0 + t / s2).epsilon(1e-14));
  }
}

TEST_CASE("c^po sequences, case 1") {
  const ProblemParams p = params(4, 3.0, 1.0, 1.0);
  const CpoSequenceReport r = cpo_sequence_case1(p, {5.0, 10.0, 20.0, 40.0}, c4());
  const Exponents x = exponents(p);
  const double eps = 0.05 * c4().sobolev * c4().sobolev / 4.0;
  CHECK(r.epsilon == doctest::Approx(eps).epsilon(1e-14));
  REQUIRE(r.items.size() == 4);
  CHECK(r.monotone);
  CHECK(r.below_epsilon);
  // mu a^{q(1-gamma)/2} = abar_N.
  CHECK(p.mu * std::pow(r.a, 0.5 * p.q * (1.0 - x.gamma_q)) == doctest::Approx(r.abar).epsilon(1e-10));
  for (std::size_t i = 0; i < r.items.size(); ++i) {
    const CpoItem& it = r.items[i];
    CHECK(it.mass == doctest::Approx(r.a).epsilon(1e-12));
    CHECK(it.excess > 0.0);
    CHECK(it.ratio > 0.0);
    CHECK(it.projected_energy == doctest::Approx(it.closed_form).epsilon(1e-4));
    CHECK(it.closed_form == doctest::Approx(std::pow(it.ratio, 2.0) / 4.0).epsilon(1e-12));
    if (i > 0) {
      CHECK(it.ratio < r.items[i - 1].ratio);
      CHECK(it.projected_energy < r.items[i - 1].projected_energy);
    }
  }
  CHECK(r.items.back().projected_energy < eps);
  CHECK_THROWS_AS(cpo_sequence_case1(p, {5.0, -1.0}, c4()), DomainError);
  CHECK_THROWS_AS(cpo_sequence_case1(params(3, 2.5), {5.0}, c3()), DomainError);
}

TEST_CASE("c^po sequences, case 2") {
  ProblemParams p = params(4, 3.0, 1.0, 1.0);
  p.a = mass_for_abar_multiple(p, c4(), 2.0);
  const std::vector<double> A = {0.1, 0.01, 0.001};
  const CpoSequenceReport r = cpo_sequence_case2(p, A, c4());
  REQUIRE(r.items.size() == 3);
  CHECK(r.monotone);
  CHECK(r.below_epsilon);
  CHECK(r.theta == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(r.interpolation_bound == doctest::Approx(std::pow(p.a, -(1.0 - r.theta) / (2.0 * r.theta))).epsilon(1e-12));
  for (std::size_t i = 0; i < A.size(); ++i) {
    const CpoItem& it = r.items[i];
    CHECK(it.parameter == A[i]);
    CHECK(it.mass == doctest::Approx(p.a).epsilon(1e-6));
    CHECK(it.lq_norm == doctest::Approx(1.0).epsilon(1e-6));
    // The internal identity |grad u|^2 - mu gamma |u|_q^q = A_n.
    CHECK(it.excess == doctest::Approx(A[i]).epsilon(1e-4));
    CHECK(it.ratio == doctest::Approx(A[i] / (it.l2star_norm * it.l2star_norm)).epsilon(1e-4));
    CHECK(it.l2star_norm >= r.interpolation_bound * (1.0 - 1e-9));
    CHECK(it.projected_energy == doctest::Approx(it.closed_form).epsilon(1e-4));
    if (i > 0) CHECK(it.ratio < r.items[i - 1].ratio);
  }
  CHECK(r.items.back().projected_energy < 1e-3);

  // At or below abar_N the family has no member with f(u) = M_n.
  ProblemParams low = p;
  low.a = mass_for_abar_multiple(p, c4(), 0.5);
  CHECK_THROWS_AS(cpo_sequence_case2(low, A, c4()), DomainError);
}

TEST_CASE("mass for a multiple of abar") {
  const ProblemParams p = params(4, 3.0, 2.0, 1.0);
  const Exponents x = exponents(p);
  for (double k : {0.5, 1.0, 2.0}) {
    const double a = mass_for_abar_multiple(p, c4(), k);
    CHECK(p.mu * std::pow(a, 0.5 * p.q * (1.0 - x.gamma_q)) == doctest::Approx(k * abar(p, c4())).epsilon(1e-12));
  }
}
