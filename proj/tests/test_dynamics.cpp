#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "nls/constants.hpp"
#include "nls/dynamics.hpp"
#include "nls/minimize.hpp"
#include "nls/mountainpass.hpp"
#include "nls/profiles.hpp"

using namespace nls;

namespace {

const SharpConstants& constants() {
  static const SharpConstants c = sharp_constants(3, 2.5);
  return c;
}

ProblemParams half_a0() {
  ProblemParams p;
  p.dim = 3;
  p.q = 2.5;
  p.mu = 1.0;
  p.a = 0.5 * a0(p, constants());
  return p;
}

double max_drift(const std::vector<double>& v) {
  double d = 0.0;
  for (double x : v) d = std::max(d, std::abs(x - v.front()));
  return d;
}

double h1_norm(const ComplexProfile& w) { return std::sqrt(grad_l2_sq(w) + lq_power(w, 2.0)); }

const SolveReport& ground_state() {
  static const SolveReport r = minimize_from_gaussian(half_a0(), soliton_grid(3), constants());
  return r;
}

}  // namespace

TEST_CASE("free evolution conserves mass and keeps zero at zero") {
  const ProblemParams p = half_a0();
  const GridPtr g = soliton_grid(3, 50.0, 2048);
  EvolveOptions o;
  o.t_end = 0.5;
  o.dt = 5e-3;
  o.nonlinear = false;
  const TrajectorySummary s = evolve(p, to_complex(gaussian(p, 1.0, g)), o);
  CHECK(!s.blowup);
  CHECK(s.steps == 100);
  CHECK(max_drift(s.mass) < 1e-8 * s.mass.front());
  CHECK(max_drift(s.grad_norm) < 1e-8 * s.grad_norm.front());
  // The recorded energy keeps the nonlinear terms, which the free flow does
  // not conserve; the kinetic part is conserved and the peak decays.
  CHECK(std::abs(s.final.values(0)) < std::abs(to_complex(gaussian(p, 1.0, g)).values(0)));

  EvolveOptions on = o;
  on.nonlinear = true;
  const TrajectorySummary z = evolve(p, ComplexProfile(g, ComplexVector::Zero(g->size())), on);
  CHECK(!z.blowup);
  CHECK(z.final.values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("time reversal by conjugation") {
  const ProblemParams p = half_a0();
  const GridPtr g = soliton_grid(3, 50.0, 2048);
  const ComplexProfile psi0 = to_complex(gaussian(p, 1.5, g));
  EvolveOptions o;
  o.t_end = 0.5;
  o.dt = 5e-3;
  const TrajectorySummary fwd = evolve(p, psi0, o);
  REQUIRE(!fwd.blowup);
  const ComplexProfile turned(g, fwd.final.values.conjugate());
  const TrajectorySummary back = evolve(p, turned, o);
  REQUIRE(!back.blowup);
  const ComplexProfile diff(g, back.final.values.conjugate() - psi0.values);
  CHECK(h1_norm(diff) < 1e-6 * h1_norm(psi0));
}

TEST_CASE("midpoint energy error is second order in dt") {
  const ProblemParams p = half_a0();
  const GridPtr g = soliton_grid(3, 50.0, 2048);
  const ComplexProfile psi0 = to_complex(gaussian(p, 2.0, g));
  std::vector<double> drift;
  for (double dt : {2e-2, 1e-2, 5e-3}) {
    EvolveOptions o;
    o.dt = dt;
    o.t_end = 1.0;
    o.sample_stride = 1;
    const TrajectorySummary s = evolve(p, psi0, o);
    REQUIRE(!s.blowup);
    CHECK(max_drift(s.mass) < 1e-10 * s.mass.front());
    drift.push_back(max_drift(s.energy));
  }
  for (std::size_t i = 1; i < drift.size(); ++i) {
    const double ratio = drift[i - 1] / drift[i];
    CHECK(ratio > 3.5);
    CHECK(ratio < 4.5);
  }
}

TEST_CASE("conservative scheme keeps the discrete energy") {
  const ProblemParams p = half_a0();
  const GridPtr g = soliton_grid(3, 50.0, 2048);
  EvolveOptions o;
  o.dt = 2e-2;
  o.t_end = 1.0;
  o.sample_stride = 1;
  o.scheme = TimeScheme::Conservative;
  const TrajectorySummary s = evolve(p, to_complex(gaussian(p, 2.0, g)), o);
  REQUIRE(!s.blowup);
  CHECK(max_drift(s.energy) < 1e-10 * std::max(1.0, std::abs(s.energy.front())));
  CHECK(max_drift(s.mass) < 1e-10 * s.mass.front());
}

TEST_CASE("standing wave over a short horizon") {
  const ProblemParams p = half_a0();
  const SolveReport& gs = ground_state();
  EvolveOptions o;
  o.t_end = 1.0;
  o.reference = gs.final;
  const TrajectorySummary s = evolve(p, to_complex(gs.final), o);
  REQUIRE(!s.blowup);
  CHECK(s.steps == 1000);
  CHECK(s.times.size() == 101);
  CHECK(s.times.back() == doctest::Approx(1.0).epsilon(1e-12));
  for (double d : s.modulus_drift) CHECK(d < 1e-6);
  for (double d : s.h1_distance) CHECK(d < 1e-6);
  CHECK(max_drift(s.mass) < 1e-10 * s.mass.front());
  CHECK(max_drift(s.energy) < 1e-8);
  // e^{-i lambda t} u with the sign convention lambda < 0.
  CHECK(s.phase.back() / s.times.back() == doctest::Approx(-gs.lambda).epsilon(1e-4));
}

TEST_CASE("stability probe") {
  const ProblemParams p = half_a0();
  const SolveReport& gs = ground_state();
  EvolveOptions o;
  o.t_end = 1.0;

  const StabilityReport zero = stability_probe(p, gs.final, 0.0, o);
  CHECK(zero.initial_distance < 1e-12);
  CHECK(zero.max_distance < 1e-4);
  CHECK(zero.bounded);

  for (double eps : {1e-2, -1e-2}) {
    const StabilityReport r = stability_probe(p, gs.final, eps, o);
    CHECK(r.initial_distance > 0.0);
    CHECK(r.bounded);
    CHECK(r.max_distance <= r.bound_factor * r.initial_distance);
    CHECK(r.trajectory.mass.front() == doctest::Approx(p.a).epsilon(1e-10));
    CHECK(!r.trajectory.blowup);
  }
}

TEST_CASE("blow-up probe") {
  const ProblemParams p = half_a0();
  const SolveReport& gs = ground_state();
  EvolveOptions o;
  o.t_end = 0.2;

  // Amplification 1 on the minimizer is the standing wave.
  const BlowupReport still = blowup_probe(p, gs.final, 1.0, o);
  CHECK(!still.blowup);
  CHECK(still.max_grad_growth < 1.0 + 1e-6);

  // Pushed past the mountain-pass witness, the gradient explodes quickly.
  FamilySpec spec;
  spec.refine_iterations = 400;
  const LevelEstimate est = estimate_mp_level(p, gs.final.grid, constants(), spec, gs);
  const BlowupReport b = blowup_probe(p, est.witness, 1.05, o);
  CHECK(b.initial_pohozaev < 0.0);
  CHECK(b.initial_energy < est.level);
  CHECK(b.blowup);
  REQUIRE(b.blowup_time.has_value());
  CHECK(*b.blowup_time < 0.2);
  CHECK(b.trajectory.mass.front() == doctest::Approx(p.a).epsilon(1e-10));
}

TEST_CASE("invalid evolution parameters") {
  const ProblemParams p = half_a0();
  const GridPtr g = soliton_grid(3, 50.0, 256);
  const ComplexProfile psi0 = to_complex(gaussian(p, 1.0, g));
  EvolveOptions o;
  o.dt = 0.0;
  CHECK_THROWS_AS(evolve(p, psi0, o), DomainError);
  o.dt = -1e-3;
  CHECK_THROWS_AS(evolve(p, psi0, o), DomainError);
  o.dt = 1e-3;
  o.t_end = -1.0;
  CHECK_THROWS_AS(evolve(p, psi0, o), DomainError);
  CHECK_THROWS_AS(blowup_probe(p, gaussian(p, 1.0, g), 0.0, EvolveOptions{}), DomainError);

  EvolveOptions stay;
  stay.t_end = 0.0;
  const TrajectorySummary s = evolve(p, psi0, stay);
  CHECK(s.steps == 0);
  CHECK(s.times.size() == 1);
}
