// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on failure.
// Tolerances are fixed below; nothing here is tunable from the outside.

#include <sys/wait.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nls/constants.hpp"
#include "nls/dynamics.hpp"
#include "nls/functionals.hpp"
#include "nls/io.hpp"
#include "nls/minimize.hpp"
#include "nls/mountainpass.hpp"
#include "nls/profiles.hpp"
#include "oracles.hpp"

using namespace nls;

namespace {

// Pinned tolerances.
constexpr double kQuadratureRel = 1e-6;
constexpr double kSobolevRel = 5e-3;
constexpr double kBubbleInvariance = 1e-3;
constexpr double kGnEqualityRel = 1e-3;
constexpr double kGnBoundSlack = 1e-6;  // quadrature tolerance on the GN bound
constexpr double kPohozaevRel = 1e-6;
constexpr double kRootDrift = 1e-3;
constexpr double kPohozaevAbs = 1e-6;
constexpr double kBoundaryFloor = -1e-6;
constexpr double kSubadditivityFloor = -1e-6;
constexpr double kCpoFraction = 0.05;
constexpr double kCpoIdentityRel = 1e-4;
constexpr double kMassDrift = 1e-8;
constexpr double kEnergyDriftPerTime = 1e-6;
constexpr double kHalvingLow = 3.0;
constexpr double kHalvingHigh = 5.0;
constexpr double kModulusDrift = 1e-4;

struct Check {
  bool ok = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << " [failed: " << what << "]";
    }
  }
};

ProblemParams params(int dim, double q, double mu = 1.0, double a = 1.0) {
  ProblemParams p;
  p.dim = dim;
  p.q = q;
  p.mu = mu;
  p.a = a;
  return p;
}

double rel(double x, double ref) { return std::abs(x / ref - 1.0); }

double max_drift(const std::vector<double>& v) {
  double d = 0.0;
  for (double x : v) d = std::max(d, std::abs(x - v.front()));
  return d;
}

const SharpConstants& c3() {
  static const SharpConstants c = sharp_constants(3, 2.5);
  return c;
}

const SharpConstants& c4() {
  static const SharpConstants c = sharp_constants(4, 3.0);
  return c;
}

ProblemParams at_a0(double frac) {
  ProblemParams p = params(3, 2.5);
  p.a = frac * a0(p, c3());
  return p;
}

const SolveReport& minimizer(double frac) {
  static const SolveReport half = minimize_from_gaussian(at_a0(0.5), soliton_grid(3), c3());
  static const SolveReport full = minimize_from_gaussian(at_a0(1.0), soliton_grid(3), c3());
  return frac == 0.5 ? half : full;
}

// 1. Quadrature.
void quadrature(Check& c) {
  double worst = 0.0;
  for (int dim : {3, 4, 5}) {
    const GridPtr g = make_grid(dim, 20.0, 4096);
    const Profile gauss = Profile::sample(g, [](double r) { return std::exp(-r * r); });
    const double e1 = rel(integrate(*g, gauss.values), std::pow(oracle::pi, dim / 2.0));
    const GridPtr ball = make_grid(dim, 1.0, 4096);
    const double vol = std::pow(oracle::pi, dim / 2.0) / std::tgamma(dim / 2.0 + 1.0);
    const double e2 = rel(integrate(*ball, Vector::Ones(ball->size())), vol);
    c.require(e1 < kQuadratureRel, "Gaussian N=" + std::to_string(dim));
    c.require(e2 < kQuadratureRel, "ball N=" + std::to_string(dim));
    worst = std::max({worst, e1, e2});
  }
  c.detail << "worst relative error " << worst;
}

// 2. Sobolev constant.
void sobolev(Check& c) {
  const double s = sobolev_constant(3);
  const double e = rel(s, oracle::closed_form_S(3));
  const double q1 = bubble_sobolev_quotient(3, 1.0, 1e3, 8192);
  const double q2 = bubble_sobolev_quotient(3, 2.0, 1e3, 8192);
  const double q05 = bubble_sobolev_quotient(3, 0.5, 1e3, 8192);
  const double inv = std::max(rel(q2, q1), rel(q05, q1));
  c.require(e < kSobolevRel, "S vs closed form");
  c.require(inv < kBubbleInvariance, "b-invariance");
  c.detail << "S=" << s << " oracle=" << oracle::closed_form_S(3) << " rel " << e << "; b-spread " << inv;
}

// 3. GN sharpness.
void gn_sharpness(Check& c) {
  double worst = 0.0;
  for (auto [dim, q] : std::vector<std::pair<int, double>>{{3, 2.5}, {3, 3.0}, {4, 3.0}}) {
    const Profile Q = weinstein_ground_state(dim, q, weinstein_grid(dim, q)).profile;
    const double gamma = dim / 2.0 - dim / q;
    const double e = rel(gn_quotient(Q, q, gamma), oracle::gn_oracle(dim, q));
    c.require(e < kGnEqualityRel, "GN equality (" + std::to_string(dim) + "," + std::to_string(q) + ")");
    worst = std::max(worst, e);
  }
  const ProblemParams p = params(3, 2.5);
  const double bound = c3().gagliardo_nirenberg;
  const GridPtr g = soliton_grid(3);
  std::mt19937_64 rng(2024);
  double max_ratio = 0.0;
  for (int i = 0; i < 100; ++i) {
    max_ratio = std::max(max_ratio, gn_quotient(random_trial_profile(p, g, rng), p.q, exponents(p).gamma_q) / bound);
  }
  c.require(max_ratio <= 1.0 + kGnBoundSlack, "random profiles exceed the GN bound");
  c.detail << "worst equality error " << worst << "; max random quotient/C " << max_ratio;
}

// Phi_u from the norms, sampled on 10^4 log-spaced points: number of sign changes.
int sign_changes(const ProblemParams& p, const Norms& n) {
  const double s2 = 2.0 * p.dim / (p.dim - 2.0);
  const double gamma = p.dim / 2.0 - p.dim / p.q;
  const auto phi = [&](double t) {
    return t * t * n.grad - std::pow(t, s2) * n.crit - p.mu * gamma * std::pow(t, p.q * gamma) * n.lq;
  };
  int changes = 0;
  double prev = phi(std::exp(-6.0));
  for (int i = 1; i <= 10000; ++i) {
    const double v = phi(std::exp(-6.0 + 12.0 * i / 10000));
    if ((v > 0.0) != (prev > 0.0)) ++changes;
    prev = v;
  }
  return changes;
}

// 4. Fiber structure.
void fiber_structure(Check& c) {
  const GridPtr g = soliton_grid(3);
  const GridPtr fine = soliton_grid(3, 50.0, 16384);
  double drift = 0.0, worst_p = 0.0;
  for (double frac : {0.5, 1.0}) {
    const ProblemParams p = at_a0(frac);
    std::mt19937_64 rng(4), rng_fine(4);
    for (int i = 0; i < 20; ++i) {
      const Profile u = random_trial_profile(p, g, rng);
      const Profile uf = random_trial_profile(p, fine, rng_fine);
      const FiberReport r = fiber_critical_points(p, u, c3());
      const FiberReport rf = fiber_critical_points(p, uf, c3());
      if (!r.tau_plus || !r.tau_minus || !rf.tau_plus || !rf.tau_minus) {
        c.require(false, "missing fiber root");
        continue;
      }
      c.require(sign_changes(p, r.norms) == 2, "exactly two roots");
      c.require(*r.tau_plus < *r.tau_minus, "tau+ < tau-");
      c.require(*r.E_at_tau_plus < 0.0 && 0.0 <= *r.E_at_tau_minus, "energy signs");
      c.require(*r.psi_second_at_tau_minus < 0.0, "Psi'' at tau- negative");
      for (double tau : {*r.tau_plus, *r.tau_minus}) {
        const Profile ut = dilate(u, tau);
        const double pe = std::abs(pohozaev(p, ut)) / grad_l2_sq(ut);
        c.require(pe < kPohozaevRel, "|P(u_tau)| small");
        worst_p = std::max(worst_p, pe);
      }
      drift = std::max({drift, rel(*r.tau_plus, *rf.tau_plus), rel(*r.tau_minus, *rf.tau_minus)});
    }
  }
  c.require(drift < kRootDrift, "root drift under grid doubling");
  c.detail << "40 profiles; worst |P|/|grad|^2 " << worst_p << "; root drift " << drift;
}

// 5. Local minimizer.
void local_minimizer(Check& c) {
  const GridPtr g = soliton_grid(3);
  for (double frac : {0.5, 1.0}) {
    const ProblemParams p = at_a0(frac);
    const SolveReport& r = minimizer(frac);
    const std::string tag = frac == 0.5 ? "a0/2" : "a0";
    c.require(r.converged, "converged at " + tag);
    c.require(r.energy < 0.0, "E < 0 at " + tag);
    c.require(std::abs(r.pohozaev) < kPohozaevAbs, "|P| at " + tag);
    c.require(r.lambda < 0.0, "lambda < 0 at " + tag);
    c.require(grad_l2_sq(r.final) < rho0(p, c3()), "inside V_a at " + tag);
    const BoundaryScanReport scan = boundary_scan(p, g, 64, 1, c3());
    c.require(scan.min_energy >= kBoundaryFloor, "boundary scan at " + tag);
    const SubadditivityReport sub = subadditivity_check(p, g, 0.5 * p.a, c3());
    c.require(sub.gap >= kSubadditivityFloor, "subadditivity at " + tag);
    c.detail << tag << ": E=" << r.energy << " P=" << r.pohozaev << " lambda=" << r.lambda
             << " scan min " << scan.min_energy << " gap " << sub.gap << "; ";
  }
}

// 6. Mountain-pass bounds.
void mountain_pass(Check& c) {
  const GridPtr g = soliton_grid(3);
  for (double frac : {0.5, 1.0}) {
    const ProblemParams p = at_a0(frac);
    const LevelEstimate est = estimate_mp_level(p, g, c3(), {}, minimizer(frac));
    c.require(est.level > 0.0 && est.level < est.upper_bound, frac == 0.5 ? "0 < L < bound at a0/2" : "0 < L < bound at a0");
    c.detail << (frac == 0.5 ? "a0/2" : "a0") << ": L=" << est.level << " bound " << est.upper_bound << "; ";
  }
  const PositivityProbe probe = omega2_positivity_probe(at_a0(1.0), g, 128, 1, c3());
  c.require(probe.levels.size() == 128 && probe.positive && probe.min_level > 0.0, "positivity probe");
  c.detail << "probe min over 128 trials " << probe.min_level;
}

// 7. c^po sequences.
void cpo(Check& c) {
  const double eps = kCpoFraction * std::pow(c4().sobolev, 2.0) / 4.0;
  const auto decreasing_positive = [](const CpoSequenceReport& r) {
    for (std::size_t i = 0; i < r.items.size(); ++i) {
      if (!(r.items[i].projected_energy > 0.0)) return false;
      if (i > 0 && !(r.items[i].projected_energy < r.items[i - 1].projected_energy)) return false;
    }
    return true;
  };
  const ProblemParams p1 = params(4, 3.0);
  const CpoSequenceReport r1 = cpo_sequence_case1(p1, {5.0, 10.0, 20.0, 40.0}, c4());
  c.require(decreasing_positive(r1), "case 1 strictly decreasing positive");
  c.require(r1.items.back().projected_energy < eps, "case 1 final below threshold");

  ProblemParams p2 = params(4, 3.0);
  p2.a = mass_for_abar_multiple(p2, c4(), 2.0);
  const std::vector<double> A = {1e-1, 1e-2, 1e-3};
  const CpoSequenceReport r2 = cpo_sequence_case2(p2, A, c4());
  c.require(decreasing_positive(r2), "case 2 strictly decreasing positive");
  c.require(r2.items.back().projected_energy < eps, "case 2 final below threshold");
  // excess = |grad u_n|^2 - mu gamma_q |u_n|_q^q of the stored member.
  double worst = 0.0;
  for (std::size_t i = 0; i < A.size(); ++i) worst = std::max(worst, rel(r2.items[i].excess, A[i]));
  c.require(worst < kCpoIdentityRel, "case 2 identity");
  c.detail << "case 1 final " << r1.items.back().projected_energy << ", case 2 final "
           << r2.items.back().projected_energy << " (threshold " << eps << "); identity error " << worst;
}

// 8. Dynamics.
void dynamics(Check& c) {
  const ProblemParams p = at_a0(0.5);
  const SolveReport& gs = minimizer(0.5);
  EvolveOptions o;  // default dt
  double mass_drift = 0.0, energy_rate = 0.0;
  const auto conservation = [&](const TrajectorySummary& s) {
    mass_drift = std::max(mass_drift, max_drift(s.mass));
    energy_rate = std::max(energy_rate, max_drift(s.energy) / s.times.back());
  };

  // Standing wave.
  o.t_end = 10.0;
  o.reference = gs.final;
  const TrajectorySummary sw = evolve(p, to_complex(gs.final), o);
  double modulus = 0.0;
  for (double d : sw.modulus_drift) modulus = std::max(modulus, d);
  c.require(!sw.blowup, "standing wave flagged");
  c.require(modulus < kModulusDrift, "standing-wave modulus drift");
  conservation(sw);

  // Stability.
  EvolveOptions so;
  so.t_end = 20.0;
  const StabilityReport st = stability_probe(p, gs.final, 1e-2, so);
  c.require(st.bounded && !st.trajectory.blowup, "stability probe bounded");
  conservation(st.trajectory);

  // Blow-up from the mountain-pass witness.
  const LevelEstimate est = estimate_mp_level(p, soliton_grid(3), c3(), {}, gs);
  EvolveOptions bo;
  bo.t_end = 10.0;
  const BlowupReport bl = blowup_probe(p, est.witness, 1.05, bo);
  c.require(bl.blowup && bl.blowup_time && *bl.blowup_time < 10.0, "blow-up indicator before t = 10");

  // dt-halving of the midpoint energy error on a Gaussian.
  const ComplexProfile g0 = to_complex(gaussian(p, 2.0, soliton_grid(3)));
  std::vector<double> drift;
  for (double dt : {1e-3, 5e-4}) {
    EvolveOptions ho;
    ho.dt = dt;
    ho.t_end = 1.0;
    ho.sample_stride = 1;
    const TrajectorySummary s = evolve(p, g0, ho);
    c.require(!s.blowup, "Gaussian run flagged");
    if (dt == 1e-3) conservation(s);
    drift.push_back(max_drift(s.energy));
  }
  const double ratio = drift[0] / drift[1];
  c.require(ratio > kHalvingLow && ratio < kHalvingHigh, "dt-halving ratio near 4");

  c.require(mass_drift < kMassDrift, "mass drift");
  c.require(energy_rate < kEnergyDriftPerTime, "energy drift per unit time");
  c.detail << "mass drift " << mass_drift << ", energy drift/time " << energy_rate << ", modulus drift " << modulus
           << ", stability " << st.initial_distance << " -> max " << st.max_distance << ", blow-up at t="
           << (bl.blowup_time ? *bl.blowup_time : -1.0) << ", halving ratio " << ratio;
}

// 9. Determinism of the command-line front end.
struct Captured {
  std::string out;
  int code = -1;
};

Captured run_cli(const std::string& args) {
  const std::string cmd = std::string(NLS_CLI_PATH) + " " + args + " 2>/dev/null";
  Captured r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf;
  std::size_t got;
  while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), got);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

void determinism(Check& c) {
  const std::filesystem::path dir = std::filesystem::temp_directory_path() / "nls_acceptance";
  std::filesystem::create_directories(dir);
  const auto path = [&](const std::string& name) { return (dir / name).string(); };

  // Inputs shared by the commands that read a profile.
  io::write_file(path("gauss.json"), run_cli("profile --kind gaussian --a 0.5a0").out);
  io::RunConfig rc;
  rc.command = "boundary-scan";
  rc.params = params(3, 2.5);
  rc.mass_spec = "auto-a0";
  rc.seed = 9;
  rc.options = {{"samples", 16}};
  io::write_file(path("config.json"), io::to_json(rc).dump());

  struct Case {
    std::string args;
    std::vector<std::string> side_files;
  };
  const std::vector<Case> cases = {
      {"constants --a auto-a0", {}},
      {"constants --dim 4 --q 3 --mass-multiple 2", {}},
      {"profile --kind weinstein --q 3", {}},
      {"profile --kind bubble --b 2", {}},
      {"profile --kind gaussian --a 0.5a0 --sigma 1.5", {}},
      {"fiber --profile " + path("gauss.json"), {}},
      {"minimize --a 0.5a0 --random-init --seed 5 --profile-out " + path("min.json"), {path("min.json")}},
      {"subadd --a auto-a0", {}},
      {"boundary-scan --a auto-a0 --samples 32 --seed 3", {}},
      {"mountain-pass --a 0.5a0 --probe-trials 16 --seed 2 --trace-csv " + path("trace.csv") + " --witness-out " +
           path("witness.json"),
       {path("trace.csv"), path("witness.json")}},
      {"cpo --case 1 --dim 4", {}},
      {"cpo --case 2 --dim 4 --mass-multiple 2 --steps 3", {}},
      {"evolve --init " + path("gauss.json") + " --t-end 0.2", {}},
      {"evolve --init " + path("min.json") + " --probe stability --t-end 0.2 --csv", {}},
      {"evolve --init " + path("witness.json") + " --probe blowup --t-end 0.2", {}},
      {"sweep --mu-values 0.5,1,2 --a-count 4 --with-minimizer", {}},
      {"run --config " + path("config.json"), {}},
  };
  int compared = 0;
  for (const Case& k : cases) {
    const Captured first = run_cli(k.args);
    std::vector<std::string> files_first;
    for (const auto& f : k.side_files) files_first.push_back(io::read_file(f));
    const Captured second = run_cli(k.args);
    c.require(first.code == 0, "exit code of '" + k.args + "'");
    c.require(!first.out.empty() && first.out == second.out && first.code == second.code,
              "output of '" + k.args + "'");
    for (std::size_t i = 0; i < k.side_files.size(); ++i) {
      c.require(io::read_file(k.side_files[i]) == files_first[i], "side file of '" + k.args + "'");
    }
    ++compared;
  }
  std::filesystem::remove_all(dir);
  c.detail << compared << " invocations compared byte for byte";
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria = {
      {"quadrature", quadrature},
      {"Sobolev constant", sobolev},
      {"Gagliardo-Nirenberg sharpness", gn_sharpness},
      {"fiber structure", fiber_structure},
      {"local minimizer", local_minimizer},
      {"mountain-pass bounds", mountain_pass},
      {"c^po sequences", cpo},
      {"dynamics", dynamics},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[i].second(c);
    } catch (const std::exception& e) {
      c.ok = false;
      c.detail << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!c.ok) ++failed;
    std::printf("%s %zu %s: %s (%.1f s)\n", c.ok ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                c.detail.str().c_str(), secs);
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
