#include "nls/cli.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "nls/parallel.hpp"

namespace nls::cli {

namespace {

using io::json;
using io::RunConfig;

json params_json(const ProblemParams& p) {
  return {{"dim", p.dim}, {"q", p.q}, {"mu", p.mu}, {"a", p.a}};
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json document(const RunConfig& c, const ProblemParams& p) {
  return {{"schema_version", io::kSchemaVersion},
          {"command", c.command},
          {"config", io::to_json(c)},
          {"params", params_json(p)}};
}

template <typename T>
T option(const RunConfig& c, const char* name, T fallback) {
  if (!c.options.contains(name) || c.options[name].is_null()) return fallback;
  try {
    return c.options[name].get<T>();
  } catch (const json::exception&) {
    throw std::invalid_argument(std::string("option '") + name + "' has the wrong type");
  }
}

std::string string_option(const RunConfig& c, const char* name, const std::string& fallback = "") {
  return option<std::string>(c, name, fallback);
}

std::vector<double> list_option(const RunConfig& c, const char* name, std::vector<double> fallback) {
  if (!c.options.contains(name) || c.options[name].is_null()) return fallback;
  const json& v = c.options[name];
  if (v.is_string()) return io::parse_real_list(v.get<std::string>());
  try {
    return v.get<std::vector<double>>();
  } catch (const json::exception&) {
    throw std::invalid_argument(std::string("option '") + name + "' must be a list of numbers");
  }
}

/// "<k>a0" -> k; "auto-a0" -> 1; otherwise nullopt.
std::optional<double> a0_multiple(const std::string& spec) {
  if (spec == "auto-a0") return 1.0;
  if (spec.size() > 2 && spec.substr(spec.size() - 2) == "a0") {
    return io::parse_real(spec.substr(0, spec.size() - 2));
  }
  return std::nullopt;
}

double resolve_mass_spec(const std::string& spec, const ProblemParams& p, const SharpConstants& sc) {
  if (const auto k = a0_multiple(spec)) {
    if (exponents(p).q_class != QClass::Subcritical) {
      throw DomainError("invalid_parameter", "a0 is defined only for q < 2 + 4/N");
    }
    return *k * a0(p, sc);
  }
  return io::parse_real(spec);
}

GridPtr soliton_grid_for(const RunConfig& c, const ProblemParams& p) {
  return soliton_grid(p.dim, c.r_max.value_or(50.0), c.grid_n.value_or(8192));
}

void write_side_file(const RunConfig& c, const char* name, const std::string& content) {
  const std::string path = string_option(c, name);
  if (!path.empty()) io::write_file(path, content);
}

MinimizeOptions minimize_options(const RunConfig& c) {
  MinimizeOptions o;
  o.tol = c.tol;
  o.max_iterations = c.max_iterations;
  return o;
}

CommandOutput cmd_constants(const RunConfig& c) {
  ProblemParams p = c.params;
  exponents(p);
  if (!(p.mu > 0.0)) throw DomainError("invalid_parameter", "mu must be positive");
  const SharpConstants sc = sharp_constants(p.dim, p.q);
  const bool has_mass = !c.mass_spec.empty() || c.mass_multiple;
  if (has_mass) p.a = resolve_mass(c, sc);
  validate(p);
  const Exponents x = exponents(p);
  Thresholds t = thresholds(p, sc);
  if (!has_mass) {
    t.rho_crit.reset();
    t.regime.reset();
  }
  json out = document(c, p);
  if (!has_mass) out["params"]["a"] = nullptr;
  out.update(io::to_json(t, x));
  return {dump(out)};
}

CommandOutput cmd_profile(const RunConfig& c) {
  ProblemParams p = c.params;
  const std::string kind = string_option(c, "kind", "gaussian");
  const int n = c.grid_n.value_or(8192);
  Profile u;
  if (kind == "weinstein") {
    exponents(p);
    const GridPtr g = c.r_max ? make_grid(p.dim, *c.r_max, n) : weinstein_grid(p.dim, p.q, n);
    u = weinstein_ground_state(p.dim, p.q, g).profile;
  } else if (kind == "bubble") {
    if (p.dim < 3) throw DomainError("invalid_parameter", "dimension N must be at least 3");
    const double b = option(c, "b", 1.0);
    const double amp = option(c, "amplitude", 1.0);
    if (!(b > 0.0) || !(amp > 0.0)) throw DomainError("invalid_parameter", "b and the amplitude must be positive");
    u = aubin_talenti(p.dim, b, make_grid(p.dim, c.r_max.value_or(1e3), n), amp);
  } else if (kind == "gaussian") {
    const double sigma = option(c, "sigma", 1.0);
    if (!(sigma > 0.0)) throw DomainError("invalid_parameter", "sigma must be positive");
    exponents(p);
    if (!c.mass_spec.empty() || c.mass_multiple) p.a = resolve_mass(c, sharp_constants(p.dim, p.q));
    if (!(p.a > 0.0)) throw DomainError("invalid_parameter", "mass a must be positive");
    u = gaussian(p, sigma, soliton_grid_for(c, p));
  } else {
    throw std::invalid_argument("unknown profile kind '" + kind + "' (weinstein, bubble, gaussian)");
  }
  if (kind != "gaussian" && (!c.mass_spec.empty() || c.mass_multiple)) {
    p.a = resolve_mass(c, sharp_constants(p.dim, p.q));
    if (!(p.a > 0.0)) throw DomainError("invalid_parameter", "mass a must be positive");
    u = normalize_mass(u, p.a);
  }
  json out = io::profile_to_json(u);
  out["kind"] = kind;
  out["mass"] = lq_power(u, 2.0);
  return {dump(out)};
}

Profile load_profile(const RunConfig& c, const char* name, const ProblemParams& p) {
  const std::string path = string_option(c, name);
  if (path.empty()) throw std::invalid_argument(std::string("option '") + name + "' (a profile file) is required");
  return io::read_profile(path, p.dim, soliton_grid_for(c, p));
}

CommandOutput cmd_fiber(const RunConfig& c) {
  ProblemParams p = c.params;
  exponents(p);
  const SharpConstants sc = sharp_constants(p.dim, p.q);
  const Profile u = load_profile(c, "profile", p);
  p.a = (!c.mass_spec.empty() || c.mass_multiple) ? resolve_mass(c, sc) : lq_power(u, 2.0);
  validate(p);
  FiberOptions fo;
  fo.samples = option(c, "samples", fo.samples);
  const FiberReport r = fiber_critical_points(p, u, sc, fo);
  json out = document(c, p);
  out["report"] = io::to_json(r);
  return {dump(out)};
}

CommandOutput cmd_minimize(const RunConfig& c) {
  ProblemParams p = c.params;
  const SharpConstants sc = sharp_constants(p.dim, p.q);
  p.a = resolve_mass(c, sc);
  validate(p);
  const GridPtr g = soliton_grid_for(c, p);
  Profile init;
  const std::string init_path = string_option(c, "init");
  if (!init_path.empty()) {
    init = normalize_mass(io::read_profile(init_path, p.dim, g), p.a);
  } else if (option(c, "random_init", false)) {
    std::mt19937_64 rng(c.seed);
    init = random_trial_profile(p, g, rng);
  } else {
    init = gaussian(p, option(c, "sigma", 1.0), g);
  }
  const SolveReport r = minimize_local(p, init, sc, minimize_options(c));
  write_side_file(c, "profile_out", dump(io::profile_to_json(r.final)));
  json out = document(c, p);
  out["rho0"] = rho0(p, sc);
  out["regime"] = to_string(classify(p, sc));
  out["report"] = io::to_json(r, std::size_t(option(c, "max_trace", 200)));
  return {dump(out)};
}

CommandOutput cmd_subadd(const RunConfig& c) {
  ProblemParams p = c.params;
  const SharpConstants sc = sharp_constants(p.dim, p.q);
  p.a = resolve_mass(c, sc);
  validate(p);
  const std::string a1_spec = string_option(c, "a1", "");
  const double a1 = a1_spec.empty() ? 0.5 * p.a : resolve_mass_spec(a1_spec, p, sc);
  if (!(a1 > 0.0 && a1 < p.a)) throw DomainError("invalid_parameter", "a1 must lie in (0, a)");
  const SubadditivityReport r = subadditivity_check(p, soliton_grid_for(c, p), a1, sc, minimize_options(c));
  json out = document(c, p);
  out["a1"] = a1;
  out["report"] = io::to_json(r);
  return {dump(out)};
}

CommandOutput cmd_boundary_scan(const RunConfig& c) {
  ProblemParams p = c.params;
  const SharpConstants sc = sharp_constants(p.dim, p.q);
  p.a = resolve_mass(c, sc);
  validate(p);
  const int samples = option(c, "samples", 64);
  if (samples < 1) throw DomainError("invalid_parameter", "samples must be positive");
  const BoundaryScanReport r = boundary_scan(p, soliton_grid_for(c, p), samples, c.seed, sc);
  json out = document(c, p);
  out["rho0"] = rho0(p, sc);
  out["report"] = io::to_json(r);
  return {dump(out)};
}

CommandOutput cmd_mountain_pass(const RunConfig& c) {
  ProblemParams p = c.params;
  const SharpConstants sc = sharp_constants(p.dim, p.q);
  p.a = resolve_mass(c, sc);
  validate(p);
  FamilySpec spec;
  spec.members = option(c, "members", spec.members);
  spec.s_max = option(c, "s_max", spec.s_max);
  spec.bubble_b = option(c, "bubble_b", spec.bubble_b);
  spec.cutoff_radius = option(c, "cutoff_radius", spec.cutoff_radius);
  spec.refine_iterations = option(c, "refine_iterations", spec.refine_iterations);
  spec.refine_tol = c.tol;
  const GridPtr g = soliton_grid_for(c, p);
  const LevelEstimate est = estimate_mp_level(p, g, sc, spec);
  write_side_file(c, "witness_out", dump(io::profile_to_json(est.witness)));
  write_side_file(c, "trace_csv", io::family_trace_csv(est));
  json out = document(c, p);
  out["report"] = io::to_json(est);
  const int trials = option(c, "probe_trials", 0);
  if (trials > 0) {
    out["positivity_probe"] = io::to_json(omega2_positivity_probe(p, g, trials, c.seed, sc));
  }
  return {dump(out)};
}

CommandOutput cmd_cpo(const RunConfig& c) {
  ProblemParams p = c.params;
  exponents(p);
  const SharpConstants sc = sharp_constants(p.dim, p.q);
  const int which = option(c, "case", 1);
  const int steps = option(c, "steps", 0);
  CpoSequenceReport r;
  if (which == 1) {
    std::vector<double> dflt{5, 10, 20, 40};
    if (steps > 0) {
      dflt.clear();
      for (int k = 0; k < steps; ++k) dflt.push_back(5.0 * std::ldexp(1.0, k));
    }
    r = cpo_sequence_case1(p, list_option(c, "n_values", dflt), sc);
  } else if (which == 2) {
    std::vector<double> dflt{0.1, 0.01, 0.001};
    if (steps > 0) {
      dflt.clear();
      for (int k = 1; k <= steps; ++k) dflt.push_back(std::pow(10.0, -k));
    }
    if (!c.mass_spec.empty()) {
      p.a = resolve_mass_spec(c.mass_spec, p, sc);
    } else {
      p.a = mass_for_abar_multiple(p, sc, c.mass_multiple.value_or(2.0));
    }
    r = cpo_sequence_case2(p, list_option(c, "A_values", dflt), sc);
  } else {
    throw std::invalid_argument("cpo case must be 1 or 2");
  }
  p.a = r.a;
  json out = document(c, p);
  out["report"] = io::to_json(r);
  return {dump(out)};
}

CommandOutput cmd_evolve(const RunConfig& c) {
  ProblemParams p = c.params;
  exponents(p);
  const std::string path = string_option(c, "init");
  if (path.empty()) throw std::invalid_argument("option 'init' (a profile file) is required");
  const Profile u = io::read_profile(path, p.dim, soliton_grid_for(c, p));
  p.a = (!c.mass_spec.empty() || c.mass_multiple) ? resolve_mass(c, sharp_constants(p.dim, p.q))
                                                 : lq_power(u, 2.0);
  validate(p);

  EvolveOptions eo;
  eo.dt = option(c, "dt", eo.dt);
  eo.t_end = option(c, "t_end", eo.t_end);
  eo.sample_stride = option(c, "stride", eo.sample_stride);
  const std::string scheme = string_option(c, "scheme", "midpoint");
  if (scheme == "conservative") {
    eo.scheme = TimeScheme::Conservative;
  } else if (scheme != "midpoint") {
    throw std::invalid_argument("unknown scheme '" + scheme + "' (midpoint, conservative)");
  }
  const std::string probe = string_option(c, "probe", "none");
  json report;
  const TrajectorySummary* traj = nullptr;
  StabilityReport stab;
  BlowupReport blow;
  TrajectorySummary plain;
  if (probe == "none") {
    eo.reference = u;
    plain = evolve(p, to_complex(normalize_mass(u, p.a)), eo);
    report = io::to_json(plain);
    traj = &plain;
  } else if (probe == "stability") {
    stab = stability_probe(p, u, option(c, "eps", 1e-2), eo);
    report = io::to_json(stab);
    traj = &stab.trajectory;
  } else if (probe == "blowup") {
    blow = blowup_probe(p, u, option(c, "amp", 1.05), eo);
    report = io::to_json(blow);
    traj = &blow.trajectory;
  } else {
    throw std::invalid_argument("unknown probe '" + probe + "' (none, stability, blowup)");
  }
  if (c.output_format == "csv") return {io::trajectory_csv(*traj)};
  json out = document(c, p);
  out["probe"] = probe;
  out["report"] = report;
  return {dump(out)};
}

std::vector<double> axis(double lo, double hi, int count, bool log_spacing) {
  std::vector<double> v;
  for (int i = 0; i < count; ++i) {
    const double t = count == 1 ? 0.0 : double(i) / (count - 1);
    v.push_back(log_spacing ? std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo))) : lo + t * (hi - lo));
  }
  return v;
}

std::string csv_real(double v) {
  if (!std::isfinite(v)) return "";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string csv_text(std::string s) {
  std::replace(s.begin(), s.end(), '"', '\'');
  return '"' + s + '"';
}

CommandOutput cmd_sweep(const RunConfig& c) {
  ProblemParams base = c.params;
  exponents(base);
  const SharpConstants sc = sharp_constants(base.dim, base.q);
  std::vector<double> mus = list_option(c, "mu_values", {});
  if (mus.empty() && c.options.contains("mu_count")) {
    mus = axis(option(c, "mu_min", 0.5), option(c, "mu_max", 2.0), option(c, "mu_count", 0),
               string_option(c, "mu_spacing", "log") == "log");
  }
  const int a_count = option(c, "a_count", 0);
  const std::string a_min = string_option(c, "a_min", "0.5a0");
  const std::string a_max = string_option(c, "a_max", "2a0");
  const bool a_log = string_option(c, "a_spacing", "log") == "log";
  const bool with_min = option(c, "with_minimizer", false);
  const bool with_mp = option(c, "with_mountain_pass", false);
  if (a_count < 0) throw DomainError("invalid_parameter", "a_count must be nonnegative");

  struct Row {
    double mu = 0.0, a = 0.0, coupling = std::numeric_limits<double>::quiet_NaN();
    std::string regime;
    double m_a = std::numeric_limits<double>::quiet_NaN();
    double level = std::numeric_limits<double>::quiet_NaN();
    std::string error;
  };
  const std::size_t n_mu = mus.size(), n_a = std::size_t(a_count);
  std::vector<Row> rows(n_mu * n_a);
  // Mass axes are resolved per mu ("<k>a0" refers to a0 at that mu).
  std::vector<std::vector<double>> masses(n_mu);
  for (std::size_t i = 0; i < n_mu; ++i) {
    ProblemParams p = base;
    p.mu = mus[i];
    if (!(p.mu > 0.0)) throw DomainError("invalid_parameter", "mu values must be positive");
    const double lo = resolve_mass_spec(a_min, p, sc), hi = resolve_mass_spec(a_max, p, sc);
    if (!(lo > 0.0 && hi > 0.0)) throw DomainError("invalid_parameter", "mass range must be positive");
    masses[i] = axis(lo, hi, a_count, a_log);
  }
  const GridPtr g = soliton_grid_for(c, base);
  parallel_for(rows.size(), [&](std::size_t k) {
    Row& row = rows[k];
    ProblemParams p = base;
    p.mu = mus[k / n_a];
    p.a = masses[k / n_a][k % n_a];
    row.mu = p.mu;
    row.a = p.a;
    try {
      validate(p);
      row.coupling = std::exp(log_mass_coupling(p));
      const Regime reg = classify(p, sc);
      row.regime = to_string(reg);
      const bool admissible = reg == Regime::Omega1 || reg == Regime::Omega2;
      if (admissible && (with_min || with_mp)) {
        const SolveReport m = minimize_from_gaussian(p, g, sc, minimize_options(c));
        row.m_a = m.energy;
        if (with_mp) {
          FamilySpec spec;
          row.level = estimate_mp_level(p, g, sc, spec, m).level;
        }
      }
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });
  std::ostringstream os;
  os << "mu,a,coupling,regime,m_a,mp_level,error\n";
  for (const Row& r : rows) {
    os << csv_real(r.mu) << ',' << csv_real(r.a) << ',' << csv_real(r.coupling) << ',' << r.regime << ','
       << csv_real(r.m_a) << ',' << csv_real(r.level) << ',' << (r.error.empty() ? "" : csv_text(r.error)) << '\n';
  }
  return {os.str()};
}

}  // namespace

double resolve_mass(const io::RunConfig& c, const SharpConstants& sc) {
  if (c.mass_multiple) {
    if (!c.mass_spec.empty()) throw std::invalid_argument("give either a mass or a mass multiple, not both");
    if (!is_l2_critical(c.params.dim, c.params.q)) {
      throw DomainError("invalid_parameter", "mass multiples of abar_N require q = 2 + 4/N");
    }
    if (!(*c.mass_multiple > 0.0)) throw DomainError("invalid_parameter", "mass multiple must be positive");
    return mass_for_abar_multiple(c.params, sc, *c.mass_multiple);
  }
  if (c.mass_spec.empty()) return c.params.a;
  return resolve_mass_spec(c.mass_spec, c.params, sc);
}

std::string error_document(const std::string& kind, const std::string& message, const io::json& context) {
  const json doc = {{"schema_version", io::kSchemaVersion},
                    {"error_kind", kind},
                    {"message", message},
                    {"context", context}};
  return dump(doc);
}

CommandOutput run(const io::RunConfig& c) {
  const json context = {{"command", c.command}, {"params", params_json(c.params)}, {"mass_spec", c.mass_spec}};
  try {
    if (c.output_format != "json" && c.output_format != "csv") {
      throw std::invalid_argument("output format must be json or csv");
    }
    if (c.command == "constants") return cmd_constants(c);
    if (c.command == "profile") return cmd_profile(c);
    if (c.command == "fiber") return cmd_fiber(c);
    if (c.command == "minimize") return cmd_minimize(c);
    if (c.command == "subadd") return cmd_subadd(c);
    if (c.command == "boundary-scan") return cmd_boundary_scan(c);
    if (c.command == "mountain-pass") return cmd_mountain_pass(c);
    if (c.command == "cpo") return cmd_cpo(c);
    if (c.command == "evolve") return cmd_evolve(c);
    if (c.command == "sweep") return cmd_sweep(c);
    return {error_document("usage", "unknown command '" + c.command + "'", context), kExitUsage};
  } catch (const DomainError& e) {
    const int code = e.kind() == "invalid_parameter" ? kExitUsage : kExitDomain;
    return {error_document(e.kind(), e.what(), context), code};
  } catch (const std::invalid_argument& e) {
    return {error_document("usage", e.what(), context), kExitUsage};
  } catch (const std::exception& e) {
    return {error_document("runtime", e.what(), context), kExitDomain};
  }
}

}  // namespace nls::cli
