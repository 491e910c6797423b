#include "nls/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <system_error>

// pchip.hpp (Boost 1.74) calls isnan unqualified; math.h provides ::isnan.
#include <math.h>

#include <boost/math/interpolators/pchip.hpp>

namespace nls::io {

namespace {

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_plain(const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw std::invalid_argument("not a number: '" + text + "'");
  }
  return v;
}

std::string format_real(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

json vector_json(const std::vector<double>& v) { return json(v); }

}  // namespace

double parse_real(const std::string& text) {
  const auto slash = text.find('/');
  if (slash == std::string::npos) return parse_plain(text);
  const double num = parse_plain(text.substr(0, slash));
  const double den = parse_plain(text.substr(slash + 1));
  if (den == 0.0) throw std::invalid_argument("zero denominator in '" + text + "'");
  return num / den;
}

std::vector<double> parse_real_list(const std::string& text) {
  std::vector<double> out;
  if (trim(text).empty()) return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_real(item));
  return out;
}

json to_json(const Norms& n) {
  return {{"grad_l2_sq", n.grad}, {"l2star_power", n.crit}, {"lq_power", n.lq}, {"mass", n.mass}};
}

json to_json(const Exponents& x) {
  return {{"two_star", x.two_star},
          {"gamma_q", x.gamma_q},
          {"q_gamma_q", x.q_gamma_q},
          {"q_class", to_string(x.q_class)}};
}

json to_json(const Thresholds& t, const Exponents& x) {
  return {{"exponents", to_json(x)},
          {"S", t.S},
          {"C_Nq", t.C_Nq},
          {"K", optional_json(t.K)},
          {"a0", optional_json(t.a0)},
          {"rho_crit", optional_json(t.rho_crit)},
          {"rho0", optional_json(t.rho0)},
          {"abar_N", optional_json(t.abar_N)},
          {"regime", t.regime ? json(to_string(*t.regime)) : json(nullptr)}};
}

json to_json(const FiberReport& r) {
  json samples = json::array();
  for (const auto& s : r.samples) samples.push_back({{"tau", s.tau}, {"psi", s.psi}, {"phi", s.phi}});
  return {{"norms", to_json(r.norms)},
          {"tau_plus", optional_json(r.tau_plus)},
          {"tau_minus", optional_json(r.tau_minus)},
          {"tau_u", optional_json(r.tau_u)},
          {"tau_u_scan", optional_json(r.tau_u_scan)},
          {"E_at_tau_plus", optional_json(r.E_at_tau_plus)},
          {"E_at_tau_minus", optional_json(r.E_at_tau_minus)},
          {"E_at_tau_u", optional_json(r.E_at_tau_u)},
          {"psi_second_at_tau_minus", optional_json(r.psi_second_at_tau_minus)},
          {"decreasing", r.decreasing},
          {"samples", samples}};
}

json to_json(const SolveReport& r, std::size_t max_trace) {
  json trace = json::array();
  const std::size_t n = r.trace.size();
  if (n > 0 && max_trace > 0) {
    const std::size_t stride = std::max<std::size_t>(1, (n + max_trace - 1) / max_trace);
    for (std::size_t i = 0; i < n; i += stride) {
      const auto& t = r.trace[i];
      trace.push_back({{"iteration", t.iteration}, {"energy", t.energy}, {"pohozaev", t.pohozaev}, {"grad_l2_sq", t.grad}});
    }
    if ((n - 1) % stride != 0) {
      const auto& t = r.trace.back();
      trace.push_back({{"iteration", t.iteration}, {"energy", t.energy}, {"pohozaev", t.pohozaev}, {"grad_l2_sq", t.grad}});
    }
  }
  return {{"energy", r.energy},
          {"pohozaev", r.pohozaev},
          {"lambda", r.lambda},
          {"grad_residual", r.grad_residual},
          {"l2_residual", r.l2_residual},
          {"mass", r.mass},
          {"grad_l2_sq", r.final.grid ? grad_l2_sq(r.final) : 0.0},
          {"iterations", r.iterations},
          {"converged", r.converged},
          {"boundary_hit", r.boundary_hit},
          {"status", r.status},
          {"trace", trace}};
}

json to_json(const BoundaryScanReport& r) {
  return {{"min_energy", r.min_energy}, {"energies", vector_json(r.energies)}};
}

json to_json(const SubadditivityReport& r) {
  return {{"m_a", r.m_a}, {"m_a1", r.m_a1}, {"m_a_minus_a1", r.m_a_minus_a1}, {"gap", r.gap}, {"strict", r.strict}};
}

json to_json(const LevelEstimate& r) {
  json trace = json::array();
  for (const auto& s : r.family_trace) trace.push_back({{"s", s.s}, {"projected_energy", s.projected_energy}});
  return {{"level", r.level},
          {"family_level", r.family_level},
          {"m_a", r.m_a},
          {"upper_bound", r.upper_bound},
          {"accepted", r.accepted},
          {"refine_iterations", r.refine_iterations},
          {"refine_residual", r.refine_residual},
          {"witness",
           {{"energy", r.witness_energy},
            {"pohozaev", r.witness_pohozaev},
            {"mass", r.witness_mass},
            {"lambda", r.witness_lambda},
            {"grad_l2_sq", r.witness.grid ? grad_l2_sq(r.witness) : 0.0}}},
          {"family_trace", trace}};
}

json to_json(const PositivityProbe& r) {
  return {{"min_level", r.min_level},
          {"levels", vector_json(r.levels)},
          {"low_rho_gap", vector_json(r.low_rho_gap)},
          {"low_gn_ratio", vector_json(r.low_gn_ratio)},
          {"positive", r.positive}};
}

json to_json(const CpoSequenceReport& r) {
  json items = json::array();
  for (const auto& i : r.items) {
    json item = {{"parameter", i.parameter},
                 {"ratio", i.ratio},
                 {"projected_energy", i.projected_energy},
                 {"closed_form", i.closed_form},
                 {"mass", i.mass},
                 {"excess", i.excess},
                 {"l2star_norm", i.l2star_norm},
                 {"lq_norm", i.lq_norm}};
    if (r.case_id == 2) item["s"] = i.s;
    items.push_back(item);
  }
  return {{"case", r.case_id},
          {"mu", r.mu},
          {"a", r.a},
          {"abar_N", r.abar},
          {"theta", r.theta},
          {"interpolation_bound", r.interpolation_bound},
          {"epsilon", r.epsilon},
          {"items", items},
          {"monotone", r.monotone},
          {"below_epsilon", r.below_epsilon}};
}

json to_json(const TrajectorySummary& r) {
  return {{"times", vector_json(r.times)},
          {"mass", vector_json(r.mass)},
          {"energy", vector_json(r.energy)},
          {"grad_norm", vector_json(r.grad_norm)},
          {"h1_distance", vector_json(r.h1_distance)},
          {"modulus_drift", vector_json(r.modulus_drift)},
          {"phase", vector_json(r.phase)},
          {"blowup", r.blowup},
          {"blowup_time", optional_json(r.blowup_time)},
          {"blowup_reason", r.blowup_reason},
          {"steps", r.steps},
          {"smallest_dt", r.smallest_dt}};
}

json to_json(const StabilityReport& r) {
  return {{"initial_distance", r.initial_distance},
          {"max_distance", r.max_distance},
          {"bound_factor", r.bound_factor},
          {"bounded", r.bounded},
          {"trajectory", to_json(r.trajectory)}};
}

json to_json(const BlowupReport& r) {
  return {{"amplification", r.amplification},
          {"initial_energy", r.initial_energy},
          {"initial_pohozaev", r.initial_pohozaev},
          {"max_grad_growth", r.max_grad_growth},
          {"blowup", r.blowup},
          {"blowup_time", optional_json(r.blowup_time)},
          {"trajectory", to_json(r.trajectory)}};
}

json profile_to_json(const Profile& u) {
  const RadialGrid& g = *u.grid;
  return {{"schema_version", kSchemaVersion},
          {"dim", g.dim()},
          {"r_max", g.r_max()},
          {"n", g.size()},
          {"core_scale", g.core_scale()},
          {"values", std::vector<double>(u.values.data(), u.values.data() + u.values.size())}};
}

Profile profile_from_json(const json& j) {
  try {
    const int dim = j.at("dim").get<int>();
    const double r_max = j.at("r_max").get<double>();
    const int n = j.at("n").get<int>();
    const double core = j.value("core_scale", RadialGrid::kDefaultCoreScale);
    const auto values = j.at("values").get<std::vector<double>>();
    if (int(values.size()) != n) throw std::invalid_argument("profile has " + std::to_string(values.size()) + " values, expected n = " + std::to_string(n));
    Vector v = Eigen::Map<const Vector>(values.data(), n);
    if (!v.allFinite()) throw std::invalid_argument("profile values must be finite");
    return Profile(make_grid(dim, r_max, n, core), std::move(v));
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed profile JSON: ") + e.what());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot write '" + path + "'");
  out << content;
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

Profile read_profile(const std::string& path, int dim, const GridPtr& target) {
  const std::string text = read_file(path);
  const std::string head = trim(text.substr(0, 64));
  if (!head.empty() && head.front() == '{') {
    json j;
    try {
      j = json::parse(text);
    } catch (const json::exception& e) {
      throw std::invalid_argument("'" + path + "': " + e.what());
    }
    Profile u = profile_from_json(j);
    if (u.grid->dim() != dim) {
      throw std::invalid_argument("profile dimension " + std::to_string(u.grid->dim()) +
                                  " does not match --dim " + std::to_string(dim));
    }
    return u;
  }

  std::vector<double> r, v;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::invalid_argument(path + ":" + std::to_string(line_no) + ": expected 'r,value'");
    try {
      const double ri = parse_plain(line.substr(0, comma));
      const double vi = parse_plain(line.substr(comma + 1));
      r.push_back(ri);
      v.push_back(vi);
    } catch (const std::invalid_argument&) {
      if (r.empty()) continue;  // header row
      throw std::invalid_argument(path + ":" + std::to_string(line_no) + ": malformed row");
    }
  }
  if (r.size() < 4) throw std::invalid_argument(path + ": a CSV profile needs at least four rows");
  for (std::size_t i = 1; i < r.size(); ++i) {
    if (!(r[i] > r[i - 1])) throw std::invalid_argument(path + ": radii must be strictly increasing");
  }
  if (!(r.front() > 0.0)) throw std::invalid_argument(path + ": radii must be positive");

  const int n = int(r.size());
  if (n >= 16) {
    const GridPtr native = make_grid(dim, r.back(), n);
    bool same = true;
    for (int i = 0; i < n && same; ++i) same = std::abs(native->nodes()(i) - r[i]) <= 1e-9 * r.back();
    if (same) return Profile(native, Eigen::Map<const Vector>(v.data(), n));
  }

  const double r_first = r.front(), r_last = r.back(), v_first = v.front();
  boost::math::interpolators::pchip<std::vector<double>> spline(std::move(r), std::move(v));
  return Profile::sample(target, [&](double x) {
    if (x > r_last) return 0.0;
    if (x < r_first) return v_first;
    return spline(x);
  });
}

std::string trajectory_csv(const TrajectorySummary& r) {
  std::ostringstream os;
  os << "t,mass,energy,grad_norm,h1_distance,modulus_drift,phase\n";
  for (std::size_t i = 0; i < r.times.size(); ++i) {
    os << format_real(r.times[i]) << ',' << format_real(r.mass[i]) << ',' << format_real(r.energy[i]) << ','
       << format_real(r.grad_norm[i]) << ',' << (i < r.h1_distance.size() ? format_real(r.h1_distance[i]) : "")
       << ',' << format_real(r.modulus_drift[i]) << ',' << format_real(r.phase[i]) << '\n';
  }
  return os.str();
}

std::string family_trace_csv(const LevelEstimate& r) {
  std::ostringstream os;
  os << "s,projected_energy\n";
  for (const auto& s : r.family_trace) os << format_real(s.s) << ',' << format_real(s.projected_energy) << '\n';
  return os.str();
}

json to_json(const RunConfig& c) {
  json j = {{"command", c.command},
            {"params", {{"dim", c.params.dim}, {"q", c.params.q}, {"mu", c.params.mu}, {"a", c.params.a}}},
            {"mass_spec", c.mass_spec},
            {"mass_multiple", optional_json(c.mass_multiple)},
            {"grid", {{"r_max", optional_json(c.r_max)}, {"n", c.grid_n ? json(*c.grid_n) : json(nullptr)}}},
            {"solver", {{"tol", c.tol}, {"max_iterations", c.max_iterations}}},
            {"seed", c.seed},
            {"output", {{"path", c.output_path}, {"format", c.output_format}}},
            {"options", c.options}};
  return j;
}

RunConfig run_config_from_json(const json& j) {
  try {
    RunConfig c;
    c.command = j.at("command").get<std::string>();
    const json& p = j.at("params");
    c.params.dim = p.at("dim").get<int>();
    c.params.q = p.at("q").get<double>();
    c.params.mu = p.at("mu").get<double>();
    c.params.a = p.at("a").get<double>();
    c.mass_spec = j.value("mass_spec", "");
    if (j.contains("mass_multiple") && !j["mass_multiple"].is_null()) c.mass_multiple = j["mass_multiple"].get<double>();
    if (j.contains("grid")) {
      const json& g = j["grid"];
      if (g.contains("r_max") && !g["r_max"].is_null()) c.r_max = g["r_max"].get<double>();
      if (g.contains("n") && !g["n"].is_null()) c.grid_n = g["n"].get<int>();
    }
    if (j.contains("solver")) {
      c.tol = j["solver"].value("tol", c.tol);
      c.max_iterations = j["solver"].value("max_iterations", c.max_iterations);
    }
    c.seed = j.value("seed", c.seed);
    if (j.contains("output")) {
      c.output_path = j["output"].value("path", "");
      c.output_format = j["output"].value("format", "json");
    }
    c.options = j.value("options", json::object());
    return c;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed run configuration: ") + e.what());
  }
}

}  // namespace nls::io
