// Command-line front end: flags -> RunConfig -> nls::cli::run.

#include <cstdint>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "nls/cli.hpp"

namespace {

using nls::io::json;

struct Common {
  int dim = 3;
  std::string q;
  double mu = 1.0;
  std::string a;
  std::optional<double> mass_multiple;
  std::optional<double> r_max;
  std::optional<int> grid_n;
  double tol = 1e-8;
  int max_iterations = 20000;
  std::uint64_t seed = 1;
  std::string out;
  bool csv = false;
};

// Flag values that only exist for some commands; stored as given and copied
// into RunConfig::options when the flag was used.
struct Extra {
  std::vector<std::pair<std::string, CLI::Option*>> flags;  // a key may recur per command
  std::map<std::string, std::string> strings;
  std::map<std::string, double> reals;
  std::map<std::string, int> ints;
  std::map<std::string, bool> bools;
};

void add_common(CLI::App* cmd, Common& c, bool mass = true) {
  cmd->add_option("--dim", c.dim, "space dimension N >= 3");
  cmd->add_option("--q", c.q, "exponent q, e.g. 2.5 or 10/3");
  cmd->add_option("--mu", c.mu, "coupling mu > 0");
  if (mass) {
    cmd->add_option("--a", c.a, "mass: number, ratio, auto-a0 or <k>a0 (e.g. 0.5a0)");
    cmd->add_option("--mass-multiple", c.mass_multiple, "critical q: mu a^{q(1-gamma)/2} = k abar_N");
  }
  cmd->add_option("--r-max", c.r_max, "grid truncation radius");
  cmd->add_option("--grid-n", c.grid_n, "number of grid nodes");
  cmd->add_option("--tol", c.tol, "solver tolerance");
  cmd->add_option("--max-iterations", c.max_iterations, "solver iteration cap");
  cmd->add_option("--seed", c.seed, "seed for randomized trials");
  cmd->add_option("--out", c.out, "write the output document here instead of stdout");
  cmd->add_flag("--json", "JSON output (default)");
}

CLI::Option* add_string(CLI::App* cmd, Extra& e, const std::string& flag, const std::string& key, const std::string& help) {
  e.flags.emplace_back(key, cmd->add_option(flag, e.strings[key], help));
  return e.flags.back().second;
}
CLI::Option* add_real(CLI::App* cmd, Extra& e, const std::string& flag, const std::string& key, const std::string& help) {
  e.flags.emplace_back(key, cmd->add_option(flag, e.reals[key], help));
  return e.flags.back().second;
}
CLI::Option* add_int(CLI::App* cmd, Extra& e, const std::string& flag, const std::string& key, const std::string& help) {
  e.flags.emplace_back(key, cmd->add_option(flag, e.ints[key], help));
  return e.flags.back().second;
}
CLI::Option* add_bool(CLI::App* cmd, Extra& e, const std::string& flag, const std::string& key, const std::string& help) {
  e.flags.emplace_back(key, cmd->add_flag(flag, e.bools[key], help));
  return e.flags.back().second;
}

json collect(const Extra& e) {
  json options = json::object();
  for (const auto& [key, opt] : e.flags) {
    if (opt->count() == 0) continue;
    if (auto it = e.strings.find(key); it != e.strings.end()) options[key] = it->second;
    if (auto it = e.reals.find(key); it != e.reals.end()) options[key] = it->second;
    if (auto it = e.ints.find(key); it != e.ints.end()) options[key] = it->second;
    if (auto it = e.bools.find(key); it != e.bools.end()) options[key] = it->second;
  }
  return options;
}

int emit(const nls::cli::CommandOutput& out, const std::string& path) {
  if (path.empty() || out.exit_code != nls::cli::kExitOk) {
    std::cout << out.text;
  } else {
    try {
      nls::io::write_file(path, out.text);
    } catch (const std::exception& e) {
      std::cout << nls::cli::error_document("usage", e.what());
      return nls::cli::kExitUsage;
    }
  }
  return out.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Normalized solutions of the Sobolev-critical Schrodinger equation with a mixed nonlinearity"};
  app.require_subcommand(1);
  Common common;
  Extra extra;
  std::string config_path;

  auto* constants = app.add_subcommand("constants", "exponents, sharp constants, thresholds and regime");
  add_common(constants, common);

  auto* profile = app.add_subcommand("profile", "write a Weinstein, bubble or Gaussian profile (JSON)");
  add_common(profile, common);
  add_string(profile, extra, "--kind", "kind", "weinstein, bubble or gaussian");
  add_real(profile, extra, "--sigma", "sigma", "Gaussian width");
  add_real(profile, extra, "--b", "b", "bubble concentration");
  add_real(profile, extra, "--amplitude", "amplitude", "bubble amplitude C");

  auto* fiber = app.add_subcommand("fiber", "critical points of the fiber map of a profile");
  add_common(fiber, common);
  add_string(fiber, extra, "--profile", "profile", "profile file (JSON or CSV r,value)")->required();
  add_int(fiber, extra, "--samples", "samples", "log-tau scan samples");

  auto* minimize = app.add_subcommand("minimize", "local minimizer on V_a");
  add_common(minimize, common);
  add_string(minimize, extra, "--init", "init", "initial profile file");
  add_bool(minimize, extra, "--random-init", "random_init", "seeded random initial profile");
  add_real(minimize, extra, "--sigma", "sigma", "width of the Gaussian initial profile");
  add_string(minimize, extra, "--profile-out", "profile_out", "write the minimizer profile here");
  add_int(minimize, extra, "--max-trace", "max_trace", "trace entries kept in the report");

  auto* subadd = app.add_subcommand("subadd", "subadditivity m_a <= m_a1 + m_{a-a1}");
  add_common(subadd, common);
  add_string(subadd, extra, "--a1", "a1", "split mass (default a/2)");

  auto* scan = app.add_subcommand("boundary-scan", "minimum energy of random profiles on the boundary of V_a");
  add_common(scan, common);
  add_int(scan, extra, "--samples", "samples", "number of random profiles");

  auto* mp = app.add_subcommand("mountain-pass", "upper estimate of the mountain-pass level");
  add_common(mp, common);
  add_int(mp, extra, "--members", "members", "trial family size");
  add_real(mp, extra, "--s-max", "s_max", "largest bubble weight in the family");
  add_real(mp, extra, "--bubble-b", "bubble_b", "bubble concentration");
  add_real(mp, extra, "--cutoff-radius", "cutoff_radius", "bubble cutoff radius");
  add_int(mp, extra, "--refine-iterations", "refine_iterations", "descent iterations after the sweep");
  add_int(mp, extra, "--probe-trials", "probe_trials", "also run the positivity probe with this many trials");
  add_string(mp, extra, "--trace-csv", "trace_csv", "write the family trace as CSV");
  add_string(mp, extra, "--witness-out", "witness_out", "write the witness profile");

  auto* cpo = app.add_subcommand("cpo", "sequences with vanishing energy on the Pohozaev manifold (critical q)");
  add_common(cpo, common);
  add_int(cpo, extra, "--case", "case", "1 or 2")->required();
  add_string(cpo, extra, "--n-values", "n_values", "case 1 cutoff radii, e.g. 5,10,20,40");
  add_string(cpo, extra, "--A-values", "A_values", "case 2 excess values, e.g. 0.1,0.01,0.001");
  add_int(cpo, extra, "--steps", "steps", "default sequence length");

  auto* ev = app.add_subcommand("evolve", "time evolution and stability / blow-up probes");
  add_common(ev, common);
  add_string(ev, extra, "--init", "init", "initial profile file")->required();
  add_real(ev, extra, "--dt", "dt", "time step");
  add_real(ev, extra, "--t-end", "t_end", "final time");
  add_string(ev, extra, "--probe", "probe", "none, stability or blowup");
  add_real(ev, extra, "--eps", "eps", "stability perturbation size");
  add_real(ev, extra, "--amp", "amp", "blow-up dilation factor");
  add_string(ev, extra, "--scheme", "scheme", "midpoint or conservative");
  add_int(ev, extra, "--stride", "stride", "record every stride-th step");
  ev->add_flag("--csv", common.csv, "CSV trajectory instead of JSON");

  auto* sweep = app.add_subcommand("sweep", "regime atlas over a (mu, a) grid (CSV)");
  add_common(sweep, common, false);
  add_string(sweep, extra, "--mu-values", "mu_values", "explicit mu list");
  add_real(sweep, extra, "--mu-min", "mu_min", "smallest mu");
  add_real(sweep, extra, "--mu-max", "mu_max", "largest mu");
  add_int(sweep, extra, "--mu-count", "mu_count", "number of mu values");
  add_string(sweep, extra, "--mu-spacing", "mu_spacing", "log or linear");
  add_string(sweep, extra, "--a-min", "a_min", "smallest mass (number or <k>a0)");
  add_string(sweep, extra, "--a-max", "a_max", "largest mass (number or <k>a0)");
  add_int(sweep, extra, "--a-count", "a_count", "number of masses per mu");
  add_string(sweep, extra, "--a-spacing", "a_spacing", "log or linear");
  add_bool(sweep, extra, "--with-minimizer", "with_minimizer", "add m_a");
  add_bool(sweep, extra, "--with-mountain-pass", "with_mountain_pass", "add the mountain-pass level");

  auto* run = app.add_subcommand("run", "execute a saved run configuration (JSON)");
  run->add_option("--config", config_path, "configuration file")->required();
  run->add_option("--out", common.out, "write the output document here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cout << nls::cli::error_document("usage", e.what());
    return nls::cli::kExitUsage;
  }

  CLI::App* chosen = app.get_subcommands().front();
  nls::io::RunConfig cfg;
  if (chosen == run) {
    try {
      cfg = nls::io::run_config_from_json(json::parse(nls::io::read_file(config_path)));
    } catch (const std::exception& e) {
      std::cout << nls::cli::error_document("usage", e.what());
      return nls::cli::kExitUsage;
    }
    return emit(nls::cli::run(cfg), common.out.empty() ? cfg.output_path : common.out);
  }

  cfg.command = chosen->get_name();
  cfg.params.dim = common.dim;
  cfg.params.mu = common.mu;
  try {
    if (!common.q.empty()) {
      cfg.params.q = nls::io::parse_real(common.q);
    } else {
      // The sequences of the cpo command live at the L2-critical exponent.
      cfg.params.q = chosen == cpo ? nls::l2_critical_exponent(common.dim) : 2.5;
    }
  } catch (const std::exception& e) {
    std::cout << nls::cli::error_document("usage", e.what());
    return nls::cli::kExitUsage;
  }
  cfg.mass_spec = common.a;
  cfg.mass_multiple = common.mass_multiple;
  cfg.r_max = common.r_max;
  cfg.grid_n = common.grid_n;
  cfg.tol = common.tol;
  cfg.max_iterations = common.max_iterations;
  cfg.seed = common.seed;
  cfg.output_path = common.out;
  cfg.output_format = common.csv ? "csv" : "json";
  cfg.options = collect(extra);
  return emit(nls::cli::run(cfg), cfg.output_path);
}
