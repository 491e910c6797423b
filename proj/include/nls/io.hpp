#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nls/constants.hpp"
#include "nls/dynamics.hpp"
#include "nls/functionals.hpp"
#include "nls/grid.hpp"
#include "nls/minimize.hpp"
#include "nls/mountainpass.hpp"
#include "nls/profiles.hpp"

namespace nls::io {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// Parses "2.5", "1e-3" or a ratio "10/3"; throws std::invalid_argument.
double parse_real(const std::string& text);

/// Comma separated reals, each accepted by parse_real. Empty text -> {}.
std::vector<double> parse_real_list(const std::string& text);

// Serialization. Optional quantities become null; doubles keep full
// precision (shortest round-trip form).
json to_json(const Norms& n);
json to_json(const Exponents& x);
json to_json(const Thresholds& t, const Exponents& x);
json to_json(const FiberReport& r);
/// `max_trace` caps the number of trace entries (evenly downsampled, the
/// last one always kept); the profile itself is not embedded.
json to_json(const SolveReport& r, std::size_t max_trace = 200);
json to_json(const BoundaryScanReport& r);
json to_json(const SubadditivityReport& r);
json to_json(const LevelEstimate& r);
json to_json(const PositivityProbe& r);
json to_json(const CpoSequenceReport& r);
json to_json(const TrajectorySummary& r);
json to_json(const StabilityReport& r);
json to_json(const BlowupReport& r);

/// {"schema_version", "dim", "r_max", "n", "core_scale", "values"}. Nodes are
/// implied by the grid layout (see RadialGrid).
json profile_to_json(const Profile& u);
Profile profile_from_json(const json& j);

/// Reads a profile from JSON, or from CSV rows "r,value" (optional header).
/// CSV rows that coincide with the default layout for (dim, last r, rows) are
/// taken as they are; otherwise the data are resampled by monotone cubic
/// (PCHIP) interpolation onto `target`, with 0 beyond the last radius.
Profile read_profile(const std::string& path, int dim, const GridPtr& target);

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

/// times,mass,energy,grad_norm,h1_distance,modulus_drift,phase rows.
std::string trajectory_csv(const TrajectorySummary& r);
/// s,projected_energy rows.
std::string family_trace_csv(const LevelEstimate& r);

/// Everything a command needs: problem, grid, solver settings, seed, output.
/// Command-specific knobs live in `options` under documented names.
struct RunConfig {
  std::string command;
  ProblemParams params;
  /// Mass as given ("7.3", "auto-a0", "0.5a0"); resolved against a0 at run
  /// time. Empty means params.a is used as is.
  std::string mass_spec;
  std::optional<double> mass_multiple;  // critical q: mu a^{q(1-g)/2} = k abar_N
  std::optional<double> r_max;
  std::optional<int> grid_n;
  double tol = 1e-8;
  int max_iterations = 20000;
  std::uint64_t seed = 1;
  std::string output_path;    // empty: standard output
  std::string output_format = "json";
  json options = json::object();

  bool operator==(const RunConfig&) const = default;
};

json to_json(const RunConfig& c);
RunConfig run_config_from_json(const json& j);

}  // namespace nls::io
