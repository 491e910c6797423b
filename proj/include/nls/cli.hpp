#pragma once

#include <string>

#include "nls/io.hpp"

namespace nls::cli {

/// Exit codes of the command-line front end.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;  // regime, bracket, convergence, ...
inline constexpr int kExitUsage = 2;   // malformed or out-of-range input

struct CommandOutput {
  std::string text;  // exactly one JSON document (or CSV for csv output)
  int exit_code = kExitOk;
};

/// Resolves the mass of `c`: mass_multiple (critical q), "auto-a0", "<k>a0",
/// a plain number or ratio, or params.a when mass_spec is empty.
double resolve_mass(const io::RunConfig& c, const SharpConstants& sc);

/// Runs one command. Domain and usage failures are reported as an error
/// document {schema_version, error_kind, message, context}; nothing throws.
/// Side files requested through options (profile_out, witness_out,
/// trace_csv) are written before returning.
CommandOutput run(const io::RunConfig& c);

/// Error document for failures detected before a command runs.
std::string error_document(const std::string& kind, const std::string& message,
                           const io::json& context = io::json::object());

}  // namespace nls::cli
