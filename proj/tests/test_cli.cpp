#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <string>

#include "nls/cli.hpp"

using namespace nls;
using namespace nls::cli;
using nls::io::json;
using nls::io::RunConfig;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("nls_test_cli_" + name)).string();
}

RunConfig config(const std::string& command, const std::string& mass = "") {
  RunConfig c;
  c.command = command;
  c.params.dim = 3;
  c.params.q = 2.5;
  c.params.mu = 1.0;
  c.mass_spec = mass;
  return c;
}

struct Captured {
  std::string out;
  int code = -1;
};

Captured run_binary(const std::string& args) {
  const std::string cmd = std::string(NLS_CLI_PATH) + " " + args + " 2>/dev/null";
  Captured r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf;
  std::size_t got;
  while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), got);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

}  // namespace

TEST_CASE("constants at a0 classify as Omega2") {
  const CommandOutput out = run(config("constants", "auto-a0"));
  REQUIRE(out.exit_code == kExitOk);
  const json j = json::parse(out.text);
  CHECK(j["regime"] == "Omega2");
  CHECK(j["params"]["a"].get<double>() == doctest::Approx(j["a0"].get<double>()).epsilon(1e-14));
  CHECK(j["S"].get<double>() > 0.0);

  const json half = json::parse(run(config("constants", "0.5a0")).text);
  CHECK(half["regime"] == "Omega1");
  const json twice = json::parse(run(config("constants", "2a0")).text);
  CHECK(twice["regime"] == "Omega3");

  const json bare = json::parse(run(config("constants")).text);
  CHECK(bare["regime"].is_null());
  CHECK(bare["params"]["a"].is_null());
  CHECK(bare["a0"].get<double>() == doctest::Approx(j["a0"].get<double>()).epsilon(1e-14));
}

TEST_CASE("fiber of a stored Gaussian has two critical points") {
  const std::string path = temp_path("gaussian.json");
  RunConfig prof = config("profile", "0.5a0");
  prof.grid_n = 2048;
  prof.options = {{"kind", "gaussian"}, {"sigma", 1.0}};
  const CommandOutput p = run(prof);
  REQUIRE(p.exit_code == kExitOk);
  io::write_file(path, p.text);

  RunConfig fib = config("fiber");
  fib.grid_n = 2048;
  fib.options = {{"profile", path}};
  const CommandOutput out = run(fib);
  REQUIRE(out.exit_code == kExitOk);
  const json r = json::parse(out.text)["report"];
  REQUIRE(!r["tau_plus"].is_null());
  REQUIRE(!r["tau_minus"].is_null());
  CHECK(r["tau_plus"].get<double>() < r["tau_minus"].get<double>());
  CHECK(r["E_at_tau_plus"].get<double>() < 0.0);
  CHECK(r["E_at_tau_minus"].get<double>() > 0.0);
  std::filesystem::remove(path);
}

TEST_CASE("cpo case 2 with a mass multiple") {
  RunConfig c;
  c.command = "cpo";
  c.params.dim = 4;
  c.params.q = 3.0;
  c.params.mu = 1.0;
  c.mass_multiple = 2.0;
  c.options = {{"case", 2}, {"steps", 3}};
  const CommandOutput out = run(c);
  REQUIRE(out.exit_code == kExitOk);
  const json r = json::parse(out.text)["report"];
  CHECK(r["case"] == 2);
  CHECK(r["monotone"] == true);
  REQUIRE(r["items"].size() == 3);
  CHECK(r["items"][2]["parameter"].get<double>() == doctest::Approx(1e-3));
}

TEST_CASE("error documents and exit codes") {
  RunConfig bad_mu = config("constants", "1");
  bad_mu.params.mu = -1.0;
  const CommandOutput usage = run(bad_mu);
  CHECK(usage.exit_code == kExitUsage);
  const json u = json::parse(usage.text);
  CHECK(u["error_kind"].is_string());
  CHECK(u["schema_version"] == io::kSchemaVersion);
  CHECK(u["context"]["command"] == "constants");

  RunConfig omega3 = config("minimize", "2a0");
  omega3.grid_n = 1024;
  const CommandOutput domain = run(omega3);
  CHECK(domain.exit_code == kExitDomain);
  CHECK(json::parse(domain.text)["error_kind"] == "regime");

  CHECK(run(config("no-such-command")).exit_code == kExitUsage);
  RunConfig bad_q = config("constants", "1");
  bad_q.params.q = 7.0;
  CHECK(run(bad_q).exit_code == kExitUsage);
}

TEST_CASE("binary: exit codes, output files and byte-identical reruns") {
  const Captured help = run_binary("--help");
  CHECK(help.code == 0);

  const Captured unknown = run_binary("constants --no-such-flag");
  CHECK(unknown.code == kExitUsage);
  CHECK(json::parse(unknown.out)["error_kind"] == "usage");
  CHECK(run_binary("constants --q abc").code == kExitUsage);
  CHECK(run_binary("minimize --a 2a0 --grid-n 1024").code == kExitDomain);

  const std::string args = "minimize --a 0.5a0 --grid-n 2048 --random-init --seed 3";
  const Captured first = run_binary(args);
  const Captured second = run_binary(args);
  REQUIRE(first.code == 0);
  CHECK(first.out == second.out);
  CHECK(json::parse(first.out)["report"]["converged"] == true);

  const std::string path = temp_path("constants.json");
  CHECK(run_binary("constants --q 10/3 --dim 3 --a 1 --out " + path).code == 0);
  const json j = json::parse(io::read_file(path));
  CHECK(j["regime"].is_null() == false);

  // A stored configuration reproduces the direct run.
  const std::string cfg = temp_path("config.json");
  RunConfig c = config("constants", "auto-a0");
  io::write_file(cfg, io::to_json(c).dump());
  const Captured via_config = run_binary("run --config " + cfg);
  const Captured direct = run_binary("constants --a auto-a0");
  CHECK(via_config.code == 0);
  CHECK(via_config.out == direct.out);
  std::filesystem::remove(path);
  std::filesystem::remove(cfg);
}
