#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qcpmd/qcpmd.hpp"

namespace {

enum ExitCode { ok = 0, config_failure = 1, fixture_failure = 2, trajectory_abort = 3 };

std::size_t threads_from_env() {
  const char* v = std::getenv("QCPMD_THREADS");
  if (v == nullptr || *v == '\0') return 0;
  try {
    return static_cast<std::size_t>(qcpmd::detail::parse_u64("QCPMD_THREADS", v));
  } catch (const qcpmd::config_error&) {
    throw qcpmd::config_error(std::string("QCPMD_THREADS must be a non-negative integer, got '") + v + "'");
  }
}

int run(const std::string& preset, const std::string& config_path, const std::string& seed, const std::string& out) {
  qcpmd::RunConfig config;
  try {
    config = qcpmd::preset_defaults(preset);
    if (!config_path.empty()) config = qcpmd::load_run_config(config_path, config);
    if (!seed.empty()) config.dynamics.seed = qcpmd::detail::parse_u64("--seed", seed);
    if (!out.empty()) config.output_dir = out;
    config.threads = threads_from_env();
    config.validate();
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return config_failure;
  }

  try {
    const auto outcome = qcpmd::execute_preset(config);
    std::cout << outcome.summary.dump(2) << '\n';
    if (outcome.aborted) {
      std::cerr << "one or more trajectories aborted; see summary.json\n";
      return trajectory_abort;
    }
    return ok;
  } catch (const qcpmd::parse_error& e) {
    std::cerr << "fixture error: " << e.what() << '\n';
    return fixture_failure;
  } catch (const qcpmd::range_error& e) {
    std::cerr << "fixture error: " << e.what() << '\n';
    return fixture_failure;
  } catch (const qcpmd::convergence_error& e) {
    std::cerr << "VQE failed: " << e.what() << '\n';
    return trajectory_abort;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return config_failure;
  } catch (const std::length_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return config_failure;
  }
}

int validate(const std::string& path) {
  try {
    const auto table = qcpmd::load_table(path);
    const auto c = qcpmd::run_curve(table);
    std::cout << "table: " << path << '\n'
              << "qubits: " << table.num_qubits() << '\n'
              << "pauli words: " << table.words().size() << " (" << table.non_identity_words()
              << " non-identity)\n"
              << "grid: " << table.grid().size() << " points over [" << table.min_r() << ", " << table.max_r()
              << "] Angstrom\n"
              << "ground energy minimum: " << qcpmd::format_number(c.energy[c.argmin_index], 10) << " Ha at "
              << c.r[c.argmin_index] << " Angstrom\n"
              << "ok\n";
    return ok;
  } catch (const qcpmd::parse_error& e) {
    std::cerr << "fixture error: " << e.what() << '\n';
    return fixture_failure;
  } catch (const std::exception& e) {
    std::cerr << "fixture error: " << e.what() << '\n';
    return fixture_failure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum-classical parameter molecular dynamics for H2"};
  app.require_subcommand(1);

  std::string preset, config_path, seed, out;
  auto* run_cmd = app.add_subcommand("run", "Run an experiment preset");
  run_cmd->add_option("--preset", preset, "equilibrium | quench | variance-bench | vqe | curve")->required();
  run_cmd->add_option("--config", config_path, "key = value file applied over the preset defaults");
  run_cmd->add_option("--seed", seed, "master seed (u64)");
  run_cmd->add_option("--out", out, "output directory");

  std::string table_path;
  auto* validate_cmd = app.add_subcommand("validate", "Check a Hamiltonian table");
  validate_cmd->add_option("--table", table_path, "table CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : config_failure;
  }

  if (*run_cmd) return run(preset, config_path, seed, out);
  return validate(table_path);
}
