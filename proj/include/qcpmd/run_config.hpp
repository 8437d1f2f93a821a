#pragma once

#include <algorithm>
#include <cmath>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "qcpmd/dynamics.hpp"
#include "qcpmd/error.hpp"

namespace qcpmd {

#ifdef QCPMD_DEFAULT_TABLE
inline constexpr const char* default_table_path = QCPMD_DEFAULT_TABLE;
#else
inline constexpr const char* default_table_path = "data/h2_sto3g.csv";
#endif

enum class ThetaPolicy { vqe, random, file };

inline std::string to_string(ThetaPolicy p) {
  switch (p) {
    case ThetaPolicy::vqe: return "vqe";
    case ThetaPolicy::random: return "random";
    case ThetaPolicy::file: return "file";
  }
  return "?";
}

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"equilibrium", "quench", "variance-bench", "vqe", "curve"};
  return names;
}

struct RunConfig {
  std::string preset = "equilibrium";
  DynamicsConfig dynamics;
  std::string hamiltonian_table = default_table_path;
  std::string output_dir = "qcpmd_out";
  std::size_t trials = 1;
  double initial_r = 0.735;  // Angstrom
  ThetaPolicy theta_policy = ThetaPolicy::vqe;
  std::string theta_file;
  std::vector<EstimatorKind> estimators{EstimatorKind::shadows, EstimatorKind::direct};
  double vqe_tolerance = 1e-6;
  std::size_t vqe_attempts = 10;
  std::size_t repetitions = 1000;  // variance-bench
  std::size_t threads = 0;         // 0 = sequential

  void validate() const {
    if (std::find(preset_names().begin(), preset_names().end(), preset) == preset_names().end())
      throw config_error("unknown preset '" + preset + "'");
    if (trials < 1) throw config_error("trials must be at least 1");
    if (estimators.empty()) throw config_error("at least one estimator is required");
    if (theta_policy == ThetaPolicy::file && theta_file.empty())
      throw config_error("initial_theta = file needs theta_file");
    if (!(vqe_tolerance > 0.0)) throw config_error("vqe_tolerance must be positive");
    if (vqe_attempts < 1) throw config_error("vqe_attempts must be at least 1");
    if (repetitions < 2) throw config_error("repetitions must be at least 2");
    if (!std::isfinite(initial_r)) throw config_error("initial_r must be finite");
    dynamics.validate();
  }
};

/// Defaults for a named preset: the 70 K, 0.1 fs, N_S=51/K=3, N_shot=51,
/// gamma=zeta=0.8 protocol, with run length and starting point per preset.
inline RunConfig preset_defaults(const std::string& name) {
  RunConfig c;
  c.preset = name;
  if (name == "equilibrium") {
    c.trials = 1;
    c.initial_r = 0.735;
    c.theta_policy = ThetaPolicy::vqe;
    c.dynamics.total_time = 4000.0;
  } else if (name == "quench") {
    c.trials = 5;
    c.initial_r = 1.0;
    c.theta_policy = ThetaPolicy::random;
    c.dynamics.total_time = 2000.0;
  } else if (name == "variance-bench") {
    c.trials = 5;
    c.theta_policy = ThetaPolicy::random;
    c.dynamics.ansatz = AnsatzConfig{};
  } else if (name == "vqe") {
    c.trials = 1;
    c.initial_r = 0.735;
    c.theta_policy = ThetaPolicy::random;
  } else if (name == "curve") {
    c.trials = 1;
  } else {
    throw config_error("unknown preset '" + name + "'");
  }
  return c;
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
  double x = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), x);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size() || !std::isfinite(x))
    throw config_error(key + ": expected a number, got '" + v + "'");
  return x;
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  std::uint64_t x = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), x);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw config_error(key + ": expected a non-negative integer, got '" + v + "'");
  return x;
}

inline EstimatorKind parse_estimator(const std::string& key, const std::string& v) {
  if (v == "shadows") return EstimatorKind::shadows;
  if (v == "direct") return EstimatorKind::direct;
  if (v == "exact") return EstimatorKind::exact;
  throw config_error(key + ": unknown estimator '" + v + "'");
}

}  // namespace detail

/// Applies one `key = value` setting. Unknown keys are errors.
inline void apply_setting(RunConfig& c, const std::string& key, const std::string& value) {
  using detail::parse_double;
  using detail::parse_u64;
  auto size = [&](const std::string& v) { return static_cast<std::size_t>(parse_u64(key, v)); };
  auto& d = c.dynamics;

  if (key == "preset") {
    if (value != c.preset) throw config_error("config file preset '" + value + "' differs from '" + c.preset + "'");
  } else if (key == "seed") d.seed = parse_u64(key, value);
  else if (key == "hamiltonian_table") c.hamiltonian_table = value;
  else if (key == "output_dir") c.output_dir = value;
  else if (key == "trials") c.trials = size(value);
  else if (key == "initial_r") c.initial_r = parse_double(key, value);
  else if (key == "initial_theta") {
    if (value == "vqe") c.theta_policy = ThetaPolicy::vqe;
    else if (value == "random") c.theta_policy = ThetaPolicy::random;
    else if (value == "file") c.theta_policy = ThetaPolicy::file;
    else throw config_error(key + ": expected vqe, random or file");
  } else if (key == "theta_file") c.theta_file = value;
  else if (key == "estimators") {
    c.estimators.clear();
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) c.estimators.push_back(detail::parse_estimator(key, detail::trim(item)));
  } else if (key == "vqe_tolerance") c.vqe_tolerance = parse_double(key, value);
  else if (key == "vqe_attempts") c.vqe_attempts = size(value);
  else if (key == "repetitions") c.repetitions = size(value);
  else if (key == "dt") d.dt = parse_double(key, value);
  else if (key == "mass") d.mass = parse_double(key, value);
  else if (key == "mu") d.mu = parse_double(key, value);
  else if (key == "temperature") d.temperature = parse_double(key, value);
  else if (key == "num_snapshots") d.estimator.num_snapshots = size(value);
  else if (key == "groups") d.estimator.groups = size(value);
  else if (key == "shots") d.estimator.shots = size(value);
  else if (key == "dissipation") {
    if (value == "fixed") d.dissipation = DissipationMode::fixed;
    else if (value == "adaptive") d.dissipation = DissipationMode::adaptive;
    else throw config_error(key + ": expected fixed or adaptive");
  } else if (key == "gamma") d.gamma = parse_double(key, value);
  else if (key == "zeta") d.zeta = parse_double(key, value);
  else if (key == "adaptive_window") d.adaptive_window = size(value);
  else if (key == "parameter_force_point") {
    if (value == "updated") d.parameter_force_point = ParameterForcePoint::updated;
    else if (value == "previous") d.parameter_force_point = ParameterForcePoint::previous;
    else throw config_error(key + ": expected updated or previous");
  } else if (key == "fd_step") d.fd_step = parse_double(key, value);
  else if (key == "total_time") d.total_time = parse_double(key, value);
  else if (key == "burn_in") d.burn_in = parse_double(key, value);
  else if (key == "ansatz_layout") {
    if (value == "real_amplitudes") d.ansatz.layout = AnsatzLayout::real_amplitudes;
    else if (value == "pair_excitations") d.ansatz.layout = AnsatzLayout::pair_excitations;
    else throw config_error(key + ": expected real_amplitudes or pair_excitations");
  } else if (key == "ansatz_depth") d.ansatz.depth = size(value);
  else if (key == "initial_occupation") d.ansatz.initial_occupation = value;
  else throw config_error("unknown key '" + key + "'");
}

/// Reads flat `key = value` lines on top of `base`. `#` starts a comment.
inline RunConfig parse_run_config(std::istream& in, RunConfig base) {
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string text = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw config_error("line " + std::to_string(line) + ": expected key = value");
    const std::string key = detail::trim(text.substr(0, eq));
    const std::string value = detail::trim(text.substr(eq + 1));
    if (key.empty()) throw config_error("line " + std::to_string(line) + ": empty key");
    try {
      apply_setting(base, key, value);
    } catch (const config_error& e) {
      throw config_error("line " + std::to_string(line) + ": " + e.what());
    }
  }
  return base;
}

inline RunConfig load_run_config(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file " + path);
  return parse_run_config(in, std::move(base));
}

/// Parameter vector from a text file: numbers separated by whitespace or
/// commas, `#` comments.
inline std::vector<double> load_theta_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open theta file " + path);
  std::vector<double> theta;
  std::string raw;
  while (std::getline(in, raw)) {
    const auto hash = raw.find('#');
    std::string text = hash == std::string::npos ? raw : raw.substr(0, hash);
    std::replace(text.begin(), text.end(), ',', ' ');
    std::stringstream ss(text);
    std::string tok;
    while (ss >> tok) theta.push_back(detail::parse_double("theta_file", tok));
  }
  return theta;
}

}  // namespace qcpmd
