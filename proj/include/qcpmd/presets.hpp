#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <mutex>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "qcpmd/dynamics.hpp"
#include "qcpmd/exact.hpp"
#include "qcpmd/hamiltonian_table.hpp"
#include "qcpmd/output.hpp"
#include "qcpmd/random.hpp"
#include "qcpmd/run_config.hpp"
#include "qcpmd/shadow.hpp"

namespace qcpmd {

using Json = nlohmann::ordered_json;

/// Stream tags so that every random draw of a preset has its own stream.
namespace stream_tag {
inline constexpr std::uint64_t vqe_init = 0x5651;
inline constexpr std::uint64_t theta_init = 0x5448;
inline constexpr std::uint64_t trajectory = 0x5452;
inline constexpr std::uint64_t bench = 0x4245;
}  // namespace stream_tag

inline constexpr double reference_bond_length = 0.735;  // Angstrom
inline constexpr double equilibrium_band = 0.05;        // Angstrom

/// Runs job(i) for i in [0, n) on at most `threads` workers (0 or 1 means
/// inline). The first exception thrown by a job is rethrown after all finish.
template <class Job>
void run_jobs(std::size_t n, std::size_t threads, Job&& job) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  for (std::size_t w = 0; w < std::min(threads, n); ++w)
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          job(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  for (auto& t : workers) t.join();
  if (failure) std::rethrow_exception(failure);
}

inline std::vector<double> random_theta(std::size_t n, Rng& rng) {
  std::vector<double> theta(n);
  for (auto& x : theta) x = 2.0 * std::numbers::pi * uniform01(rng);
  return theta;
}

struct VqeOutcome {
  VqeResult result;
  std::size_t attempts = 0;  // initializations tried, including the successful one
};

/// VQE from random starting points until one converges below max_gap.
inline VqeOutcome vqe_with_restarts(const RunConfig& config, const HamiltonianTable& table, double r) {
  const AnsatzConfig& ansatz = config.dynamics.ansatz;
  std::optional<convergence_error> last;
  for (std::size_t a = 0; a < config.vqe_attempts; ++a) {
    Rng rng = split_stream(config.dynamics.seed, {stream_tag::vqe_init, a});
    try {
      return {vqe_optimize(table, r, ansatz, random_theta(ansatz.parameter_count(), rng), config.vqe_tolerance),
              a + 1};
    } catch (const convergence_error& e) {
      last = e;
    }
  }
  throw *last;
}

struct DynamicsRun {
  EstimatorKind kind = EstimatorKind::shadows;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::vector<double> initial_theta;
  Trajectory trajectory;
  std::optional<double> band_entry_time;  // fs
};

struct DynamicsPresetResult {
  std::optional<VqeOutcome> vqe;
  std::vector<std::vector<double>> initial_thetas;  // per trial
  std::vector<DynamicsRun> runs;                     // trial-major, estimator order within a trial
};

/// Trajectory seed for (trial, estimator); independent of which other
/// estimators or trials are requested.
inline std::uint64_t trajectory_seed(std::uint64_t seed, std::size_t trial, EstimatorKind kind) {
  Rng g = split_stream(seed, {stream_tag::trajectory, trial, static_cast<std::uint64_t>(kind)});
  return g();
}

inline std::optional<double> band_entry_time(const Trajectory& t) {
  for (const auto& r : t.records)
    if (std::abs(r.r - reference_bond_length) < equilibrium_band) return r.time;
  return std::nullopt;
}

/// Shared driver of the equilibrium and quench presets: initial parameters
/// by policy, then one trajectory per (trial, estimator), starting at rest.
inline DynamicsPresetResult run_dynamics_preset(const RunConfig& config, const HamiltonianTable& table) {
  config.validate();
  const std::size_t np = config.dynamics.ansatz.parameter_count();
  DynamicsPresetResult out;
  switch (config.theta_policy) {
    case ThetaPolicy::vqe: {
      out.vqe = vqe_with_restarts(config, table, config.initial_r);
      out.initial_thetas.assign(config.trials, out.vqe->result.theta);
      break;
    }
    case ThetaPolicy::random:
      for (std::size_t t = 0; t < config.trials; ++t) {
        Rng rng = split_stream(config.dynamics.seed, {stream_tag::theta_init, t});
        out.initial_thetas.push_back(random_theta(np, rng));
      }
      break;
    case ThetaPolicy::file: {
      auto theta = load_theta_file(config.theta_file);
      if (theta.size() != np)
        throw config_error("theta file holds " + std::to_string(theta.size()) + " values, ansatz needs " +
                           std::to_string(np));
      out.initial_thetas.assign(config.trials, theta);
      break;
    }
  }

  const std::size_t modes = config.estimators.size();
  out.runs.resize(config.trials * modes);
  run_jobs(out.runs.size(), config.threads, [&](std::size_t i) {
    const std::size_t trial = i / modes;
    DynamicsConfig dc = config.dynamics;
    dc.estimator.kind = config.estimators[i % modes];
    dc.seed = trajectory_seed(config.dynamics.seed, trial, dc.estimator.kind);
    MDState init;
    init.r = config.initial_r;
    init.theta = out.initial_thetas[trial];
    init.xi.assign(np, 0.0);
    DynamicsRun run;
    run.kind = dc.estimator.kind;
    run.trial = trial;
    run.seed = dc.seed;
    run.initial_theta = init.theta;
    run.trajectory = run_trajectory(dc, init, table);
    run.band_entry_time = band_entry_time(run.trajectory);
    out.runs[i] = std::move(run);
  });
  return out;
}

struct VarianceTrial {
  std::vector<double> theta;
  double exact = 0.0;
  std::vector<double> direct;  // one estimate per repetition
  std::vector<double> shadow;
  double direct_variance = 0.0;
  double shadow_variance = 0.0;
};

struct VarianceBenchResult {
  PauliWord word;
  std::vector<VarianceTrial> trials;
  double mean_direct_variance = 0.0;
  double mean_shadow_variance = 0.0;
  std::uint64_t direct_preparations = 0;
  std::uint64_t shadow_preparations = 0;
};

inline double sample_variance(const std::vector<double>& xs) {
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(xs.size() - 1);
}

/// Repeated estimation of Z on qubit 0: direct measurement with N_shot shots
/// against median-of-means over N_S snapshots in K groups.
inline VarianceBenchResult run_variance_bench(const RunConfig& config) {
  config.validate();
  const AnsatzConfig& ansatz = config.dynamics.ansatz;
  const EstimatorConfig& est = config.dynamics.estimator;
  VarianceBenchResult out{PauliWord::single(ansatz.num_qubits, 0, PauliLetter::Z), {}, 0, 0, 0, 0};
  out.trials.resize(config.trials);
  run_jobs(config.trials, config.threads, [&](std::size_t t) {
    VarianceTrial& tr = out.trials[t];
    Rng theta_rng = split_stream(config.dynamics.seed, {stream_tag::bench, t, 0});
    tr.theta = random_theta(ansatz.parameter_count(), theta_rng);
    const StateVector psi = prepare_ansatz_state(ansatz, tr.theta);
    tr.exact = pauli_expectation(psi, out.word);
    Rng direct_rng = split_stream(config.dynamics.seed, {stream_tag::bench, t, 1});
    Rng shadow_rng = split_stream(config.dynamics.seed, {stream_tag::bench, t, 2});
    tr.direct.reserve(config.repetitions);
    tr.shadow.reserve(config.repetitions);
    for (std::size_t k = 0; k < config.repetitions; ++k) {
      tr.direct.push_back(direct_pauli_estimate(psi, out.word, est.shots, direct_rng));
      const ShadowBatch batch = collect_snapshots(psi, est.num_snapshots, est.groups, shadow_rng);
      tr.shadow.push_back(estimate_pauli_mom(batch, out.word));
    }
    tr.direct_variance = sample_variance(tr.direct);
    tr.shadow_variance = sample_variance(tr.shadow);
  });
  for (const auto& tr : out.trials) {
    out.mean_direct_variance += tr.direct_variance / static_cast<double>(out.trials.size());
    out.mean_shadow_variance += tr.shadow_variance / static_cast<double>(out.trials.size());
  }
  const auto reps = static_cast<std::uint64_t>(config.trials * config.repetitions);
  out.direct_preparations = reps * est.shots;
  out.shadow_preparations = reps * est.num_snapshots;
  return out;
}

struct CurveResult {
  std::vector<double> r;
  std::vector<double> energy;
  std::size_t argmin_index = 0;
  double argmin_refined = 0.0;  // vertex of the parabola through the three lowest-neighborhood points
};

/// Exact ground energy at every grid point of the table.
inline CurveResult run_curve(const HamiltonianTable& table) {
  CurveResult c;
  c.r = table.grid();
  c.energy.reserve(c.r.size());
  for (double r : c.r) c.energy.push_back(ground_state_exact(hamiltonian_at(table, r)).energy);
  c.argmin_index = static_cast<std::size_t>(std::min_element(c.energy.begin(), c.energy.end()) - c.energy.begin());
  const std::size_t i = c.argmin_index;
  c.argmin_refined = c.r[i];
  if (i > 0 && i + 1 < c.r.size()) {
    const double x0 = c.r[i - 1], x1 = c.r[i], x2 = c.r[i + 1];
    const double y0 = c.energy[i - 1], y1 = c.energy[i], y2 = c.energy[i + 1];
    const double num = (x1 - x0) * (x1 - x0) * (y1 - y2) - (x1 - x2) * (x1 - x2) * (y1 - y0);
    const double den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
    if (den != 0.0) c.argmin_refined = x1 - 0.5 * num / den;
  }
  return c;
}

namespace detail {

inline Json to_json(const DynamicsConfig& d) {
  Json j;
  j["dt_fs"] = d.dt;
  j["mass_me"] = d.mass;
  j["mu"] = d.mu;
  j["temperature_k"] = d.temperature;
  j["num_snapshots"] = d.estimator.num_snapshots;
  j["groups"] = d.estimator.groups;
  j["shots"] = d.estimator.shots;
  j["dissipation"] = d.dissipation == DissipationMode::fixed ? "fixed" : "adaptive";
  j["gamma_per_fs"] = d.gamma;
  j["zeta_per_fs"] = d.zeta;
  j["adaptive_window"] = d.adaptive_window;
  j["parameter_force_point"] = d.parameter_force_point == ParameterForcePoint::updated ? "updated" : "previous";
  j["fd_step_angstrom"] = d.fd_step;
  j["total_time_fs"] = d.total_time;
  j["burn_in_fs"] = d.burn_in;
  j["ansatz_layout"] = to_string(d.ansatz.layout);
  j["ansatz_depth"] = d.ansatz.depth;
  j["ansatz_parameters"] = d.ansatz.parameter_count();
  j["initial_occupation"] = d.ansatz.initial_occupation;
  return j;
}

inline Json optional_number(const std::optional<double>& x) { return x ? Json(*x) : Json(nullptr); }

}  // namespace detail

struct PresetOutcome {
  Json summary;
  bool aborted = false;
};

inline PresetOutcome write_dynamics_outputs(const RunConfig& config, const DynamicsPresetResult& res,
                                            const std::filesystem::path& dir) {
  PresetOutcome o;
  Json& s = o.summary;
  s["preset"] = config.preset;
  s["seed"] = config.dynamics.seed;
  s["initial_r_angstrom"] = config.initial_r;
  s["initial_theta_policy"] = to_string(config.theta_policy);
  s["trials"] = config.trials;
  s["dynamics"] = detail::to_json(config.dynamics);
  if (res.vqe) {
    s["vqe"] = {{"energy_ha", res.vqe->result.energy},
                {"ground_energy_ha", res.vqe->result.ground_energy},
                {"gap_ha", res.vqe->result.energy - res.vqe->result.ground_energy},
                {"iterations", res.vqe->result.iterations},
                {"attempts", res.vqe->attempts},
                {"theta", res.vqe->result.theta}};
  }

  std::uint64_t total_preparations = 0;
  bool any_aborted = false;
  std::vector<SvgSeries> hist, lines;
  Json modes = Json::object();
  Json post = Json::object();
  for (EstimatorKind kind : config.estimators) {
    const std::string name = to_string(kind);
    std::vector<const Trajectory*> trials;
    std::vector<double> pooled;
    Json runs = Json::array();
    double mean_of_means = 0.0;
    std::size_t counted = 0;
    std::uint64_t preparations = 0;
    bool aborted = false;
    for (const auto& run : res.runs) {
      if (run.kind != kind) continue;
      const auto& t = run.trajectory;
      trials.push_back(&t);
      const std::string file = "trajectory_" + name + "_trial" + std::to_string(run.trial) + ".csv";
      std::ostringstream csv;
      write_trajectory_csv(csv, t.records);
      write_file(dir / file, csv.str());
      for (const auto& r : t.records)
        if (r.time + 1e-9 >= config.dynamics.burn_in) pooled.push_back(r.r);
      SvgSeries line{name + " trial " + std::to_string(run.trial), {}, {}};
      for (const auto& r : t.records) {
        line.x.push_back(r.time);
        line.values.push_back(r.r);
      }
      lines.push_back(std::move(line));
      if (t.summary.samples > 0) {
        mean_of_means += t.summary.mean_r;
        ++counted;
      }
      preparations += t.summary.preparations;
      aborted = aborted || t.summary.aborted;
      runs.push_back({{"trial", run.trial},
                      {"file", file},
                      {"seed", run.seed},
                      {"initial_theta", run.initial_theta},
                      {"mean_r_angstrom", t.summary.mean_r},
                      {"std_r_angstrom", t.summary.std_r},
                      {"samples", t.summary.samples},
                      {"steps_completed", t.summary.steps_completed},
                      {"preparations", t.summary.preparations},
                      {"band_entry_time_fs", detail::optional_number(run.band_entry_time)},
                      {"aborted", t.summary.aborted},
                      {"abort_reason", t.summary.abort_reason}});
    }
    if (trials.size() > 1) {
      std::ostringstream csv;
      write_mean_trajectory_csv(csv, trials);
      write_file(dir / ("mean_trajectory_" + name + ".csv"), csv.str());
    }
    double pooled_mean = 0.0, pooled_std = 0.0;
    if (!pooled.empty()) {
      for (double x : pooled) pooled_mean += x;
      pooled_mean /= static_cast<double>(pooled.size());
      if (pooled.size() > 1) pooled_std = std::sqrt(sample_variance(pooled));
    }
    modes[name] = {{"grand_mean_r_angstrom", counted ? mean_of_means / static_cast<double>(counted) : 0.0},
                   {"pooled_mean_r_angstrom", pooled_mean},
                   {"pooled_std_r_angstrom", pooled_std},
                   {"preparations", preparations},
                   {"aborted", aborted},
                   {"runs", runs}};
    post[name] = {{"mean_r_angstrom", pooled_mean}, {"std_r_angstrom", pooled_std}, {"samples", pooled.size()}};
    hist.push_back({name, std::move(pooled), {}});
    total_preparations += preparations;
    any_aborted = any_aborted || aborted;
  }
  s["preparations_total"] = total_preparations;
  s["aborted"] = any_aborted;
  s["post_burn_in"] = post;
  s["estimators"] = modes;
  write_file(dir / "histogram.svg", histogram_svg(hist, config.preset + ": R after burn-in"));
  write_file(dir / "trajectory.svg", trajectory_svg(lines, config.preset + ": R(t)"));
  o.aborted = any_aborted;
  return o;
}

inline PresetOutcome write_variance_outputs(const RunConfig& config, const VarianceBenchResult& res,
                                            const std::filesystem::path& dir) {
  std::ostringstream per_trial, reps;
  per_trial << "trial,exact,direct_mean,direct_variance,shadow_mean,shadow_variance,ratio\n";
  reps << "trial,repetition,direct,shadow\n";
  Json trials = Json::array();
  for (std::size_t t = 0; t < res.trials.size(); ++t) {
    const auto& tr = res.trials[t];
    double dm = 0.0, sm = 0.0;
    for (double x : tr.direct) dm += x / static_cast<double>(tr.direct.size());
    for (double x : tr.shadow) sm += x / static_cast<double>(tr.shadow.size());
    const double ratio = tr.shadow_variance / tr.direct_variance;
    per_trial << t << ',' << format_number(tr.exact) << ',' << format_number(dm) << ','
              << format_number(tr.direct_variance) << ',' << format_number(sm) << ','
              << format_number(tr.shadow_variance) << ',' << format_number(ratio) << '\n';
    for (std::size_t k = 0; k < tr.direct.size(); ++k)
      reps << t << ',' << k << ',' << format_number(tr.direct[k]) << ',' << format_number(tr.shadow[k]) << '\n';
    trials.push_back({{"trial", t},
                      {"theta", tr.theta},
                      {"exact", tr.exact},
                      {"direct_variance", tr.direct_variance},
                      {"shadow_variance", tr.shadow_variance},
                      {"ratio", ratio}});
  }
  write_file(dir / "variance.csv", per_trial.str());
  write_file(dir / "estimates.csv", reps.str());
  PresetOutcome o;
  Json& s = o.summary;
  s["preset"] = config.preset;
  s["seed"] = config.dynamics.seed;
  s["observable"] = res.word.label();
  s["repetitions"] = config.repetitions;
  s["shots"] = config.dynamics.estimator.shots;
  s["num_snapshots"] = config.dynamics.estimator.num_snapshots;
  s["groups"] = config.dynamics.estimator.groups;
  s["ansatz_layout"] = to_string(config.dynamics.ansatz.layout);
  s["ansatz_depth"] = config.dynamics.ansatz.depth;
  s["mean_direct_variance"] = res.mean_direct_variance;
  s["mean_shadow_variance"] = res.mean_shadow_variance;
  s["preparations_total"] = res.direct_preparations + res.shadow_preparations;
  s["preparations"] = {{"direct", res.direct_preparations}, {"shadows", res.shadow_preparations}};
  s["aborted"] = false;
  s["trials"] = trials;
  return o;
}

inline PresetOutcome write_curve_outputs(const RunConfig& config, const CurveResult& c,
                                         const std::filesystem::path& dir) {
  std::ostringstream csv;
  csv << "R_angstrom,E0_ha\n";
  for (std::size_t i = 0; i < c.r.size(); ++i) csv << format_number(c.r[i]) << ',' << format_number(c.energy[i], 15) << '\n';
  write_file(dir / "curve.csv", csv.str());
  PresetOutcome o;
  o.summary["preset"] = config.preset;
  o.summary["seed"] = config.dynamics.seed;
  o.summary["grid_points"] = c.r.size();
  o.summary["argmin_grid_angstrom"] = c.r[c.argmin_index];
  o.summary["argmin_refined_angstrom"] = c.argmin_refined;
  o.summary["min_energy_ha"] = c.energy[c.argmin_index];
  o.summary["preparations_total"] = 0;
  o.summary["aborted"] = false;
  return o;
}

/// Runs a preset end to end and writes its files plus summary.json into
/// config.output_dir.
inline PresetOutcome execute_preset(const RunConfig& config) {
  config.validate();
  const std::filesystem::path dir(config.output_dir);
  std::filesystem::create_directories(dir);
  PresetOutcome o;
  if (config.preset == "variance-bench") {
    o = write_variance_outputs(config, run_variance_bench(config), dir);
  } else {
    const HamiltonianTable table = load_table(config.hamiltonian_table);
    if (config.preset == "curve") {
      o = write_curve_outputs(config, run_curve(table), dir);
    } else if (config.preset == "vqe") {
      const VqeOutcome v = vqe_with_restarts(config, table, config.initial_r);
      std::ostringstream theta;
      for (double x : v.result.theta) theta << format_number(x, 17) << '\n';
      write_file(dir / "theta.txt", theta.str());
      o.summary["preset"] = config.preset;
      o.summary["seed"] = config.dynamics.seed;
      o.summary["r_angstrom"] = config.initial_r;
      o.summary["ansatz_layout"] = to_string(config.dynamics.ansatz.layout);
      o.summary["energy_ha"] = v.result.energy;
      o.summary["ground_energy_ha"] = v.result.ground_energy;
      o.summary["gap_ha"] = v.result.energy - v.result.ground_energy;
      o.summary["iterations"] = v.result.iterations;
      o.summary["attempts"] = v.attempts;
      o.summary["theta"] = v.result.theta;
      o.summary["preparations_total"] = 0;
      o.summary["aborted"] = false;
    } else {
      o = write_dynamics_outputs(config, run_dynamics_preset(config, table), dir);
    }
  }
  if (!o.summary.contains("post_burn_in")) o.summary["post_burn_in"] = nullptr;
  write_file(dir / "summary.json", o.summary.dump(2) + "\n");
  return o;
}

}  // namespace qcpmd
