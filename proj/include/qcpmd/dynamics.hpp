#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "qcpmd/error.hpp"
#include "qcpmd/exact.hpp"
#include "qcpmd/hamiltonian_table.hpp"
#include "qcpmd/random.hpp"
#include "qcpmd/shadow.hpp"
#include "qcpmd/statevector.hpp"
#include "qcpmd/units.hpp"

namespace qcpmd {

enum class EstimatorKind { shadows, direct, exact };

inline std::string to_string(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::shadows: return "shadows";
    case EstimatorKind::direct: return "direct";
    case EstimatorKind::exact: return "exact";
  }
  return "?";
}

struct EstimatorConfig {
  EstimatorKind kind = EstimatorKind::shadows;
  std::size_t num_snapshots = 51;  // N_S
  std::size_t groups = 3;          // K
  std::size_t shots = 51;          // N_shot per Pauli term
};

enum class DissipationMode { fixed, adaptive };

/// Which theta the parameter force in the xi update is evaluated at.
enum class ParameterForcePoint {
  /// F_theta(R', theta'): semi-implicit in theta; stable for any energy
  /// curvature below 2 (2 - zeta dt) mu / dt^2.
  updated,
  /// F_theta(R', theta): fully explicit; diverges once the curvature
  /// exceeds zeta mu / dt (0.8 Ha/rad^2 at the default settings).
  previous,
};

struct DynamicsConfig {
  double dt = 0.1;                          // fs
  double mass = units::h2_reduced_mass;     // electron masses
  double mu = 0.1;                          // Ha fs^2 / rad^2
  double temperature = 70.0;                // K
  EstimatorConfig estimator;
  DissipationMode dissipation = DissipationMode::fixed;
  double gamma = 0.8;                       // 1/fs
  double zeta = 0.8;                        // 1/fs
  std::size_t adaptive_window = 100;        // steps
  ParameterForcePoint parameter_force_point = ParameterForcePoint::updated;
  double fd_step = 1e-3;                    // Angstrom
  double total_time = 4000.0;               // fs
  double burn_in = 250.0;                   // fs
  std::uint64_t seed = 1;
  AnsatzConfig ansatz{.layout = AnsatzLayout::pair_excitations};

  double beta() const { return units::inverse_temperature(temperature); }

  std::size_t num_steps() const { return static_cast<std::size_t>(std::llround(total_time / dt)); }

  void validate() const {
    if (!(dt > 0.0)) throw config_error("dt must be positive");
    if (!(mass > 0.0)) throw config_error("mass must be positive");
    if (!(mu > 0.0)) throw config_error("mu must be positive");
    if (!(temperature > 0.0)) throw config_error("temperature must be positive");
    if (!(gamma >= 0.0 && gamma * dt < 1.0)) throw config_error("gamma * dt must lie in [0, 1)");
    if (!(zeta >= 0.0 && zeta * dt < 1.0)) throw config_error("zeta * dt must lie in [0, 1)");
    if (!(fd_step > 0.0)) throw config_error("fd_step must be positive");
    if (!(total_time >= 0.0) || !(burn_in >= 0.0)) throw config_error("times must be non-negative");
    if (estimator.kind == EstimatorKind::shadows &&
        (estimator.groups == 0 || estimator.num_snapshots < estimator.groups))
      throw config_error("shadow estimator needs N_S >= K >= 1");
    if (estimator.kind == EstimatorKind::direct && estimator.shots == 0)
      throw config_error("direct estimator needs at least one shot");
    if (dissipation == DissipationMode::adaptive && adaptive_window < 2)
      throw config_error("adaptive window must hold at least 2 samples");
  }
};

/// Sliding window of realized force estimates for adaptive dissipation.
struct ForceWindow {
  std::deque<double> nuclear;
  std::deque<std::vector<double>> parameter;
};

/// Dynamical variables at one step. Units: Angstrom, Angstrom/fs, rad, rad/fs.
struct MDState {
  double r = 0.0;
  double v = 0.0;
  std::vector<double> theta;
  std::vector<double> xi;
  std::size_t step = 0;
  std::uint64_t preparations = 0;  // cumulative state preparations
  double last_force = 0.0;         // nuclear force used by the latest step, Ha/Angstrom
  ForceWindow window;
};

struct Estimate {
  double value = 0.0;
  std::uint64_t preparations = 0;
};

/// <obs> on `psi` through the configured estimator.
inline Estimate estimate_expectation(const StateVector& psi, const Observable& obs, const EstimatorConfig& est,
                                     Rng& rng) {
  switch (est.kind) {
    case EstimatorKind::exact: return {expectation_exact(psi, obs), 0};
    case EstimatorKind::shadows: {
      const ShadowBatch batch = collect_snapshots(psi, est.num_snapshots, est.groups, rng);
      return {estimate_observable(batch, obs), est.num_snapshots};
    }
    case EstimatorKind::direct:
      return {direct_observable_estimate(psi, obs, est.shots, rng),
              static_cast<std::uint64_t>(obs.non_identity_count() * est.shots)};
  }
  return {};
}

/// Hellmann-Feynman force on the bond coordinate, Ha/Angstrom. In shadow
/// mode a single batch serves every term of dH/dR.
inline Estimate nuclear_force(const HamiltonianTable& table, double r, std::span<const double> theta,
                              const DynamicsConfig& config, Rng& rng) {
  const Observable dh = force_observable(table, r, config.fd_step);
  const StateVector psi = prepare_ansatz_state(config.ansatz, theta);
  const Estimate e = estimate_expectation(psi, dh, config.estimator, rng);
  return {-e.value, e.preparations};
}

struct ParameterForce {
  std::vector<double> values;  // Ha/rad
  std::uint64_t preparations = 0;
};

/// F_theta = -dL/dtheta by the two-term shift rule, each shifted energy from
/// its own estimate (a fresh shadow batch per shifted state).
inline ParameterForce parameter_force(const HamiltonianTable& table, double r, std::span<const double> theta,
                                      const DynamicsConfig& config, Rng& rng) {
  const Observable h = hamiltonian_at(table, r);
  ParameterForce out;
  out.values.resize(theta.size());
  std::vector<double> shifted(theta.begin(), theta.end());
  constexpr double shift = std::numbers::pi / 2.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    shifted[i] = theta[i] + shift;
    const Estimate plus = estimate_expectation(prepare_ansatz_state(config.ansatz, shifted), h, config.estimator, rng);
    shifted[i] = theta[i] - shift;
    const Estimate minus = estimate_expectation(prepare_ansatz_state(config.ansatz, shifted), h, config.estimator, rng);
    shifted[i] = theta[i];
    out.values[i] = -0.5 * (plus.value - minus.value);
    out.preparations += plus.preparations + minus.preparations;
  }
  return out;
}

struct DissipationCoefficients {
  double gamma;               // 1/fs
  std::vector<double> zeta;   // 1/fs
};

/// gamma = f^2 beta dt / 2m and zeta_i = f_theta,i^2 beta dt / 2mu.
/// f^2 in (Ha/Angstrom)^2, f_theta^2 in (Ha/rad)^2.
inline DissipationCoefficients dissipation_coefficients(double force_variance,
                                                        std::span<const double> param_force_variance,
                                                        const DynamicsConfig& config) {
  const double beta = config.beta();
  const double f2_au = force_variance / (units::bohr_per_angstrom * units::bohr_per_angstrom);
  const double dt_au = config.dt * units::au_time_per_fs;
  const double gamma_au = f2_au * beta * dt_au / (2.0 * config.mass);
  DissipationCoefficients out{gamma_au * units::au_time_per_fs, {}};
  out.zeta.reserve(param_force_variance.size());
  for (double f2 : param_force_variance) out.zeta.push_back(f2 * beta * config.dt / (2.0 * config.mu));
  return out;
}

namespace detail {

inline double sample_variance(const std::deque<double>& xs) {
  if (xs.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(xs.size() - 1);
}

template <class T>
void push_window(std::deque<T>& q, T value, std::size_t cap) {
  q.push_back(std::move(value));
  while (q.size() > cap) q.pop_front();
}

// Damping rate capped so the factor (1 - rate dt) never goes negative.
inline double capped(double rate, double dt) { return std::min(rate, 1.0 / dt); }

}  // namespace detail

/// One integrator step:
///   R' = R + v dt
///   v' = (1 - gamma dt) v + F(R, theta) / m dt
///   theta' = theta + xi dt
///   xi' = (1 - zeta dt) xi + F_theta(R', theta') / mu dt
/// (theta instead of theta' in the last line with ParameterForcePoint::previous).
inline MDState qcpmd_step(const MDState& state, const HamiltonianTable& table, const DynamicsConfig& config,
                          Rng& rng) {
  const double dt = config.dt;
  const Estimate f = nuclear_force(table, state.r, state.theta, config, rng);

  MDState next;
  next.step = state.step + 1;
  next.window = state.window;
  next.r = state.r + state.v * dt;

  double gamma = config.gamma;
  if (config.dissipation == DissipationMode::adaptive) {
    detail::push_window(next.window.nuclear, f.value, config.adaptive_window);
    if (next.window.nuclear.size() >= 2) {
      const double var = detail::sample_variance(next.window.nuclear);
      gamma = detail::capped(dissipation_coefficients(var, {}, config).gamma, dt);
    }
  }
  next.v = (1.0 - gamma * dt) * state.v + units::acceleration(f.value, config.mass) * dt;

  next.theta.resize(state.theta.size());
  for (std::size_t i = 0; i < state.theta.size(); ++i) next.theta[i] = state.theta[i] + state.xi[i] * dt;

  const auto& theta_for_force =
      config.parameter_force_point == ParameterForcePoint::updated ? next.theta : state.theta;
  const ParameterForce fp = parameter_force(table, next.r, theta_for_force, config, rng);
  std::vector<double> zeta(state.theta.size(), config.zeta);
  if (config.dissipation == DissipationMode::adaptive && !fp.values.empty()) {
    detail::push_window(next.window.parameter, fp.values, config.adaptive_window);
    if (next.window.parameter.size() >= 2) {
      std::vector<double> var(fp.values.size());
      for (std::size_t i = 0; i < var.size(); ++i) {
        std::deque<double> column;
        for (const auto& sample : next.window.parameter) column.push_back(sample[i]);
        var[i] = detail::sample_variance(column);
      }
      zeta = dissipation_coefficients(0.0, var, config).zeta;
      for (auto& z : zeta) z = detail::capped(z, dt);
    }
  }
  next.xi.resize(state.xi.size());
  for (std::size_t i = 0; i < state.xi.size(); ++i)
    next.xi[i] = (1.0 - zeta[i] * dt) * state.xi[i] + fp.values[i] / config.mu * dt;

  next.last_force = f.value;
  next.preparations = state.preparations + f.preparations + fp.preparations;
  if (!std::isfinite(next.r) || !std::isfinite(next.v)) throw std::runtime_error("non-finite nuclear state");
  return next;
}

struct TrajectoryRecord {
  std::size_t step;
  double time;          // fs
  double r;             // Angstrom
  double v;             // Angstrom/fs
  double force;         // Ha/Angstrom, estimate that produced this step (0 at t = 0)
  double energy;        // exact <Psi(theta)|H(R)|Psi(theta)>, Ha
  std::uint64_t preparations;
};

struct TrajectorySummary {
  double mean_r = 0.0;
  double std_r = 0.0;
  std::size_t samples = 0;  // records after burn-in
  std::uint64_t preparations = 0;
  bool aborted = false;
  std::string abort_reason;
  std::size_t steps_completed = 0;
};

struct Trajectory {
  std::vector<TrajectoryRecord> records;
  TrajectorySummary summary;
  MDState final_state;
};

inline double ansatz_energy(const HamiltonianTable& table, double r, std::span<const double> theta,
                            const AnsatzConfig& ansatz) {
  return expectation_exact(prepare_ansatz_state(ansatz, theta), hamiltonian_at(table, r));
}

/// Post-burn-in mean and sample standard deviation of R.
inline void summarize(Trajectory& t, double burn_in) {
  double sum = 0.0, sum2 = 0.0;
  std::size_t n = 0;
  for (const auto& rec : t.records) {
    if (rec.time + 1e-9 < burn_in) continue;
    sum += rec.r;
    ++n;
  }
  t.summary.samples = n;
  if (n == 0) return;
  t.summary.mean_r = sum / static_cast<double>(n);
  for (const auto& rec : t.records)
    if (rec.time + 1e-9 >= burn_in) sum2 += (rec.r - t.summary.mean_r) * (rec.r - t.summary.mean_r);
  t.summary.std_r = n > 1 ? std::sqrt(sum2 / static_cast<double>(n - 1)) : 0.0;
}

/// Iterates qcpmd_step for total_time / dt steps. Step k draws from the
/// stream split_stream(config.seed, {k}). A range error ends the run early
/// with the records so far and `summary.aborted` set.
inline Trajectory run_trajectory(const DynamicsConfig& config, const MDState& initial, const HamiltonianTable& table) {
  config.validate();
  if (initial.theta.size() != config.ansatz.parameter_count() || initial.xi.size() != initial.theta.size())
    throw dimension_error("initial theta/xi do not match the ansatz parameter count");
  const std::size_t steps = config.num_steps();
  Trajectory t;
  t.records.reserve(steps + 1);
  MDState state = initial;
  auto record = [&](const MDState& s) {
    t.records.push_back({s.step, static_cast<double>(s.step) * config.dt, s.r, s.v, s.last_force,
                         ansatz_energy(table, s.r, s.theta, config.ansatz), s.preparations});
  };
  try {
    table.check_range(state.r);
    record(state);
    for (std::size_t k = 1; k <= steps; ++k) {
      Rng rng = split_stream(config.seed, {k});
      state = qcpmd_step(state, table, config, rng);
      table.check_range(state.r);
      record(state);
    }
  } catch (const range_error& e) {
    t.summary.aborted = true;
    t.summary.abort_reason = e.what();
  } catch (const std::runtime_error& e) {
    t.summary.aborted = true;
    t.summary.abort_reason = e.what();
  }
  t.summary.steps_completed = t.records.empty() ? 0 : t.records.back().step;
  t.summary.preparations = t.records.empty() ? 0 : t.records.back().preparations;
  t.final_state = std::move(state);
  summarize(t, config.burn_in);
  return t;
}

struct VqeResult {
  std::vector<double> theta;
  double energy;
  double ground_energy;
  std::size_t iterations;
  double gradient_norm;  // infinity norm at theta
};

/// Exact-energy gradient by the shift rule.
inline std::vector<double> energy_gradient(const Observable& h, const AnsatzConfig& ansatz,
                                           std::span<const double> theta) {
  std::vector<double> g(theta.size());
  std::vector<double> shifted(theta.begin(), theta.end());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    shifted[i] = theta[i] + std::numbers::pi / 2.0;
    const double plus = expectation_exact(prepare_ansatz_state(ansatz, shifted), h);
    shifted[i] = theta[i] - std::numbers::pi / 2.0;
    const double minus = expectation_exact(prepare_ansatz_state(ansatz, shifted), h);
    shifted[i] = theta[i];
    g[i] = 0.5 * (plus - minus);
  }
  return g;
}

/// BFGS on the exact energy with shift-rule gradients and a backtracking
/// (Armijo) line search. Stops when |grad|_inf < tol. Throws
/// convergence_error if the iteration cap is hit or the result sits more
/// than `max_gap` above the exact ground energy.
inline VqeResult vqe_optimize(const HamiltonianTable& table, double r, const AnsatzConfig& ansatz,
                              std::vector<double> theta, double tol, std::size_t max_iterations = 10000,
                              double max_gap = 1e-4) {
  const Observable h = hamiltonian_at(table, r);
  const double e0 = ground_state_exact(h).energy;
  const std::size_t np = ansatz.parameter_count();
  if (theta.size() != np) throw dimension_error("theta_init does not match the ansatz parameter count");
  auto energy = [&](std::span<const double> th) { return expectation_exact(prepare_ansatz_state(ansatz, th), h); };
  auto inf_norm = [](const std::vector<double>& g) {
    double m = 0.0;
    for (double x : g) m = std::max(m, std::abs(x));
    return m;
  };

  double e = energy(theta);
  std::vector<double> g = energy_gradient(h, ansatz, theta);
  Eigen::MatrixXd inv_hess = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(np), static_cast<Eigen::Index>(np));
  std::size_t it = 0;
  for (; it < max_iterations && inf_norm(g) >= tol; ++it) {
    const Eigen::Map<const Eigen::VectorXd> gv(g.data(), static_cast<Eigen::Index>(np));
    Eigen::VectorXd dir = -inv_hess * gv;
    double slope = gv.dot(dir);
    if (!(slope < 0.0)) {
      inv_hess.setIdentity();
      dir = -gv;
      slope = gv.dot(dir);
    }
    double step = 1.0;
    std::vector<double> trial(np);
    double e_trial = e;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t i = 0; i < np; ++i) trial[i] = theta[i] + step * dir(static_cast<Eigen::Index>(i));
      e_trial = energy(trial);
      if (e_trial <= e + 1e-4 * step * slope) break;
      step *= 0.5;
    }
    if (!(e_trial <= e + 1e-4 * step * slope)) {
      // No progress along this direction; restart from steepest descent.
      if (inv_hess.isIdentity()) break;
      inv_hess.setIdentity();
      continue;
    }
    std::vector<double> g_new = energy_gradient(h, ansatz, trial);
    Eigen::VectorXd s(static_cast<Eigen::Index>(np)), y(static_cast<Eigen::Index>(np));
    for (std::size_t i = 0; i < np; ++i) {
      s(static_cast<Eigen::Index>(i)) = trial[i] - theta[i];
      y(static_cast<Eigen::Index>(i)) = g_new[i] - g[i];
    }
    const double sy = s.dot(y);
    if (sy > 1e-14) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd ident = Eigen::MatrixXd::Identity(inv_hess.rows(), inv_hess.cols());
      inv_hess = (ident - rho * s * y.transpose()) * inv_hess * (ident - rho * y * s.transpose()) +
                 rho * s * s.transpose();
    }
    theta = std::move(trial);
    e = e_trial;
    g = std::move(g_new);
  }
  const double gnorm = inf_norm(g);
  if (gnorm >= tol)
    throw convergence_error("VQE stopped with gradient norm " + std::to_string(gnorm), theta, e - e0);
  if (e - e0 >= max_gap)
    throw convergence_error("VQE converged to a point " + std::to_string(e - e0) + " Ha above the ground state",
                            theta, e - e0);
  return {std::move(theta), e, e0, it, gnorm};
}

/// Closed-form state-preparation counts per integrator step.
struct SampleBudget {
  std::uint64_t nuclear_force = 0;
  std::uint64_t parameter_force = 0;
  std::uint64_t per_step() const { return nuclear_force + parameter_force; }
};

/// Shadows: N_S for all nuclear forces at once, 2 n_params N_S for parameter
/// forces. Direct: n_coordinates T N_shot and 2 n_params T N_shot, with T the
/// number of non-identity Hamiltonian terms. Exact mode consumes none.
inline SampleBudget sample_budget(const EstimatorConfig& est, std::size_t n_coordinates, std::size_t n_params,
                                  std::size_t n_hamiltonian_terms) {
  switch (est.kind) {
    case EstimatorKind::shadows: return {est.num_snapshots, 2ULL * n_params * est.num_snapshots};
    case EstimatorKind::direct:
      return {static_cast<std::uint64_t>(n_coordinates) * n_hamiltonian_terms * est.shots,
              2ULL * n_params * n_hamiltonian_terms * est.shots};
    case EstimatorKind::exact: return {0, 0};
  }
  return {};
}

}  // namespace qcpmd
