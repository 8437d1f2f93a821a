#include <gtest/gtest.h>

#include <numbers>

#include "test_support.hpp"

using namespace qcpmd;
using qcpmd::testing::fixture;
using qcpmd::testing::flat_table;
using qcpmd::testing::kinetic_energy;

namespace {

std::vector<double> random_params(std::size_t n, Rng& rng) {
  std::vector<double> p(n);
  for (auto& x : p) x = 2.0 * std::numbers::pi * uniform01(rng);
  return p;
}

DynamicsConfig exact_config() {
  DynamicsConfig c;
  c.estimator.kind = EstimatorKind::exact;
  return c;
}

MDState at_rest(double r, std::vector<double> theta) {
  MDState s;
  s.r = r;
  s.xi.assign(theta.size(), 0.0);
  s.theta = std::move(theta);
  return s;
}

const VqeResult& optimum_0735() {
  static const VqeResult v = [] {
    DynamicsConfig c;
    return vqe_optimize(fixture(), 0.735, c.ansatz, std::vector<double>(c.ansatz.parameter_count(), 0.1), 1e-7);
  }();
  return v;
}

double curve_minimum() {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  auto e0 = [](double r) { return ground_state_exact(hamiltonian_at(fixture(), r)).energy; };
  double a = 0.7, b = 0.77;
  while (b - a > 1e-7) {
    const double c = b - g * (b - a), d = a + g * (b - a);
    if (e0(c) < e0(d)) b = d;
    else a = c;
  }
  return 0.5 * (a + b);
}

struct Drift {
  double max_abs;  // Ha
  bool aborted;
};

/// Max |E(t) - E(0)| of <H(R)> + kinetic energy over an undamped exact-mode
/// run with theta frozen at the ground state of the curve minimum.
Drift conservative_drift(double dt, std::size_t steps, double displacement) {
  DynamicsConfig c = exact_config();
  c.dt = dt;
  c.gamma = 0.0;
  c.zeta = 0.0;
  c.mu = 1e300;  // parameters do not move
  c.total_time = dt * static_cast<double>(steps);
  const double rmin = curve_minimum();
  const auto v = vqe_optimize(fixture(), rmin, c.ansatz, optimum_0735().theta, 1e-7);
  const auto t = run_trajectory(c, at_rest(rmin + displacement, v.theta), fixture());
  const double e_start = t.records.front().energy + kinetic_energy(t.records.front().v, c.mass);
  double drift = 0.0;
  for (const auto& r : t.records) drift = std::max(drift, std::abs(r.energy + kinetic_energy(r.v, c.mass) - e_start));
  return {drift, t.summary.aborted};
}

}  // namespace

TEST(Units, Conversions) {
  EXPECT_NEAR(units::inverse_temperature(70.0), 4.5111e3, 0.1);
  EXPECT_NEAR(units::h2_reduced_mass, 1.00784 * 1822.888486 / 2.0, 1e-9);
  // 1 Ha/Angstrom on the reduced H2 mass, checked in SI.
  const double force_n = 4.3597447222071e-18 / 1e-10;
  const double mass_kg = 1.00784 / 2.0 * 1.66053906660e-27;
  const double accel_angstrom_per_fs2 = force_n / mass_kg * 1e10 * 1e-30;
  EXPECT_NEAR(units::acceleration(1.0, units::h2_reduced_mass), accel_angstrom_per_fs2, 1e-6 * accel_angstrom_per_fs2);
}

TEST(Dissipation, Examples) {
  DynamicsConfig c;
  const auto zero = dissipation_coefficients(0.0, std::vector<double>{0.0, 0.0}, c);
  EXPECT_EQ(zero.gamma, 0.0);
  EXPECT_EQ(zero.zeta, (std::vector<double>{0.0, 0.0}));

  const double g70 = dissipation_coefficients(1.0, {}, c).gamma;
  c.temperature = 35.0;  // doubles beta
  EXPECT_NEAR(dissipation_coefficients(1.0, {}, c).gamma, 2.0 * g70, 1e-12 * g70);
}

TEST(Dissipation, RegressionAgainstSiOracle) {
  DynamicsConfig c;  // 70 K, 0.1 fs, reduced H2 mass
  const double gamma = dissipation_coefficients(1.0, {}, c).gamma;
  // f^2 beta dt / 2m in SI: f = 1 Ha/Angstrom, beta = 1/(k_B 70 K), dt = 0.1 fs.
  const double f = 4.3597447222071e-18 / 1e-10;
  const double beta = 1.0 / (1.380649e-23 * 70.0);
  const double m = 1.00784 / 2.0 * 1.66053906660e-27;
  const double si_per_fs = f * f * beta * 1e-16 / (2.0 * m) * 1e-15;
  EXPECT_NEAR(gamma, si_per_fs, 1e-6 * si_per_fs);
  EXPECT_NEAR(gamma, 117.5168654, 1e-6);  // frozen
  const auto z = dissipation_coefficients(0.0, std::vector<double>{1.0}, c).zeta;
  EXPECT_NEAR(z[0], units::inverse_temperature(70.0) * 0.1 / (2.0 * 0.1), 1e-9);
}

TEST(QcpmdStep, Arithmetic) {
  const auto table = flat_table();
  DynamicsConfig c = exact_config();
  const std::vector<double> theta(c.ansatz.parameter_count(), 0.0);
  Rng rng(1);

  auto s = qcpmd_step(at_rest(1.0, theta), table, c, rng);
  EXPECT_EQ(s.r, 1.0);
  EXPECT_EQ(s.v, 0.0);
  EXPECT_EQ(s.last_force, 0.0);
  EXPECT_EQ(s.step, 1u);

  MDState moving = at_rest(1.0, theta);
  moving.v = 0.01;
  s = qcpmd_step(moving, table, c, rng);
  EXPECT_DOUBLE_EQ(s.r, 1.0 + 0.001);
  EXPECT_NEAR(s.v, 0.92 * 0.01, 1e-17);
  EXPECT_DOUBLE_EQ(s.v / 0.01, 0.92);
}

TEST(QcpmdStep, DampingIsPassive) {
  const auto table = flat_table();
  DynamicsConfig c = exact_config();
  MDState s = at_rest(1.0, std::vector<double>(c.ansatz.parameter_count(), 0.0));
  s.v = -0.02;
  Rng rng(2);
  for (int k = 0; k < 200; ++k) {
    const auto next = qcpmd_step(s, table, c, rng);
    ASSERT_LT(std::abs(next.v), std::abs(s.v));
    ASSERT_GT(next.v * s.v, 0.0);
    s = next;
  }
}

TEST(QcpmdStep, AdaptiveDissipationUsesWindowVariance) {
  const auto table = flat_table();
  DynamicsConfig c = exact_config();
  c.dissipation = DissipationMode::adaptive;
  c.adaptive_window = 5;
  MDState s = at_rest(1.0, std::vector<double>(c.ansatz.parameter_count(), 0.0));
  s.v = 0.01;
  Rng rng(3);
  s = qcpmd_step(s, table, c, rng);  // one sample: fixed gamma
  EXPECT_NEAR(s.v, 0.92 * 0.01, 1e-17);
  for (int k = 0; k < 10; ++k) {
    const double before = s.v;
    s = qcpmd_step(s, table, c, rng);  // zero force variance: no damping
    EXPECT_NEAR(s.v, before, 1e-12);  // spline roundoff force only
    EXPECT_LE(s.window.nuclear.size(), 5u);
  }
}

TEST(QcpmdProperties, ConservativeLimitEnergyDrift) {
  // Undamped exact-mode run from a thermal-scale displacement (0.01 Angstrom,
  // potential energy ~ k_B * 70 K), 1000 steps at 0.1 fs.
  const auto d = conservative_drift(0.1, 1000, 0.01);
  EXPECT_FALSE(d.aborted);
  EXPECT_LT(d.max_abs, 1e-4);
}

TEST(QcpmdProperties, EnergyDriftShrinksWithStep) {
  // Same 100 fs of simulated time at three step sizes.
  const auto d1 = conservative_drift(0.1, 1000, 0.01);
  const auto d2 = conservative_drift(0.05, 2000, 0.01);
  const auto d3 = conservative_drift(0.025, 4000, 0.01);
  EXPECT_FALSE(d2.aborted);
  EXPECT_FALSE(d3.aborted);
  EXPECT_LT(d2.max_abs, d1.max_abs);
  EXPECT_LT(d3.max_abs, d2.max_abs);
}

TEST(NuclearForce, ExactAtOptimumIsSmall) {
  DynamicsConfig c = exact_config();
  Rng rng(4);
  const auto f = nuclear_force(fixture(), 0.735, optimum_0735().theta, c, rng);
  EXPECT_LT(std::abs(f.value), 5e-3);
  EXPECT_EQ(f.preparations, 0u);
}

TEST(NuclearForce, ShadowEstimateIsUnbiased) {
  DynamicsConfig c;
  Rng rng(5);
  const auto& theta = optimum_0735().theta;
  DynamicsConfig ce = exact_config();
  const double exact = nuclear_force(fixture(), 0.735, theta, ce, rng).value;
  for (auto kind : {EstimatorKind::shadows, EstimatorKind::direct}) {
    c.estimator.kind = kind;
    double sum = 0.0, sum2 = 0.0;
    const int n = 500;
    for (int i = 0; i < n; ++i) {
      const auto f = nuclear_force(fixture(), 0.735, theta, c, rng);
      sum += f.value;
      sum2 += f.value * f.value;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sum2 / n - mean * mean) / n);
    EXPECT_LT(std::abs(mean - exact), 5.0 * se) << to_string(kind);
  }
}

TEST(NuclearForce, PreparationCounts) {
  DynamicsConfig c;
  Rng rng(6);
  const auto& theta = optimum_0735().theta;
  EXPECT_EQ(nuclear_force(fixture(), 0.735, theta, c, rng).preparations, 51u);
  c.estimator.kind = EstimatorKind::direct;
  const auto direct = nuclear_force(fixture(), 0.735, theta, c, rng).preparations;
  EXPECT_LE(direct, 15u * 51u);
  EXPECT_EQ(direct, 14u * 51u);
}

TEST(ParameterForce, ExactAtOptimumVanishes) {
  DynamicsConfig c = exact_config();
  Rng rng(7);
  const auto fp = parameter_force(fixture(), 0.735, optimum_0735().theta, c, rng);
  for (double x : fp.values) EXPECT_LT(std::abs(x), 1e-3);
}

TEST(ParameterForce, ZeroParameterAnsatz) {
  DynamicsConfig c;
  c.ansatz.initial_occupation = "0000";
  ASSERT_EQ(c.ansatz.parameter_count(), 0u);
  Rng rng(8);
  const auto fp = parameter_force(fixture(), 0.735, std::vector<double>{}, c, rng);
  EXPECT_TRUE(fp.values.empty());
  EXPECT_EQ(fp.preparations, 0u);
}

TEST(ParameterForce, ShiftRuleMatchesFiniteDifference) {
  Rng rng(9);
  const auto h = hamiltonian_at(fixture(), 0.9);
  for (auto layout : {AnsatzLayout::real_amplitudes, AnsatzLayout::pair_excitations}) {
    DynamicsConfig c = exact_config();
    c.ansatz.layout = layout;
    for (int trial = 0; trial < 20; ++trial) {
      auto theta = random_params(c.ansatz.parameter_count(), rng);
      const auto fp = parameter_force(fixture(), 0.9, theta, c, rng);
      for (std::size_t i = 0; i < theta.size(); ++i) {
        const double t0 = theta[i];
        theta[i] = t0 + 1e-4;
        const double ep = expectation_exact(prepare_ansatz_state(c.ansatz, theta), h);
        theta[i] = t0 - 1e-4;
        const double em = expectation_exact(prepare_ansatz_state(c.ansatz, theta), h);
        theta[i] = t0;
        EXPECT_NEAR(fp.values[i], -(ep - em) / 2e-4, 1e-6);
      }
    }
  }
}

TEST(SampleBudget, ClosedForms) {
  EstimatorConfig shadows;
  for (std::size_t n : {1, 3, 30}) EXPECT_EQ(sample_budget(shadows, n, 5, 14).nuclear_force, 51u);
  EstimatorConfig direct{EstimatorKind::direct, 51, 3, 51};
  EXPECT_EQ(sample_budget(direct, 3, 5, 15).nuclear_force, 2295u);
  EXPECT_EQ(sample_budget(direct, 1, 0, 15).parameter_force, 0u);
  EXPECT_EQ(sample_budget(shadows, 1, 0, 15).parameter_force, 0u);
  EXPECT_EQ(sample_budget(shadows, 1, 5, 15).parameter_force, 2u * 5u * 51u);
  EXPECT_EQ(sample_budget(direct, 1, 5, 14).parameter_force, 2u * 5u * 14u * 51u);
  EXPECT_EQ(sample_budget(EstimatorConfig{EstimatorKind::exact, 51, 3, 51}, 3, 5, 15).per_step(), 0u);
}

TEST(RunTrajectory, CountersMatchClosedForms) {
  for (auto kind : {EstimatorKind::shadows, EstimatorKind::direct}) {
    DynamicsConfig c;
    c.estimator.kind = kind;
    c.total_time = 2.0;
    const auto t = run_trajectory(c, at_rest(0.735, optimum_0735().theta), fixture());
    ASSERT_FALSE(t.summary.aborted);
    const auto b = sample_budget(c.estimator, 1, c.ansatz.parameter_count(), fixture().non_identity_words());
    for (const auto& r : t.records) EXPECT_EQ(r.preparations, b.per_step() * r.step);
    EXPECT_EQ(t.summary.preparations, b.per_step() * c.num_steps());
  }
}

TEST(RunTrajectory, StepCountAndBurnIn) {
  DynamicsConfig c;
  EXPECT_EQ(c.num_steps(), 40000u);
  c.estimator.kind = EstimatorKind::exact;
  c.total_time = 1.0;
  c.burn_in = 0.5;
  const auto t = run_trajectory(c, at_rest(0.74, optimum_0735().theta), fixture());
  ASSERT_EQ(t.records.size(), 11u);
  EXPECT_EQ(t.summary.samples, 6u);
  for (std::size_t i = 0; i < t.records.size(); ++i) EXPECT_NEAR(t.records[i].time, 0.1 * i, 1e-12);
}

TEST(RunTrajectory, SameSeedBitIdentical) {
  DynamicsConfig c;
  c.total_time = 5.0;
  c.seed = 1234;
  const auto init = at_rest(0.8, optimum_0735().theta);
  const auto a = run_trajectory(c, init, fixture());
  const auto b = run_trajectory(c, init, fixture());
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].r, b.records[i].r);
    EXPECT_EQ(a.records[i].v, b.records[i].v);
    EXPECT_EQ(a.records[i].force, b.records[i].force);
    EXPECT_EQ(a.records[i].energy, b.records[i].energy);
  }
  c.seed = 1235;
  EXPECT_NE(run_trajectory(c, init, fixture()).records.back().r, a.records.back().r);
}

TEST(RunTrajectory, OutOfRangeAbortsWithPartialRecords) {
  DynamicsConfig c = exact_config();
  c.total_time = 1.0;
  const auto t = run_trajectory(c, at_rest(0.3005, optimum_0735().theta), fixture());
  EXPECT_TRUE(t.summary.aborted);
  EXPECT_FALSE(t.summary.abort_reason.empty());
  EXPECT_EQ(t.records.size(), 1u);
}

TEST(DynamicsConfig, Validation) {
  DynamicsConfig c;
  EXPECT_NO_THROW(c.validate());
  auto bad = [](auto mutate) {
    DynamicsConfig d;
    mutate(d);
    EXPECT_THROW(d.validate(), config_error);
  };
  bad([](DynamicsConfig& d) { d.dt = 0.0; });
  bad([](DynamicsConfig& d) { d.mu = -1.0; });
  bad([](DynamicsConfig& d) { d.gamma = 10.0; });
  bad([](DynamicsConfig& d) { d.zeta = 10.0; });
  bad([](DynamicsConfig& d) { d.estimator.groups = 60; });
  bad([](DynamicsConfig& d) {
    d.estimator.kind = EstimatorKind::direct;
    d.estimator.shots = 0;
  });
}

TEST(Vqe, ConvergesFromRandomStarts) {
  Rng rng(10);
  for (auto layout : {AnsatzLayout::real_amplitudes, AnsatzLayout::pair_excitations}) {
    AnsatzConfig a;
    a.layout = layout;
    for (int i = 0; i < 3; ++i) {
      const auto v = vqe_optimize(fixture(), 0.735, a, random_params(a.parameter_count(), rng), 1e-5);
      EXPECT_LT(v.energy - v.ground_energy, 1e-4);
      EXPECT_LT(v.gradient_norm, 1e-5);
      const auto g = energy_gradient(hamiltonian_at(fixture(), 0.735), a, v.theta);
      for (double x : g) EXPECT_LT(std::abs(x), 1e-5);
    }
  }
}

TEST(Vqe, OptimalStartReturnsInput) {
  const auto& opt = optimum_0735();
  DynamicsConfig c;
  const auto v = vqe_optimize(fixture(), 0.735, c.ansatz, opt.theta, 1e-5);
  EXPECT_EQ(v.iterations, 0u);
  EXPECT_EQ(v.theta, opt.theta);
}

TEST(Vqe, IterationCapRaisesWithBestTheta) {
  AnsatzConfig a;
  Rng rng(11);
  const auto start = random_params(a.parameter_count(), rng);
  try {
    vqe_optimize(fixture(), 0.735, a, start, 1e-5, 1);
    FAIL() << "expected convergence_error";
  } catch (const convergence_error& e) {
    EXPECT_EQ(e.best_theta().size(), a.parameter_count());
    EXPECT_GT(e.energy_gap(), 0.0);
  }
}

TEST(ParameterForcePoint, ExplicitOrderingDivergesWhereUpdatedTracks) {
  // Exact forces, no noise: with F_theta taken at the old theta the parameter
  // recursion is unstable once the energy curvature exceeds zeta mu / dt.
  DynamicsConfig c = exact_config();
  c.total_time = 200.0;
  const auto init = at_rest(0.735, optimum_0735().theta);
  auto worst_gap = [&](const Trajectory& t) {
    double gap = 0.0;
    for (const auto& r : t.records)
      gap = std::max(gap, r.energy - ground_state_exact(hamiltonian_at(fixture(), r.r)).energy);
    return gap;
  };
  const auto tracked = run_trajectory(c, init, fixture());
  ASSERT_FALSE(tracked.summary.aborted);
  EXPECT_LT(worst_gap(tracked), 1e-3);

  c.parameter_force_point = ParameterForcePoint::previous;
  const auto explicit_run = run_trajectory(c, init, fixture());
  EXPECT_GT(worst_gap(explicit_run), 0.1);
}
