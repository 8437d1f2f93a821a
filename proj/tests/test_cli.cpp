#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "test_support.hpp"

using namespace qcpmd;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::path(QCPMD_TEST_TMP) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t count_lines(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  std::string line;
  while (std::getline(in, line)) ++n;
  return n;
}

int cli(const std::string& args) {
  const std::string cmd = std::string(QCPMD_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

RunConfig parse(const std::string& text, const std::string& preset = "equilibrium") {
  std::istringstream in(text);
  return parse_run_config(in, preset_defaults(preset));
}

}  // namespace

TEST(RunConfig, EquilibriumDefaultsAreTheReferenceProtocol) {
  const auto c = preset_defaults("equilibrium");
  EXPECT_EQ(c.dynamics.dt, 0.1);
  EXPECT_EQ(c.dynamics.temperature, 70.0);
  EXPECT_EQ(c.dynamics.mu, 0.1);
  EXPECT_EQ(c.dynamics.gamma, 0.8);
  EXPECT_EQ(c.dynamics.zeta, 0.8);
  EXPECT_EQ(c.dynamics.estimator.num_snapshots, 51u);
  EXPECT_EQ(c.dynamics.estimator.groups, 3u);
  EXPECT_EQ(c.dynamics.estimator.shots, 51u);
  EXPECT_EQ(c.dynamics.ansatz.depth, 4u);
  EXPECT_EQ(c.dynamics.total_time, 4000.0);
  EXPECT_EQ(c.dynamics.burn_in, 250.0);
  EXPECT_EQ(c.dynamics.dissipation, DissipationMode::fixed);
  EXPECT_EQ(c.initial_r, 0.735);
  EXPECT_EQ(c.theta_policy, ThetaPolicy::vqe);
  EXPECT_EQ(c.estimators, (std::vector<EstimatorKind>{EstimatorKind::shadows, EstimatorKind::direct}));

  const auto q = preset_defaults("quench");
  EXPECT_EQ(q.trials, 5u);
  EXPECT_EQ(q.initial_r, 1.0);
  EXPECT_EQ(q.dynamics.total_time, 2000.0);
  EXPECT_EQ(q.theta_policy, ThetaPolicy::random);

  EXPECT_EQ(preset_defaults("variance-bench").dynamics.ansatz.layout, AnsatzLayout::real_amplitudes);
  EXPECT_THROW(preset_defaults("nope"), config_error);
}

TEST(RunConfig, ParsesKeyValueFile) {
  const auto c = parse(
      "# comment line\n"
      "\n"
      "seed = 42   # trailing comment\n"
      "total_time=10\n"
      "estimators = direct, exact\n"
      "dissipation = adaptive\n"
      "adaptive_window = 50\n"
      "ansatz_layout = real_amplitudes\n"
      "initial_theta = random\n"
      "trials = 3\n");
  EXPECT_EQ(c.dynamics.seed, 42u);
  EXPECT_EQ(c.dynamics.total_time, 10.0);
  EXPECT_EQ(c.estimators, (std::vector<EstimatorKind>{EstimatorKind::direct, EstimatorKind::exact}));
  EXPECT_EQ(c.dynamics.dissipation, DissipationMode::adaptive);
  EXPECT_EQ(c.dynamics.adaptive_window, 50u);
  EXPECT_EQ(c.dynamics.ansatz.layout, AnsatzLayout::real_amplitudes);
  EXPECT_EQ(c.theta_policy, ThetaPolicy::random);
  EXPECT_EQ(c.trials, 3u);
}

TEST(RunConfig, Errors) {
  EXPECT_THROW(parse("colour = blue\n"), config_error);
  EXPECT_THROW(parse("dt = fast\n"), config_error);
  EXPECT_THROW(parse("seed = -1\n"), config_error);
  EXPECT_THROW(parse("just words\n"), config_error);
  EXPECT_THROW(parse("preset = quench\n"), config_error);
  EXPECT_NO_THROW(parse("preset = equilibrium\n"));
  try {
    parse("seed = 1\n\ndt = x\n");
    FAIL();
  } catch (const config_error& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
  auto c = preset_defaults("quench");
  c.trials = 0;
  EXPECT_THROW(c.validate(), config_error);
  c = preset_defaults("quench");
  c.theta_policy = ThetaPolicy::file;
  EXPECT_THROW(c.validate(), config_error);
}

TEST(Output, HistogramBins) {
  const auto h = make_histogram({0.6, 0.6019, 0.602, 0.735, 1.1999, 1.2, 0.5});
  ASSERT_EQ(h.counts.size(), 300u);
  EXPECT_EQ(h.counts[0], 2u);
  EXPECT_EQ(h.counts[1], 1u);
  EXPECT_EQ(h.counts[67], 1u);
  EXPECT_EQ(h.counts[299], 1u);
  EXPECT_EQ(h.outside, 2u);
  EXPECT_EQ(h.total, 7u);
}

TEST(Output, TrajectoryCsvHeader) {
  std::ostringstream out;
  write_trajectory_csv(out, {{0, 0.0, 0.735, 0.0, 0.0, -1.1, 0}, {1, 0.1, 0.7351, 0.001, 0.2, -1.1, 561}});
  EXPECT_EQ(out.str(),
            "step,time_fs,R_angstrom,v_angstrom_per_fs,force_ha_per_angstrom,energy_ha,preparations\n"
            "0,0,0.735,0,0,-1.1,0\n"
            "1,0.1,0.7351,0.001,0.2,-1.1,561\n");
}

TEST(Presets, CurveWritesOneRowPerGridPoint) {
  auto c = preset_defaults("curve");
  c.output_dir = scratch_dir("curve").string();
  const auto o = execute_preset(c);
  EXPECT_EQ(count_lines(fs::path(c.output_dir) / "curve.csv"), 222u);
  EXPECT_NEAR(o.summary["argmin_grid_angstrom"].get<double>(), 0.735, 0.01);
}

TEST(Presets, QuenchFilesSummaryAndThreadIndependence) {
  auto c = preset_defaults("quench");
  c.dynamics.total_time = 3.0;
  c.dynamics.burn_in = 1.0;
  c.output_dir = scratch_dir("quench_a").string();
  const auto o = execute_preset(c);
  const fs::path a(c.output_dir);
  for (const char* mode : {"shadows", "direct"}) {
    for (int t = 0; t < 5; ++t) {
      const auto f = a / ("trajectory_" + std::string(mode) + "_trial" + std::to_string(t) + ".csv");
      ASSERT_TRUE(fs::exists(f)) << f;
      EXPECT_EQ(count_lines(f), 32u);
    }
    EXPECT_TRUE(fs::exists(a / ("mean_trajectory_" + std::string(mode) + ".csv")));
  }
  EXPECT_TRUE(fs::exists(a / "histogram.svg"));
  EXPECT_TRUE(fs::exists(a / "summary.json"));
  for (const char* key : {"preset", "seed", "preparations_total", "post_burn_in", "aborted"})
    EXPECT_TRUE(o.summary.contains(key)) << key;
  EXPECT_EQ(o.summary["estimators"]["shadows"]["runs"].size(), 5u);

  c.threads = 3;
  c.output_dir = scratch_dir("quench_b").string();
  execute_preset(c);
  for (const auto& entry : fs::directory_iterator(a))
    EXPECT_EQ(slurp(entry.path()), slurp(fs::path(c.output_dir) / entry.path().filename())) << entry.path();
}

TEST(Presets, ThetaFilePolicy) {
  const fs::path dir = scratch_dir("theta_file");
  auto v = preset_defaults("vqe");
  v.output_dir = (dir / "vqe").string();
  execute_preset(v);
  auto c = preset_defaults("equilibrium");
  c.theta_policy = ThetaPolicy::file;
  c.theta_file = (dir / "vqe" / "theta.txt").string();
  c.dynamics.total_time = 1.0;
  c.estimators = {EstimatorKind::exact};
  c.output_dir = (dir / "eq").string();
  const auto o = execute_preset(c);
  EXPECT_FALSE(o.aborted);
  EXPECT_EQ(o.summary["estimators"]["exact"]["runs"][0]["initial_theta"].size(),
            c.dynamics.ansatz.parameter_count());
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch_dir("cli");
  EXPECT_EQ(cli("validate --table " + std::string(QCPMD_DEFAULT_TABLE)), 0);
  EXPECT_EQ(cli("run --preset curve --out " + (dir / "ok").string()), 0);
  EXPECT_EQ(cli("run --preset nonsense --out " + (dir / "x").string()), 1);
  EXPECT_EQ(cli("run"), 1);

  std::ofstream(dir / "bad.cfg") << "dt = -1\n";
  EXPECT_EQ(cli("run --preset curve --config " + (dir / "bad.cfg").string()), 1);

  std::ofstream(dir / "bad.csv") << "R_angstrom,II\n0.5,1\n0.4,1\n";
  EXPECT_EQ(cli("validate --table " + (dir / "bad.csv").string()), 2);
  std::ofstream(dir / "table.cfg") << "hamiltonian_table = " << (dir / "bad.csv").string() << "\n";
  EXPECT_EQ(cli("run --preset curve --config " + (dir / "table.cfg").string() + " --out " + (dir / "y").string()), 2);

  std::ofstream(dir / "edge.cfg") << "initial_r = 0.3005\ninitial_theta = random\ntotal_time = 1\n";
  EXPECT_EQ(cli("run --preset equilibrium --config " + (dir / "edge.cfg").string() + " --out " +
                (dir / "z").string()),
            3);
}
