#include "cbandits/harness.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace cbandits;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig small_game_config() {
  ExperimentConfig cfg;
  cfg.env = "game";
  cfg.horizon = 150;
  cfg.runs = 3;
  cfg.seed = 99;
  cfg.policies = {parse_policy_spec("ucb"), parse_policy_spec("is_ucb:oracle_sepsets")};
  return cfg;
}

}  // namespace

TEST(Config, ParsesFlatKeyValueText) {
  ExperimentConfig cfg = parse_config_text(
      "# comment\n"
      "env = dag6\n"
      "horizon = 2000\n"
      "runs = 7\n"
      "seed = 123\n"
      "out = /tmp/xyz\n"
      "round_logs = true\n"
      "max_sepset_size = 2\n"
      "policy.0 = ucb\n"
      "policy.1 = is_ts:oracle_parents\n"
      "policy.2.kind = is_ucb\n"
      "policy.2.discovery = direct_test\n");
  EXPECT_EQ(cfg.env, "dag6");
  EXPECT_EQ(cfg.horizon, 2000);
  EXPECT_EQ(cfg.runs, 7);
  EXPECT_EQ(cfg.seed, 123u);
  EXPECT_TRUE(cfg.round_logs);
  EXPECT_EQ(cfg.max_sepset_size, 2);
  ASSERT_EQ(cfg.policies.size(), 3u);
  EXPECT_EQ(policy_name(cfg.policies[0]), "ucb");
  EXPECT_EQ(policy_name(cfg.policies[1]), "is_ts:oracle_parents");
  EXPECT_EQ(policy_name(cfg.policies[2]), "is_ucb:direct_test");
}

TEST(Config, Errors) {
  EXPECT_THROW(parse_config_text("nonsense = 1\n"), ConfigError);
  EXPECT_THROW(parse_config_text("horizon = abc\n"), ConfigError);
  EXPECT_THROW(parse_config_text("policy.0 = warp_drive\n"), ConfigError);
  EXPECT_THROW(parse_policy_spec("is_ucb:none"), ConfigError);
  ExperimentConfig cfg = small_game_config();
  cfg.runs = 0;
  EXPECT_THROW(run_experiment(cfg), ConfigError);
  cfg = small_game_config();
  cfg.horizon = 50;  // shorter than the 90-round initial phase
  EXPECT_THROW(run_experiment(cfg), ConfigError);
  cfg = small_game_config();
  cfg.env = "marslander";
  EXPECT_THROW(run_experiment(cfg), ConfigError);
}

TEST(Aggregate, TwoPointFormulaAndIdenticalRuns) {
  AggregateTrace agg = aggregate({{0.0, 0.0}, {2.0, 2.0}});
  ASSERT_EQ(agg.mean.size(), 2u);
  EXPECT_DOUBLE_EQ(agg.mean[0], 1.0);
  EXPECT_DOUBLE_EQ(agg.stderr_[0], 1.0);  // std = sqrt(2), /sqrt(2) = 1

  agg = aggregate({{3.0}, {3.0}, {3.0}});
  EXPECT_DOUBLE_EQ(agg.mean[0], 3.0);
  EXPECT_DOUBLE_EQ(agg.stderr_[0], 0.0);

  agg = aggregate({{1.0, 2.0}});
  EXPECT_TRUE(agg.stderr_.empty());  // absent below 2 runs
}

TEST(RunExperiment, RegretIsNondecreasingAndBounded) {
  ExperimentConfig cfg = small_game_config();
  ExperimentResult res = run_experiment(cfg);
  BanditEnv env = make_game_env();
  double max_gap = env.best_mean() - *std::min_element(env.true_means.begin(), env.true_means.end());
  for (const auto& per_run : res.cum_regret)
    for (const auto& tr : per_run) {
      ASSERT_EQ(tr.size(), 150u);
      for (std::size_t t = 1; t < tr.size(); ++t) ASSERT_GE(tr[t], tr[t - 1] - 1e-12);
      for (std::size_t t = 0; t < tr.size(); ++t)
        ASSERT_LE(tr[t], (t + 1) * max_gap + 1e-9);
    }
}

TEST(RunExperiment, IdenticalThroughForcedPhase) {
  ExperimentConfig cfg = small_game_config();
  cfg.horizon = 90;
  ExperimentResult res = run_experiment(cfg);
  // all policies identical through the deterministic phase, and the
  // cumulative regret equals the forced allocation's expected regret
  BanditEnv env = make_game_env();
  double forced = 0;
  for (double m : env.true_means) forced += 10.0 * (env.best_mean() - m);
  for (std::size_t p = 0; p < res.policy_names.size(); ++p)
    for (const auto& tr : res.cum_regret[p]) EXPECT_NEAR(tr.back(), forced, 1e-9);
  EXPECT_EQ(res.arms[0], res.arms[1]);
}

TEST(RunExperiment, SerialAndParallelIdentical) {
  ExperimentConfig cfg = small_game_config();
  cfg.threads = 1;
  ExperimentResult serial = run_experiment(cfg);
  cfg.threads = 4;
  ExperimentResult parallel = run_experiment(cfg);
  EXPECT_EQ(serial.arms, parallel.arms);
  EXPECT_EQ(serial.cum_regret, parallel.cum_regret);
}

TEST(RunExperiment, ByteIdenticalOutputs) {
  fs::path dir1 = fs::temp_directory_path() / "cb_out_a";
  fs::path dir2 = fs::temp_directory_path() / "cb_out_b";
  fs::remove_all(dir1);
  fs::remove_all(dir2);
  ExperimentConfig cfg = small_game_config();
  cfg.round_logs = true;
  cfg.out_dir = dir1.string();
  run_experiment(cfg);
  cfg.out_dir = dir2.string();
  run_experiment(cfg);
  for (const char* f : {"regret.csv", "agg.csv", "discovery.csv", "rounds.csv", "regret.svg"}) {
    ASSERT_TRUE(fs::exists(dir1 / f)) << f;
    EXPECT_EQ(slurp(dir1 / f), slurp(dir2 / f)) << f;
  }
  // schema spot checks
  std::string regret = slurp(dir1 / "regret.csv");
  EXPECT_EQ(regret.substr(0, regret.find('\n')),
            "experiment,policy,run,t,arm,inst_regret,cum_regret");
  std::string agg = slurp(dir1 / "agg.csv");
  EXPECT_EQ(agg.substr(0, agg.find('\n')), "policy,t,mean,stderr");
  std::string disc = slurp(dir1 / "discovery.csv");
  EXPECT_EQ(disc.substr(0, disc.find('\n')), "policy,run,n,sensitivity,fpr");
  fs::remove_all(dir1);
  fs::remove_all(dir2);
}

TEST(RunExperiment, UnwritableOutputDirIsIoError) {
  ExperimentConfig cfg = small_game_config();
  cfg.out_dir = "/proc/definitely/not/writable";
  EXPECT_THROW(run_experiment(cfg), IoError);
}

TEST(RunExperiment, Dag4SuiteSharesEnvAcrossPolicies) {
  ExperimentConfig cfg;
  cfg.env = "dag4_suite";
  cfg.horizon = 280;
  cfg.runs = 2;
  cfg.seed = 5;
  cfg.policies = {parse_policy_spec("ucb"), parse_policy_spec("ts")};
  ExperimentResult res = run_experiment(cfg);
  ASSERT_EQ(res.cum_regret.size(), 2u);
  // both policies face the same instance per run: identical forced phase
  for (int r = 0; r < 2; ++r)
    EXPECT_NEAR(res.cum_regret[0][r][269], res.cum_regret[1][r][269], 1e-9);
}

TEST(RunExperiment, DirectTestDiscoveryProducesMetrics) {
  ExperimentConfig cfg = small_game_config();
  cfg.horizon = 200;
  cfg.policies = {parse_policy_spec("is_ucb:direct_test")};
  ExperimentResult res = run_experiment(cfg);
  for (const auto& per_run : res.discovery[0]) {
    ASSERT_FALSE(per_run.empty());
    for (const auto& m : per_run) {
      EXPECT_GE(m.sensitivity, 0.0);
      EXPECT_LE(m.sensitivity, 1.0);
      EXPECT_GE(m.false_positive_rate, 0.0);
      EXPECT_LE(m.false_positive_rate, 1.0);
      EXPECT_GE(m.n, 90u);
    }
  }
}

TEST(RunExperiment, FileEnvLoadsScmText) {
  fs::path scm_path = fs::temp_directory_path() / "cb_game.scm";
  {
    std::ofstream out(scm_path);
    out << to_scm_text(make_game_env().scm);
  }
  ExperimentConfig cfg;
  cfg.env = "file";
  cfg.scm_file = scm_path.string();
  cfg.horizon = 100;
  cfg.runs = 2;
  cfg.seed = 4;
  cfg.policies = {parse_policy_spec("is_ucb:oracle_sepsets")};
  ExperimentResult res = run_experiment(cfg);
  EXPECT_EQ(res.cum_regret[0][0].size(), 100u);
  cfg.scm_file = "/does/not/exist.scm";
  EXPECT_THROW(run_experiment(cfg), IoError);
  fs::remove(scm_path);
}

TEST(DiagnosticsCsv, RowsPerArmAndCell) {
  BanditEnv env = make_game_env();
  Dataset data(env.scm.graph, env.scm.domain, 9);
  RandomStream rng(3);
  for (int k = 0; k < 15; ++k)
    for (int arm = 0; arm < 9; ++arm) data.append(arm, env.scm.sample(env.arms[arm], rng));
  std::ostringstream out;
  NodeSet screen = single(env.scm.graph.node_by_name("S"));
  write_variance_diagnostics_csv(out, data, env.scm, env.arms, screen, rng, 30);
  std::istringstream lines(out.str());
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "arm,s,alpha,alpha_star,term_between,term_within");
  int rows = 0;
  while (std::getline(lines, line)) ++rows;
  EXPECT_EQ(rows, 9 * 2);  // every arm, both screen values
}

TEST(EmitPlot, BandHalfWidthMatchesStderr) {
  // two policies, tiny trace; parse the svg back and compare band extent
  std::vector<std::string> names = {"a", "b"};
  std::vector<AggregateTrace> traces(2);
  traces[0].mean = {1.0, 2.0, 3.0, 4.0};
  traces[0].stderr_ = {0.1, 0.2, 0.3, 0.4};
  traces[1].mean = {0.5, 1.0, 1.5, 2.0};
  traces[1].stderr_ = {0.05, 0.05, 0.05, 0.05};
  fs::path path = fs::temp_directory_path() / "cb_plot_test.svg";
  emit_plot(names, traces, path.string());
  std::string svg = slurp(path);
  ASSERT_NE(svg.find("<svg"), std::string::npos);
  ASSERT_NE(svg.find("polyline"), std::string::npos);

  // recompute the pixel transform used by the plotter
  double ymax = 4.4, H = 500, mt = 20, mb = 50;
  auto ypix = [&](double v) { return H - mb - (H - mt - mb) * (v / ymax); };
  // first polygon: policy a band; its first point is t=1 upper = 1.1
  auto poly = svg.find("<polygon");
  auto pts = svg.find("points=\"", poly);
  std::istringstream coords(svg.substr(pts + 8, 60));
  double x, y;
  char comma;
  coords >> x >> comma >> y;
  EXPECT_NEAR(y, ypix(1.1), 0.01);
  fs::remove(path);
}

TEST(EmitPlot, EmptyTraceIsAnError) {
  EXPECT_THROW(emit_plot({}, {}, "/tmp/never.svg"), std::invalid_argument);
  std::vector<AggregateTrace> traces(1);
  EXPECT_THROW(emit_plot({"a"}, traces, "/tmp/never.svg"), std::invalid_argument);
  EXPECT_FALSE(fs::exists("/tmp/never.svg"));
}

TEST(EmitPlot, SinglePolicyPolylineHasAllPoints) {
  std::vector<AggregateTrace> traces(1);
  for (int t = 0; t < 10; ++t) traces[0].mean.push_back(t);
  fs::path path = fs::temp_directory_path() / "cb_plot_single.svg";
  emit_plot({"only"}, traces, path.string());
  std::string svg = slurp(path);
  auto pts = svg.find("<polyline");
  ASSERT_NE(pts, std::string::npos);
  auto seg = svg.substr(pts, svg.find("/>", pts) - pts);
  int commas = 0;
  for (char c : seg)
    if (c == ',') ++commas;
  EXPECT_EQ(commas, 10);  // one x,y pair per trace point
  fs::remove(path);
}
