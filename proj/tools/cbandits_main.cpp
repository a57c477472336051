// Command-line front end: `run` executes a configured experiment,prints a
// summary and writes the CSV/SVG outputs; `discover-bench` scores the
// direct-testing discovery alone under a uniform policy; `plot` renders an
// agg.csv into an SVG. Exit codes: 0 ok, 2 config error, 3 I/O error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "cbandits/harness.hpp"

namespace {

using namespace cbandits;

int cmd_run(ExperimentConfig cfg) {
  ExperimentResult result = run_experiment(cfg);
  std::printf("experiment=%s runs=%zu horizon=%ld\n", result.experiment.c_str(),
              result.cum_regret.empty() ? 0 : result.cum_regret[0].size(), cfg.horizon);
  for (std::size_t p = 0; p < result.policy_names.size(); ++p) {
    double m = result.final_mean(p);
    if (result.cum_regret[p].size() >= 2)
      std::printf("%-28s final cumulative regret %10.3f +- %.3f\n",
                  result.policy_names[p].c_str(), m, result.final_stderr(p));
    else
      std::printf("%-28s final cumulative regret %10.3f\n", result.policy_names[p].c_str(), m);
  }
  if (!cfg.out_dir.empty()) std::printf("outputs written to %s\n", cfg.out_dir.c_str());
  return 0;
}

int cmd_discover_bench(const std::string& env_name, long samples, int runs, std::uint64_t seed,
                       int max_size, const std::string& out_path) {
  std::ofstream out;
  std::ostream* os = &std::cout;
  if (!out_path.empty()) {
    out.open(out_path);
    if (!out) throw IoError("cannot write " + out_path);
    os = &out;
  }
  *os << "policy,run,n,sensitivity,fpr\n";
  ExperimentConfig ecfg;
  ecfg.env = env_name;
  ecfg.runs = runs;
  ecfg.seed = seed;
  std::vector<BanditEnv> envs = build_envs(ecfg);
  for (int r = 0; r < runs; ++r) {
    const BanditEnv& env = envs[r];
    int cap = max_size > 0 ? max_size : set_size(env.scm.graph.system_nodes()) - 1;
    RandomStream rng = derive_stream(seed, {hash_tag("bench"), static_cast<std::uint64_t>(r)});
    Dataset data(env.scm.graph, env.scm.domain, static_cast<int>(env.arms.size()));
    SepSetCatalog catalog;
    for (long t = 0; t < samples; ++t) {
      int arm = static_cast<int>(rng.below(env.arms.size()));
      data.append(arm, env.scm.sample(env.arms[arm], rng));
      if (should_rerun(catalog, data.size())) {
        catalog = discover(data, env.scm.graph, cap);
        DiscoveryMetrics m = score_discovery(catalog, env.scm.graph, cap);
        char buf[128];
        std::snprintf(buf, sizeof buf, "direct_test,%d,%zu,%.10g,%.10g\n", r, m.n,
                      m.sensitivity, m.false_positive_rate);
        *os << buf;
      }
    }
  }
  return 0;
}

int cmd_plot(const std::string& in_path, const std::string& out_path) {
  std::ifstream in(in_path);
  if (!in) throw IoError("cannot read " + in_path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("policy,t,mean,stderr", 0) != 0)
    throw ConfigError("plot: expected agg.csv with header policy,t,mean,stderr");
  std::vector<std::string> names;
  std::vector<AggregateTrace> traces;
  std::map<std::string, std::size_t> index;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string policy, t_s, mean_s, se_s;
    std::getline(ls, policy, ',');
    std::getline(ls, t_s, ',');
    std::getline(ls, mean_s, ',');
    std::getline(ls, se_s);
    auto [it, fresh] = index.try_emplace(policy, names.size());
    if (fresh) {
      names.push_back(policy);
      traces.emplace_back();
    }
    AggregateTrace& tr = traces[it->second];
    tr.mean.push_back(std::stod(mean_s));
    if (!se_s.empty()) tr.stderr_.push_back(std::stod(se_s));
  }
  if (traces.empty()) throw ConfigError("plot: no data rows in " + in_path);
  emit_plot(names, traces, out_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Causal bandit simulation toolkit"};
  app.require_subcommand(1);

  ExperimentConfig cfg;
  cfg.policies.clear();
  std::string policies_flag = "ucb,ts,is_ucb:direct_test,is_ts:direct_test";
  std::string config_file;

  CLI::App* run = app.add_subcommand("run", "run a bandit experiment");
  run->add_option("--env", cfg.env, "game | dag4_suite | dag6 | file");
  run->add_option("--scm-file", cfg.scm_file, "SCM text file for --env file");
  run->add_option("--horizon", cfg.horizon, "rounds per run");
  run->add_option("--runs", cfg.runs, "independent runs");
  run->add_option("--seed", cfg.seed, "master seed");
  run->add_option("--policies", policies_flag, "comma-separated kind[:discovery] specs");
  run->add_option("--out", cfg.out_dir, "output directory for CSV/SVG");
  run->add_option("--config", config_file, "config file (overrides other flags)");
  run->add_option("--initial-pulls", cfg.initial_pulls, "initial uniform pulls per arm");
  run->add_option("--max-sepset-size", cfg.max_sepset_size, "candidate separating set cap");
  run->add_option("--threads", cfg.threads, "worker threads (0 = hardware)");
  run->add_flag("--round-logs", cfg.round_logs, "also write rounds.csv");

  std::string bench_env = "game", bench_out;
  long bench_samples = 2000;
  int bench_runs = 10, bench_max_size = 0;
  std::uint64_t bench_seed = 1;
  CLI::App* bench = app.add_subcommand("discover-bench", "discovery metrics only");
  bench->add_option("--env", bench_env, "game | dag4_suite | dag6 | file");
  bench->add_option("--samples", bench_samples, "uniform-policy samples per run");
  bench->add_option("--runs", bench_runs, "independent runs");
  bench->add_option("--seed", bench_seed, "master seed");
  bench->add_option("--max-sepset-size", bench_max_size, "candidate separating set cap");
  bench->add_option("--out", bench_out, "CSV path (default stdout)");

  std::string plot_in, plot_out = "regret.svg";
  CLI::App* plot = app.add_subcommand("plot", "render agg.csv to SVG");
  plot->add_option("--in", plot_in, "agg.csv path")->required();
  plot->add_option("--out", plot_out, "SVG path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      if (!config_file.empty()) {
        cfg = cbandits::parse_config_file(config_file);
      } else {
        std::stringstream ss(policies_flag);
        std::string spec;
        while (std::getline(ss, spec, ','))
          if (!spec.empty()) cfg.policies.push_back(cbandits::parse_policy_spec(spec));
      }
      return cmd_run(cfg);
    }
    if (bench->parsed())
      return cmd_discover_bench(bench_env, bench_samples, bench_runs, bench_seed,
                                bench_max_size, bench_out);
    if (plot->parsed()) return cmd_plot(plot_in, plot_out);
  } catch (const cbandits::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const cbandits::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
