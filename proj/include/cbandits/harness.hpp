#pragma once

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "cbandits/dataset.hpp"
#include "cbandits/discovery.hpp"
#include "cbandits/inference.hpp"
#include "cbandits/policies.hpp"
#include "cbandits/rng.hpp"
#include "cbandits/scm.hpp"

namespace cbandits {

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};
struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

struct ExperimentConfig {
  std::string env = "game";  // game | dag4_suite | dag6 | file
  std::string scm_file;      // for env = file
  long horizon = 10000;
  int runs = 2;
  std::uint64_t seed = 1;
  std::vector<PolicyConfig> policies;
  std::string out_dir;
  double discovery_growth = 1.25;
  bool round_logs = false;
  int initial_pulls = -1;    // -1: env default (10; 3 for dag6)
  int max_sepset_size = -1;  // -1: env default (|V|-1; 3 for dag6)
  int threads = 0;           // 0: hardware concurrency
};

inline const char* to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::kUcb: return "ucb";
    case PolicyKind::kTs: return "ts";
    case PolicyKind::kIsUcb: return "is_ucb";
    case PolicyKind::kIsTs: return "is_ts";
  }
  return "?";
}

inline const char* to_string(DiscoveryMode m) {
  switch (m) {
    case DiscoveryMode::kNone: return "none";
    case DiscoveryMode::kDirectTest: return "direct_test";
    case DiscoveryMode::kOracleSepsets: return "oracle_sepsets";
    case DiscoveryMode::kOracleParents: return "oracle_parents";
  }
  return "?";
}

inline std::string policy_name(const PolicyConfig& p) {
  std::string name = to_string(p.kind);
  if (p.discovery != DiscoveryMode::kNone) name += std::string(":") + to_string(p.discovery);
  return name;
}

/// Parses "kind" or "kind:discovery", e.g. "is_ucb:oracle_sepsets".
inline PolicyConfig parse_policy_spec(const std::string& spec) {
  PolicyConfig p;
  std::string kind = spec, disc;
  auto colon = spec.find(':');
  if (colon != std::string::npos) {
    kind = spec.substr(0, colon);
    disc = spec.substr(colon + 1);
  }
  if (kind == "ucb") p.kind = PolicyKind::kUcb;
  else if (kind == "ts") p.kind = PolicyKind::kTs;
  else if (kind == "is_ucb") p.kind = PolicyKind::kIsUcb;
  else if (kind == "is_ts") p.kind = PolicyKind::kIsTs;
  else throw ConfigError("unknown policy kind: " + kind);
  if (disc.empty()) {
    p.discovery = p.is_sharing() ? DiscoveryMode::kDirectTest : DiscoveryMode::kNone;
  } else if (disc == "none") p.discovery = DiscoveryMode::kNone;
  else if (disc == "direct_test") p.discovery = DiscoveryMode::kDirectTest;
  else if (disc == "oracle_sepsets") p.discovery = DiscoveryMode::kOracleSepsets;
  else if (disc == "oracle_parents") p.discovery = DiscoveryMode::kOracleParents;
  else throw ConfigError("unknown discovery mode: " + disc);
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return p;
}

// Flat key-value config text: "key = value" lines, '#' comments, one
// "policy.<i> = spec" line per policy (or policy.<i>.kind/.discovery).
inline ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::vector<std::pair<int, PolicyConfig>> policies;
  auto policy_at = [&](int i) -> PolicyConfig& {
    for (auto& [k, p] : policies)
      if (k == i) return p;
    policies.emplace_back(i, PolicyConfig{});
    return policies.back().second;
  };
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      std::istringstream probe(line);
      std::string t;
      if (probe >> t) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
      continue;
    }
    auto trim = [](std::string s) {
      auto b = s.find_first_not_of(" \t");
      auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    try {
      if (key == "env") cfg.env = val;
      else if (key == "scm_file") cfg.scm_file = val;
      else if (key == "horizon") cfg.horizon = std::stol(val);
      else if (key == "runs") cfg.runs = std::stoi(val);
      else if (key == "seed") cfg.seed = std::stoull(val);
      else if (key == "out") cfg.out_dir = val;
      else if (key == "discovery_growth") cfg.discovery_growth = std::stod(val);
      else if (key == "round_logs") cfg.round_logs = (val == "true" || val == "1");
      else if (key == "initial_pulls") cfg.initial_pulls = std::stoi(val);
      else if (key == "max_sepset_size") cfg.max_sepset_size = std::stoi(val);
      else if (key == "threads") cfg.threads = std::stoi(val);
      else if (key.rfind("policy.", 0) == 0) {
        std::string rest = key.substr(7);
        auto dot = rest.find('.');
        int idx = std::stoi(dot == std::string::npos ? rest : rest.substr(0, dot));
        if (dot == std::string::npos) {
          policy_at(idx) = parse_policy_spec(val);
        } else {
          std::string field = rest.substr(dot + 1);
          PolicyConfig& p = policy_at(idx);
          if (field == "kind") p.kind = parse_policy_spec(val).kind;
          else if (field == "discovery") p.discovery = parse_policy_spec("ucb:" + val).discovery;
          else if (field == "initial_pulls") p.initial_pulls_per_arm = std::stoi(val);
          else if (field == "max_sepset_size") p.max_sepset_size = std::stoi(val);
          else throw ConfigError("unknown policy field: " + field);
        }
      } else {
        throw ConfigError("unknown config key: " + key);
      }
    } catch (const std::invalid_argument&) {
      throw ConfigError("config line " + std::to_string(lineno) + ": bad value for " + key);
    }
  }
  std::sort(policies.begin(), policies.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (auto& [k, p] : policies) cfg.policies.push_back(p);
  return cfg;
}

inline ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

// ---------------------------------------------------------------------------

struct AggregateTrace {
  std::vector<double> mean;
  std::vector<double> stderr_;  // empty when fewer than 2 runs
};

/// Pointwise mean and standard error (sample std / sqrt(R)) across runs.
inline AggregateTrace aggregate(const std::vector<std::vector<double>>& run_traces) {
  AggregateTrace agg;
  if (run_traces.empty()) return agg;
  std::size_t T = run_traces[0].size();
  std::size_t R = run_traces.size();
  agg.mean.assign(T, 0.0);
  for (const auto& tr : run_traces)
    for (std::size_t t = 0; t < T; ++t) agg.mean[t] += tr[t];
  for (double& m : agg.mean) m /= static_cast<double>(R);
  if (R >= 2) {
    agg.stderr_.assign(T, 0.0);
    for (const auto& tr : run_traces)
      for (std::size_t t = 0; t < T; ++t) {
        double dev = tr[t] - agg.mean[t];
        agg.stderr_[t] += dev * dev;
      }
    for (double& s : agg.stderr_)
      s = std::sqrt(s / static_cast<double>(R - 1)) / std::sqrt(static_cast<double>(R));
  }
  return agg;
}

struct ExperimentResult {
  std::string experiment;
  std::vector<std::string> policy_names;
  // cum_regret[p][r][t], arms[p][r][t]
  std::vector<std::vector<std::vector<double>>> cum_regret;
  std::vector<std::vector<std::vector<std::int16_t>>> arms;
  std::vector<std::vector<std::vector<DiscoveryMetrics>>> discovery;
  std::vector<std::vector<std::vector<RoundLog>>> round_logs;  // empty unless enabled

  AggregateTrace aggregate_policy(std::size_t p) const { return aggregate(cum_regret[p]); }
  double final_mean(std::size_t p) const {
    double s = 0;
    for (const auto& tr : cum_regret[p]) s += tr.back();
    return s / static_cast<double>(cum_regret[p].size());
  }
  double final_stderr(std::size_t p) const {
    double m = final_mean(p), s = 0;
    std::size_t R = cum_regret[p].size();
    for (const auto& tr : cum_regret[p]) s += (tr.back() - m) * (tr.back() - m);
    return std::sqrt(s / static_cast<double>(R - 1)) / std::sqrt(static_cast<double>(R));
  }
};

namespace detail {

struct ResolvedConfig {
  int initial_pulls;
  int max_sepset_size;
};

inline ResolvedConfig resolve_defaults(const ExperimentConfig& cfg, const BanditEnv& env) {
  ResolvedConfig r;
  int system_non_target = set_size(env.scm.graph.system_nodes()) - 1;
  bool big = system_non_target > 3;
  r.initial_pulls = cfg.initial_pulls > 0 ? cfg.initial_pulls : (cfg.env == "dag6" ? 3 : 10);
  r.max_sepset_size = cfg.max_sepset_size > 0
                          ? std::min(cfg.max_sepset_size, system_non_target)
                          : (big ? 3 : system_non_target);
  return r;
}

inline void run_one(const ExperimentConfig& cfg, const BanditEnv& env, const PolicyConfig& pol,
                    int run, std::vector<double>& cum_out, std::vector<std::int16_t>& arm_out,
                    std::vector<DiscoveryMetrics>& disc_out, std::vector<RoundLog>* log_out) {
  ResolvedConfig res = resolve_defaults(cfg, env);
  PolicyConfig p = pol;
  p.initial_pulls_per_arm = res.initial_pulls;
  if (p.max_sepset_size <= 0) p.max_sepset_size = res.max_sepset_size;

  RandomStream rng = derive_stream(
      cfg.seed, {hash_tag("run"), static_cast<std::uint64_t>(run), hash_tag("policy"),
                 hash_tag(policy_name(pol))});
  Dataset data(env.scm.graph, env.scm.domain, static_cast<int>(env.arms.size()));
  SepSetCatalog catalog;

  cum_out.resize(cfg.horizon);
  arm_out.resize(cfg.horizon);
  double cum = 0.0;
  for (long t = 1; t <= cfg.horizon; ++t) {
    RoundLog log;
    log.t = t;
    int arm;
    auto init = initial_phase_arm(data, env.arms, p.initial_pulls_per_arm);
    if (init) {
      arm = *init;
      log.arm = arm;
    } else {
      if (p.is_sharing()) {
        switch (p.discovery) {
          case DiscoveryMode::kDirectTest:
            if (should_rerun(catalog, data.size(), cfg.discovery_growth)) {
              catalog = discover(data, env.scm.graph, p.max_sepset_size);
              disc_out.push_back(score_discovery(catalog, env.scm.graph, p.max_sepset_size));
            }
            break;
          case DiscoveryMode::kOracleSepsets:
            if (!catalog.has_run) catalog = oracle_sepset_catalog(env.scm.graph, p.max_sepset_size);
            break;
          case DiscoveryMode::kOracleParents:
            if (!catalog.has_run) catalog = parents_catalog(env.scm.graph);
            break;
          case DiscoveryMode::kNone:
            break;
        }
      }
      long n = static_cast<long>(data.size());
      switch (p.kind) {
        case PolicyKind::kUcb: arm = choose_ucb(data, env.arms, n); log.arm = arm; break;
        case PolicyKind::kTs: arm = choose_ts(data, env.arms, rng); log.arm = arm; break;
        case PolicyKind::kIsUcb: log = choose_is_ucb(data, env.scm.graph, catalog, env.arms, n);
          log.t = t;
          arm = log.arm;
          break;
        case PolicyKind::kIsTs:
          arm = choose_is_ts(data, env.scm.graph, catalog, env.arms, n, rng);
          log.arm = arm;
          break;
        default: arm = 0;
      }
    }
    auto outcome = env.scm.sample(env.arms[arm], rng);
    log.reward = outcome[env.scm.graph.target];
    data.append(arm, outcome);
    cum += env.best_mean() - env.true_means[arm];
    cum_out[t - 1] = cum;
    arm_out[t - 1] = static_cast<std::int16_t>(arm);
    if (log_out) log_out->push_back(log);
  }
}

}  // namespace detail

/// Builds the per-run environments. Shared across policies within a run
/// so paired policy comparisons see identical instances.
inline std::vector<BanditEnv> build_envs(const ExperimentConfig& cfg) {
  std::vector<BanditEnv> envs;
  envs.reserve(cfg.runs);
  if (cfg.env == "game") {
    BanditEnv env = make_game_env();
    for (int r = 0; r < cfg.runs; ++r) envs.push_back(env);
  } else if (cfg.env == "dag4_suite") {
    std::vector<Dag> suite = enumerate_4node_suite();
    // seeded shuffle; run r uses shuffled graph r (mod suite size), one
    // fresh parametrization per run
    std::vector<int> order(suite.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    RandomStream shuffle_rng = derive_stream(cfg.seed, {hash_tag("dag4_shuffle")});
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[shuffle_rng.below(i)]);
    for (int r = 0; r < cfg.runs; ++r) {
      RandomStream env_rng = derive_stream(cfg.seed, {hash_tag("env"), static_cast<std::uint64_t>(r)});
      envs.push_back(make_env_for_dag("dag4_suite", suite[order[r % suite.size()]], env_rng));
    }
  } else if (cfg.env == "dag6") {
    for (int r = 0; r < cfg.runs; ++r) {
      RandomStream env_rng = derive_stream(cfg.seed, {hash_tag("env"), static_cast<std::uint64_t>(r)});
      envs.push_back(make_6node_env(env_rng));
    }
  } else if (cfg.env == "file") {
    std::ifstream in(cfg.scm_file);
    if (!in) throw IoError("cannot read scm file: " + cfg.scm_file);
    std::ostringstream ss;
    ss << in.rdbuf();
    BanditEnv env = make_env_from_file_text(ss.str());
    for (int r = 0; r < cfg.runs; ++r) envs.push_back(env);
  } else {
    throw ConfigError("unknown env: " + cfg.env);
  }
  return envs;
}

inline void write_outputs(const ExperimentResult& result, const std::string& out_dir);

/// Runs every (policy, run) task, in parallel across a worker pool;
/// outputs are a pure function of (seed, config).
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  if (cfg.runs < 1) throw ConfigError("runs must be >= 1");
  if (cfg.policies.empty()) throw ConfigError("no policies configured");
  for (const auto& p : cfg.policies) {
    try {
      p.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  std::vector<BanditEnv> envs = build_envs(cfg);
  {
    detail::ResolvedConfig res = detail::resolve_defaults(cfg, envs[0]);
    long phase = static_cast<long>(envs[0].arms.size()) * res.initial_pulls;
    if (cfg.horizon < phase)
      throw ConfigError("horizon shorter than the initial phase (" + std::to_string(phase) +
                        " rounds)");
  }

  ExperimentResult result;
  result.experiment = cfg.env;
  std::size_t P = cfg.policies.size();
  for (const auto& p : cfg.policies) result.policy_names.push_back(policy_name(p));
  result.cum_regret.assign(P, std::vector<std::vector<double>>(cfg.runs));
  result.arms.assign(P, std::vector<std::vector<std::int16_t>>(cfg.runs));
  result.discovery.assign(P, std::vector<std::vector<DiscoveryMetrics>>(cfg.runs));
  if (cfg.round_logs) result.round_logs.assign(P, std::vector<std::vector<RoundLog>>(cfg.runs));

  std::size_t n_tasks = P * static_cast<std::size_t>(cfg.runs);
  std::atomic<std::size_t> next{0};
  unsigned n_threads = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads)
                                       : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min<std::size_t>(n_threads, n_tasks);
  auto worker = [&]() {
    for (;;) {
      std::size_t task = next.fetch_add(1);
      if (task >= n_tasks) return;
      std::size_t p = task / cfg.runs;
      int r = static_cast<int>(task % cfg.runs);
      detail::run_one(cfg, envs[r], cfg.policies[p], r, result.cum_regret[p][r],
                      result.arms[p][r], result.discovery[p][r],
                      cfg.round_logs ? &result.round_logs[p][r] : nullptr);
    }
  };
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  if (!cfg.out_dir.empty()) write_outputs(result, cfg.out_dir);
  return result;
}

// ---------------------------------------------------------------------------
// CSV and SVG output.

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw IoError("cannot write " + p.string());
  return out;
}

}  // namespace detail

/// Self-contained SVG: one line per policy plus a translucent band of
/// +-stderr around it.
inline void emit_plot(const std::vector<std::string>& names,
                      const std::vector<AggregateTrace>& traces, const std::string& path) {
  if (names.empty() || names.size() != traces.size() || traces[0].mean.empty())
    throw std::invalid_argument("emit_plot: empty trace");
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  const double W = 800, H = 500, ml = 70, mr = 20, mt = 20, mb = 50;
  std::size_t T = traces[0].mean.size();
  double ymax = 1e-12;
  for (const auto& tr : traces)
    for (std::size_t t = 0; t < T; ++t) {
      double hi = tr.mean[t] + (tr.stderr_.empty() ? 0.0 : tr.stderr_[t]);
      ymax = std::max(ymax, hi);
    }
  auto xpix = [&](double t) { return ml + (W - ml - mr) * (t / static_cast<double>(T)); };
  auto ypix = [&](double v) { return H - mb - (H - mt - mb) * (v / ymax); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  char buf[64];
  for (std::size_t p = 0; p < traces.size(); ++p) {
    const auto& tr = traces[p];
    const char* color = kColors[p % 8];
    if (!tr.stderr_.empty()) {
      svg << "<polygon fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
      for (std::size_t t = 0; t < T; ++t) {
        std::snprintf(buf, sizeof buf, "%.3f,%.3f ", xpix(static_cast<double>(t + 1)),
                      ypix(tr.mean[t] + tr.stderr_[t]));
        svg << buf;
      }
      for (std::size_t t = T; t-- > 0;) {
        std::snprintf(buf, sizeof buf, "%.3f,%.3f ", xpix(static_cast<double>(t + 1)),
                      ypix(std::max(0.0, tr.mean[t] - tr.stderr_[t])));
        svg << buf;
      }
      svg << "\"/>\n";
    }
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t t = 0; t < T; ++t) {
      std::snprintf(buf, sizeof buf, "%.3f,%.3f ", xpix(static_cast<double>(t + 1)),
                    ypix(tr.mean[t]));
      svg << buf;
    }
    svg << "\"/>\n";
    svg << "<text x=\"" << ml + 10 << "\" y=\"" << mt + 16 + 18 * static_cast<double>(p)
        << "\" fill=\"" << color << "\" font-size=\"13\" font-family=\"sans-serif\">" << names[p]
        << "</text>\n";
  }
  // axes with a few ticks
  svg << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\""
      << H - mb << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb
      << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    double tv = static_cast<double>(T) * k / 4.0;
    double vv = ymax * k / 4.0;
    svg << "<text x=\"" << xpix(tv) << "\" y=\"" << H - mb + 18
        << "\" font-size=\"11\" font-family=\"sans-serif\" text-anchor=\"middle\">"
        << static_cast<long>(tv) << "</text>\n";
    svg << "<text x=\"" << ml - 8 << "\" y=\"" << ypix(vv) + 4
        << "\" font-size=\"11\" font-family=\"sans-serif\" text-anchor=\"end\">"
        << detail::fmt(vv) << "</text>\n";
  }
  svg << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 10
      << "\" font-size=\"13\" font-family=\"sans-serif\" text-anchor=\"middle\">round</text>\n";
  svg << "</svg>\n";

  auto out = detail::open_out(path);
  out << svg.str();
  if (!out) throw IoError("failed writing " + path);
}

/// Variance-diagnostic CSV: one row per (arm, s) with the data-sharing
/// fraction and the arm-level variance terms.
inline void write_variance_diagnostics_csv(std::ostream& out, const Dataset& data,
                                           const DiscreteScm& scm, const std::vector<Arm>& arms,
                                           NodeSet s_vars, RandomStream& rng, int mc_reps = 1000) {
  out << "arm,s,alpha,alpha_star,term_between,term_within\n";
  for (const Arm& arm : arms) {
    if (data.n_arm(arm.index) == 0) continue;
    VarianceDiagnostics d = variance_diagnostics(data, scm, arms, s_vars, arm, rng, mc_reps);
    for (std::size_t i = 0; i < d.cells.size(); ++i)
      out << arm.index << ',' << d.cells[i] << ',' << detail::fmt(d.alpha_per_s[i]) << ','
          << detail::fmt(d.alpha_star) << ',' << detail::fmt(d.term_between) << ','
          << detail::fmt(d.term_within) << '\n';
  }
}

inline void write_outputs(const ExperimentResult& result, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output dir: " + out_dir);

  auto regret = detail::open_out(fs::path(out_dir) / "regret.csv");
  regret << "experiment,policy,run,t,arm,inst_regret,cum_regret\n";
  for (std::size_t p = 0; p < result.policy_names.size(); ++p)
    for (std::size_t r = 0; r < result.cum_regret[p].size(); ++r) {
      const auto& cum = result.cum_regret[p][r];
      for (std::size_t t = 0; t < cum.size(); ++t) {
        double inst = t == 0 ? cum[t] : cum[t] - cum[t - 1];
        regret << result.experiment << ',' << result.policy_names[p] << ',' << r << ','
               << (t + 1) << ',' << result.arms[p][r][t] << ',' << detail::fmt(inst) << ','
               << detail::fmt(cum[t]) << '\n';
      }
    }

  auto agg = detail::open_out(fs::path(out_dir) / "agg.csv");
  agg << "policy,t,mean,stderr\n";
  std::vector<AggregateTrace> traces;
  for (std::size_t p = 0; p < result.policy_names.size(); ++p) {
    traces.push_back(result.aggregate_policy(p));
    const auto& tr = traces.back();
    for (std::size_t t = 0; t < tr.mean.size(); ++t) {
      agg << result.policy_names[p] << ',' << (t + 1) << ',' << detail::fmt(tr.mean[t]) << ',';
      if (!tr.stderr_.empty()) agg << detail::fmt(tr.stderr_[t]);
      agg << '\n';
    }
  }

  auto disc = detail::open_out(fs::path(out_dir) / "discovery.csv");
  disc << "policy,run,n,sensitivity,fpr\n";
  for (std::size_t p = 0; p < result.policy_names.size(); ++p)
    for (std::size_t r = 0; r < result.discovery[p].size(); ++r)
      for (const auto& m : result.discovery[p][r])
        disc << result.policy_names[p] << ',' << r << ',' << m.n << ','
             << detail::fmt(m.sensitivity) << ',' << detail::fmt(m.false_positive_rate) << '\n';

  if (!result.round_logs.empty()) {
    auto rounds = detail::open_out(fs::path(out_dir) / "rounds.csv");
    rounds << "policy,run,t,arm,index,width_kind,sepset,reward\n";
    for (std::size_t p = 0; p < result.policy_names.size(); ++p)
      for (std::size_t r = 0; r < result.round_logs[p].size(); ++r)
        for (const auto& log : result.round_logs[p][r]) {
          rounds << result.policy_names[p] << ',' << r << ',' << log.t << ',' << log.arm << ','
                 << detail::fmt(log.chosen_index) << ','
                 << (log.used_sepset ? "sepset" : "standard") << ',';
          if (log.used_sepset) {
            auto nodes = set_nodes(log.sepset);
            for (std::size_t i = 0; i < nodes.size(); ++i)
              rounds << (i ? ";" : "") << nodes[i];
          }
          rounds << ',' << log.reward << '\n';
        }
  }

  emit_plot(result.policy_names, traces, (fs::path(out_dir) / "regret.svg").string());
}

}  // namespace cbandits
