#include "dmab/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <set>
#include <thread>

#include "dmab/baselines.hpp"
#include "dmab/decoupled.hpp"
#include "dmab/errors.hpp"
#include "dmab/params.hpp"
#include "dmab/serialization.hpp"

namespace dmab {

using nlohmann::json;

namespace {

const std::map<std::string, std::set<std::string>>& allowed_params() {
  static const std::map<std::string, std::set<std::string>> table = {
      {"decoupled", {"mu", "delta", "queries_per_round"}},
      {"decoupled_switching", {"mu", "delta", "queries_per_round", "segments"}},
      {"decoupled_doubling",
       {"initial_v", "delta", "queries_per_round", "variant", "segments"}},
      {"exp3", {"gamma"}},
      {"exp3p", {"delta"}},
      {"round_robin", {}},
      {"greedy_decoupled", {}},
  };
  return table;
}

bool valid_label(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  });
}

template <typename T>
T param_or(const json& params, const char* key, T fallback) {
  return params.contains(key) ? params.at(key).get<T>() : fallback;
}

double mu_param(const json& params, std::size_t arms, std::size_t horizon) {
  if (!params.contains("mu")) return select_mu(arms, horizon);
  const json& mu = params.at("mu");
  if (mu.is_string()) {
    if (mu.get<std::string>() != "auto") throw SpecError("mu must be a number or \"auto\"");
    return select_mu(arms, horizon);
  }
  return mu.get<double>();
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

void write_json(const json& j, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
  finish(out, path);
}

json mean_std_json(const MeanStd& ms) { return {{"mean", ms.mean}, {"std", ms.std}}; }

void write_curves(const std::vector<AlgorithmResult>& algos,
                  std::vector<MeanStd> AlgorithmResult::*curve,
                  const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "t,algo,mean,std\n";
  for (const AlgorithmResult& a : algos) {
    if (a.error) continue;
    const auto& c = a.*curve;
    for (std::size_t t = 0; t < c.size(); ++t) {
      out << t + 1 << ',' << a.spec.label << ',' << format_real(c[t].mean) << ','
          << format_real(c[t].std) << '\n';
    }
  }
  finish(out, path);
}

}  // namespace

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t derive_seed(std::uint64_t base_seed, const std::string& label,
                          std::uint64_t repetition) {
  return splitmix64(splitmix64(base_seed ^ fnv1a64(label)) + repetition);
}

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) throw SpecError("config must be a JSON object");
  ExperimentConfig cfg;
  try {
    const int version = j.at("schema_version").get<int>();
    if (version != kSchemaVersion) {
      throw SpecError("unsupported schema_version " + std::to_string(version));
    }
    static const std::set<std::string> known = {
        "schema_version", "env",     "algorithms",           "repetitions",
        "base_seed",      "output_dir", "redraw_env_per_repetition",
        "regret_segments", "half_norm_thresholds", "emit",   "threads"};
    for (const auto& [key, _] : j.items()) {
      if (!known.count(key)) throw SpecError("unknown config field '" + key + "'");
    }

    cfg.env = env_spec_from_json(j.at("env"));
    cfg.env_seed_given = j.at("env").contains("seed");
    cfg.repetitions = param_or<std::size_t>(j, "repetitions", 1);
    cfg.base_seed = param_or<std::uint64_t>(j, "base_seed", 0);
    cfg.output_dir = param_or<std::string>(j, "output_dir", "out");
    cfg.redraw_env_per_repetition = param_or<bool>(j, "redraw_env_per_repetition", false);
    cfg.regret_segments =
        param_or<std::vector<std::size_t>>(j, "regret_segments", std::vector<std::size_t>{});
    cfg.half_norm_thresholds =
        param_or<std::vector<double>>(j, "half_norm_thresholds", std::vector<double>{});
    cfg.threads = param_or<std::size_t>(j, "threads", 1);

    if (j.contains("emit")) {
      const json& e = j.at("emit");
      static const std::set<std::string> flags = {"env",        "reward_curves", "count_curves",
                                                  "regret",     "half_norms",    "trajectories",
                                                  "timing"};
      for (const auto& [key, _] : e.items()) {
        if (!flags.count(key)) throw SpecError("unknown emit flag '" + key + "'");
      }
      cfg.emit.env = param_or<bool>(e, "env", cfg.emit.env);
      cfg.emit.reward_curves = param_or<bool>(e, "reward_curves", cfg.emit.reward_curves);
      cfg.emit.count_curves = param_or<bool>(e, "count_curves", cfg.emit.count_curves);
      cfg.emit.regret = param_or<bool>(e, "regret", cfg.emit.regret);
      cfg.emit.half_norms = param_or<bool>(e, "half_norms", cfg.emit.half_norms);
      cfg.emit.trajectories = param_or<bool>(e, "trajectories", cfg.emit.trajectories);
      cfg.emit.timing = param_or<bool>(e, "timing", cfg.emit.timing);
    }

    const json& algos = j.at("algorithms");
    if (!algos.is_array() || algos.empty()) {
      throw SpecError("'algorithms' must be a non-empty array");
    }
    std::set<std::string> labels;
    for (const json& a : algos) {
      AlgorithmSpec spec;
      if (a.is_string()) {
        spec.name = a.get<std::string>();
      } else {
        spec.name = a.at("name").get<std::string>();
        spec.label = param_or<std::string>(a, "label", "");
        if (a.contains("params")) spec.params = a.at("params");
      }
      if (spec.label.empty()) spec.label = spec.name;
      const auto it = allowed_params().find(spec.name);
      if (it == allowed_params().end()) {
        throw SpecError("unknown algorithm '" + spec.name + "'");
      }
      if (!spec.params.is_object()) {
        throw SpecError("params of '" + spec.label + "' must be an object");
      }
      for (const auto& [key, _] : spec.params.items()) {
        if (!it->second.count(key)) {
          throw SpecError("algorithm '" + spec.name + "' has no parameter '" + key + "'");
        }
      }
      if (!valid_label(spec.label)) {
        throw SpecError("label '" + spec.label + "' must match [A-Za-z0-9_-]+");
      }
      if (!labels.insert(spec.label).second) {
        throw SpecError("duplicate algorithm label '" + spec.label + "'");
      }
      cfg.algorithms.push_back(std::move(spec));
    }
  } catch (const json::exception& e) {
    throw SpecError(std::string("invalid config: ") + e.what());
  }

  if (cfg.repetitions < 1) throw SpecError("repetitions must be at least 1");
  if (cfg.threads < 1) throw SpecError("threads must be at least 1");
  validate(cfg.env);
  for (std::size_t s : cfg.regret_segments) {
    if (s < 1 || s > cfg.env.horizon) {
      throw SpecError("regret segment count " + std::to_string(s) + " outside [1, T]");
    }
  }
  // Parameter values are checked by building each policy once; a horizon
  // that is too small is reported per algorithm when the experiment runs.
  for (const AlgorithmSpec& a : cfg.algorithms) {
    try {
      make_policy(a, cfg.env.arms, cfg.env.horizon);
    } catch (const HorizonTooSmall&) {
    } catch (const SpecError& e) {
      throw SpecError("algorithm '" + a.label + "': " + e.what());
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open config file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw SpecError(path.string() + ": " + e.what());
  }
  return parse_config(j);
}

std::unique_ptr<Policy> make_policy(const AlgorithmSpec& spec, std::size_t arms,
                                    std::size_t horizon) {
  const json& p = spec.params;
  try {
    if (spec.name == "decoupled") {
      return std::make_unique<DecoupledPolicy>(derive_params(
          mu_param(p, arms, horizon), param_or<double>(p, "delta", 0.1), horizon, arms, 1,
          DecoupledVariant::kBasic, param_or<std::size_t>(p, "queries_per_round", 1)));
    }
    if (spec.name == "decoupled_switching") {
      return std::make_unique<DecoupledPolicy>(derive_params(
          mu_param(p, arms, horizon), param_or<double>(p, "delta", 0.1), horizon, arms,
          param_or<std::size_t>(p, "segments", 2), DecoupledVariant::kSwitching,
          param_or<std::size_t>(p, "queries_per_round", 1)));
    }
    if (spec.name == "decoupled_doubling") {
      DoublingOptions o;
      const std::string variant = param_or<std::string>(p, "variant", "basic");
      if (variant == "basic") {
        o.variant = DecoupledVariant::kBasic;
      } else if (variant == "switching") {
        o.variant = DecoupledVariant::kSwitching;
      } else {
        throw SpecError("decoupled_doubling variant must be 'basic' or 'switching'");
      }
      o.initial_v = param_or<double>(p, "initial_v", 1.0);
      o.delta = param_or<double>(p, "delta", 0.1);
      o.horizon = horizon;
      o.arms = arms;
      o.segments = param_or<std::size_t>(
          p, "segments", o.variant == DecoupledVariant::kBasic ? 1 : 2);
      o.queries_per_round = param_or<std::size_t>(p, "queries_per_round", 1);
      return std::make_unique<DoublingPolicy>(o);
    }
    if (spec.name == "exp3") {
      return std::make_unique<Exp3Policy>(arms, horizon, param_or<double>(p, "gamma", 0.0));
    }
    if (spec.name == "exp3p") {
      return std::make_unique<Exp3PPolicy>(arms, horizon, param_or<double>(p, "delta", 0.1));
    }
    if (spec.name == "round_robin") return std::make_unique<RoundRobinPolicy>(arms);
    if (spec.name == "greedy_decoupled") return std::make_unique<GreedyDecoupledPolicy>(arms);
  } catch (const json::exception& e) {
    throw SpecError("parameters of '" + spec.label + "': " + e.what());
  }
  throw SpecError("unknown algorithm '" + spec.name + "'");
}

Trajectory run_policy(Policy& policy, const GroundTruth& gt, Rng& rng) {
  const std::size_t T = gt.matrix.horizon();
  if (policy.arms() != gt.matrix.arms()) {
    throw SpecError("policy has " + std::to_string(policy.arms()) + " arms, environment " +
                    std::to_string(gt.matrix.arms()));
  }
  Trajectory traj;
  traj.choices.reserve(T);
  traj.queries.reserve(T);
  traj.rewards_accrued.reserve(T);
  traj.half_norms.reserve(T);
  for (std::size_t t = 1; t <= T; ++t) {
    const QueryOracle oracle = [&gt, t](std::size_t arm) { return query_oracle(gt, t, arm); };
    StepRecord rec = policy.step(oracle, rng);
    traj.choices.push_back(rec.chosen);
    traj.rewards_accrued.push_back(query_oracle(gt, t, rec.chosen));
    traj.queries.push_back(std::move(rec.queried));
    traj.half_norms.push_back(rec.half_norm);
  }
  traj.restarts = policy.restarts();
  return traj;
}

std::vector<double> AlgorithmResult::final_average_rewards() const {
  std::vector<double> out;
  for (const auto& r : repetitions) out.push_back(r.average_reward.back());
  return out;
}

std::vector<double> AlgorithmResult::static_regrets() const {
  std::vector<double> out;
  for (const auto& r : repetitions) out.push_back(r.regret.static_regret);
  return out;
}

std::vector<double> AlgorithmResult::switching_regrets(std::size_t segments) const {
  std::vector<double> out;
  for (const auto& r : repetitions) out.push_back(r.regret.switching_regret.at(segments));
  return out;
}

const AlgorithmResult& RunResult::by_label(const std::string& label) const {
  for (const auto& a : algorithms) {
    if (a.spec.label == label) return a;
  }
  throw SpecError("no algorithm labelled '" + label + "'");
}

RunResult run_experiment(const ExperimentConfig& config) {
  RunResult result;
  const std::size_t reps = config.repetitions;

  auto env_spec_for = [&](std::size_t rep) {
    EnvSpec s = config.env;
    if (config.redraw_env_per_repetition) {
      s.seed = derive_seed(config.base_seed, "env", rep);
    } else if (!config.env_seed_given) {
      s.seed = derive_seed(config.base_seed, "env", 0);
    }
    return s;
  };
  const std::size_t env_count = config.redraw_env_per_repetition ? reps : 1;
  for (std::size_t r = 0; r < env_count; ++r) result.environments.push_back(generate(env_spec_for(r)));

  result.regret_segments = config.regret_segments;
  if (result.regret_segments.empty()) {
    result.regret_segments.push_back(1);
    const std::size_t epochs = result.environments.front().best_arm_schedule.size();
    if (!config.redraw_env_per_repetition && epochs > 1) {
      result.regret_segments.push_back(epochs);
    }
  }

  const std::size_t k = config.env.arms;
  const std::size_t T = config.env.horizon;
  for (const AlgorithmSpec& spec : config.algorithms) {
    AlgorithmResult a;
    a.spec = spec;
    try {
      make_policy(spec, k, T);
      a.repetitions.resize(reps);
    } catch (const std::invalid_argument& e) {
      a.error = e.what();
    }
    result.algorithms.push_back(std::move(a));
  }

  struct Task {
    std::size_t algo;
    std::size_t rep;
  };
  std::vector<Task> tasks;
  for (std::size_t a = 0; a < result.algorithms.size(); ++a) {
    if (result.algorithms[a].error) continue;
    for (std::size_t r = 0; r < reps; ++r) tasks.push_back({a, r});
  }

  auto run_task = [&](const Task& task) {
    AlgorithmResult& a = result.algorithms[task.algo];
    RepetitionOutcome& out = a.repetitions[task.rep];
    const GroundTruth& gt = result.environments[config.redraw_env_per_repetition ? task.rep : 0];
    const auto started = std::chrono::steady_clock::now();

    out.seed = derive_seed(config.base_seed, a.spec.label, task.rep);
    Rng rng(out.seed);
    auto policy = make_policy(a.spec, k, T);
    Trajectory traj = run_policy(*policy, gt, rng);

    out.average_reward.resize(T);
    double cumulative = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      cumulative += traj.rewards_accrued[t];
      out.average_reward[t] = cumulative / static_cast<double>(t + 1);
    }
    out.half_norms = traj.half_norms;
    out.regret = regret_report(gt.matrix, traj, result.regret_segments);
    out.restarts = traj.restarts;
    if (task.rep == 0 || config.emit.trajectories) out.trajectory = std::move(traj);
    out.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  };

  const std::size_t workers = std::min(config.threads, std::max<std::size_t>(1, tasks.size()));
  if (workers <= 1) {
    for (const Task& t : tasks) run_task(t);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
          try {
            for (std::size_t i = next++; i < tasks.size(); i = next++) run_task(tasks[i]);
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
    }
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  for (AlgorithmResult& a : result.algorithms) {
    if (a.error) continue;
    a.average_reward_curve.resize(T);
    a.half_norm_curve.resize(T);
    std::vector<double> column(reps);
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t r = 0; r < reps; ++r) column[r] = a.repetitions[r].average_reward[t];
      a.average_reward_curve[t] = mean_std(column);
      for (std::size_t r = 0; r < reps; ++r) column[r] = a.repetitions[r].half_norms[t];
      a.half_norm_curve[t] = mean_std(column);
    }
    if (!config.half_norm_thresholds.empty()) {
      std::vector<Trajectory> norms(reps);
      for (std::size_t r = 0; r < reps; ++r) norms[r].half_norms = a.repetitions[r].half_norms;
      for (double v : config.half_norm_thresholds) a.empirical_P[v] = empirical_P(norms, v);
    }
  }
  return result;
}

void write_outputs(const ExperimentConfig& config, const RunResult& result) {
  namespace fs = std::filesystem;
  const fs::path& dir = config.output_dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string());

  const GroundTruth& gt = result.environments.front();
  if (config.emit.env) save_ground_truth(gt, dir / "env.csv");
  if (config.emit.reward_curves) {
    write_curves(result.algorithms, &AlgorithmResult::average_reward_curve,
                 dir / "reward_curves.csv");
  }
  if (config.emit.half_norms) {
    write_curves(result.algorithms, &AlgorithmResult::half_norm_curve, dir / "half_norms.csv");
  }
  if (config.emit.count_curves) {
    for (const AlgorithmResult& a : result.algorithms) {
      if (a.error) continue;
      write_count_curves_csv(count_curves(*a.repetitions.front().trajectory, config.env.arms),
                             dir / ("counts_" + a.spec.label + ".csv"));
    }
  }
  if (config.emit.trajectories) {
    fs::create_directories(dir / "trajectories", ec);
    if (ec) throw std::runtime_error("cannot create " + (dir / "trajectories").string());
    for (const AlgorithmResult& a : result.algorithms) {
      if (a.error) continue;
      for (std::size_t r = 0; r < a.repetitions.size(); ++r) {
        write_trajectory_csv(*a.repetitions[r].trajectory,
                             dir / "trajectories" /
                                 ("traj_" + a.spec.label + "_r" + std::to_string(r) + ".csv"));
      }
    }
  }

  json regret = {{"schema_version", kSchemaVersion}, {"algorithms", json::object()}};
  json summary = {{"schema_version", kSchemaVersion},
                  {"environment", metadata_to_json(gt)},
                  {"repetitions", config.repetitions},
                  {"base_seed", config.base_seed},
                  {"redraw_env_per_repetition", config.redraw_env_per_repetition},
                  {"regret_segments", result.regret_segments},
                  {"algorithms", json::object()}};
  json timing = {{"algorithms", json::object()}};
  for (const AlgorithmResult& a : result.algorithms) {
    json s = {{"name", a.spec.name}, {"params", a.spec.params}};
    if (a.error) {
      s["error"] = *a.error;
      summary["algorithms"][a.spec.label] = std::move(s);
      continue;
    }
    const auto finals = a.final_average_rewards();
    const MeanStd fin = mean_std(finals);
    s["final_average_reward"] = mean_std_json(fin);
    s["final_average_reward_raw"] = mean_std_json({fin.mean * gt.raw_scale, fin.std * gt.raw_scale});
    s["static_regret"] = mean_std_json(mean_std(a.static_regrets()));
    json sw = json::object();
    for (std::size_t S : result.regret_segments) {
      sw[std::to_string(S)] = mean_std_json(mean_std(a.switching_regrets(S)));
    }
    s["switching_regret"] = std::move(sw);
    json restarts = json::array();
    for (const auto& r : a.repetitions) restarts.push_back(r.restarts);
    s["restarts"] = std::move(restarts);
    json ep = json::object();
    for (const auto& [v, prob] : a.empirical_P) ep[format_real(v)] = prob;
    s["empirical_P"] = std::move(ep);
    summary["algorithms"][a.spec.label] = std::move(s);

    json reports = json::array();
    for (const auto& r : a.repetitions) reports.push_back(to_json(r.regret));
    regret["algorithms"][a.spec.label] = {{"name", a.spec.name}, {"reports", std::move(reports)}};

    json secs = json::array();
    for (const auto& r : a.repetitions) secs.push_back(r.wall_seconds);
    timing["algorithms"][a.spec.label] = std::move(secs);
  }
  if (config.emit.regret) write_json(regret, dir / "regret.json");
  write_json(summary, dir / "summary.json");
  if (config.emit.timing) write_json(timing, dir / "timing.json");
}

}  // namespace dmab
