#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "dmab/errors.hpp"
#include "dmab/runner.hpp"

using namespace dmab;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::vector<std::string> lines_for(const fs::path& curves, const std::string& label) {
  std::ifstream in(curves);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find(',');
    const auto second = line.find(',', first + 1);
    if (line.substr(first + 1, second - first - 1) == label) out.push_back(line);
  }
  return out;
}

json base_config(const fs::path& out) {
  return {{"schema_version", 1},
          {"env", {{"variant", "uwb"}, {"k", 5}, {"T", 2000}, {"seed", 11}}},
          {"algorithms",
           {"decoupled", "exp3", {{"name", "exp3p"}, {"label", "e3p"}, {"params", {{"delta", 0.05}}}},
            "round_robin", "greedy_decoupled"}},
          {"repetitions", 4},
          {"base_seed", 2},
          {"emit", {{"trajectories", true}}},
          {"output_dir", out.string()}};
}

fs::path tmp(const std::string& name) {
  const fs::path p = fs::path(DMAB_TEST_TMPDIR) / "runner" / name;
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("config validation") {
  const json good = base_config(tmp("unused"));
  CHECK_NOTHROW(parse_config(good));

  json j = good;
  j["algorithms"].push_back("ucb");
  CHECK_THROWS_AS(parse_config(j), SpecError);

  j = good;
  j["surprise"] = 1;
  CHECK_THROWS_AS(parse_config(j), SpecError);

  j = good;
  j["schema_version"] = 2;
  CHECK_THROWS_AS(parse_config(j), SpecError);

  j = good;
  j["algorithms"] = json::array({{{"name", "exp3"}, {"params", {{"eta", 0.1}}}}});
  CHECK_THROWS_AS(parse_config(j), SpecError);

  j = good;
  j["algorithms"] = json::array({"exp3", "exp3"});
  CHECK_THROWS_AS(parse_config(j), SpecError);

  j = good;
  j["algorithms"] = json::array({{{"name", "exp3"}, {"label", "bad label"}}});
  CHECK_THROWS_AS(parse_config(j), SpecError);

  j = good;
  j["emit"] = {{"pictures", true}};
  CHECK_THROWS_AS(parse_config(j), SpecError);

  j = good;
  j["algorithms"] = json::array({{{"name", "decoupled"}, {"params", {{"mu", "big"}}}}});
  CHECK_THROWS_AS(parse_config(j), SpecError);

  CHECK_THROWS_AS(load_config(tmp("nothing") / "missing.json"), SpecError);
}

TEST_CASE("seed derivation") {
  CHECK(derive_seed(1, "exp3", 0) == derive_seed(1, "exp3", 0));
  CHECK(derive_seed(1, "exp3", 0) != derive_seed(1, "exp3", 1));
  CHECK(derive_seed(1, "exp3", 0) != derive_seed(1, "exp3p", 0));
  CHECK(derive_seed(1, "exp3", 0) != derive_seed(2, "exp3", 0));
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("reruns are byte-identical and thread-count independent") {
  const fs::path a = tmp("rerun_a"), b = tmp("rerun_b");
  ExperimentConfig ca = parse_config(base_config(a));
  ExperimentConfig cb = parse_config(base_config(b));
  cb.threads = 4;
  write_outputs(ca, run_experiment(ca));
  write_outputs(cb, run_experiment(cb));
  std::size_t compared = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), a);
    REQUIRE(fs::exists(b / rel));
    CHECK_MESSAGE(slurp(e.path()) == slurp(b / rel), rel.string());
    ++compared;
  }
  CHECK(compared >= 10);
  CHECK_FALSE(fs::exists(a / "timing.json"));
}

TEST_CASE("removing an algorithm leaves the others unchanged") {
  const fs::path full = tmp("iso_full"), reduced = tmp("iso_reduced");
  json jr = base_config(reduced);
  jr["algorithms"].erase(1);  // drop exp3
  const ExperimentConfig cf = parse_config(base_config(full));
  const ExperimentConfig cr = parse_config(jr);
  write_outputs(cf, run_experiment(cf));
  write_outputs(cr, run_experiment(cr));
  for (const std::string label : {"decoupled", "e3p", "round_robin", "greedy_decoupled"}) {
    CHECK(slurp(full / ("counts_" + label + ".csv")) == slurp(reduced / ("counts_" + label + ".csv")));
    CHECK(slurp(full / "trajectories" / ("traj_" + label + "_r3.csv")) ==
          slurp(reduced / "trajectories" / ("traj_" + label + "_r3.csv")));
    CHECK(lines_for(full / "reward_curves.csv", label) ==
          lines_for(reduced / "reward_curves.csv", label));
  }
  CHECK_FALSE(fs::exists(reduced / "counts_exp3.csv"));
}

TEST_CASE("average reward curve is cumulative reward over t") {
  const ExperimentConfig cfg = parse_config(base_config(tmp("curve")));
  const RunResult r = run_experiment(cfg);
  const GroundTruth& gt = r.environments.front();
  for (const auto& a : r.algorithms) {
    for (const auto& rep : a.repetitions) {
      REQUIRE(rep.trajectory.has_value());
      double cum = 0.0;
      for (std::size_t t = 0; t < gt.matrix.horizon(); ++t) {
        cum += gt.matrix.at(rep.trajectory->choices[t], t);
        CHECK(std::abs(rep.average_reward[t] - cum / static_cast<double>(t + 1)) <= 1e-9);
      }
    }
    for (std::size_t t = 0; t < gt.matrix.horizon(); t += 97) {
      double mean = 0.0;
      for (const auto& rep : a.repetitions) mean += rep.average_reward[t];
      mean /= static_cast<double>(a.repetitions.size());
      CHECK(a.average_reward_curve[t].mean == doctest::Approx(mean).epsilon(1e-12));
    }
  }
}

TEST_CASE("infeasible parameters fail only that algorithm") {
  json j = base_config(tmp("infeasible"));
  j["env"]["T"] = 100;
  j["env"]["k"] = 10;
  j["algorithms"] = json::array({{{"name", "decoupled"}, {"params", {{"mu", 1.0}}}}, "exp3"});
  const ExperimentConfig cfg = parse_config(j);
  const RunResult r = run_experiment(cfg);
  REQUIRE(r.by_label("decoupled").error.has_value());
  CHECK(r.by_label("decoupled").error->find("horizon too small") != std::string::npos);
  CHECK_FALSE(r.by_label("exp3").error.has_value());
  CHECK(r.by_label("exp3").repetitions.size() == 4);
  write_outputs(cfg, r);
  const json summary = json::parse(slurp(cfg.output_dir / "summary.json"));
  CHECK(summary.dump().find("horizon too small") != std::string::npos);
}

TEST_CASE("output files and schemas") {
  json j = base_config(tmp("schemas"));
  j["algorithms"] = json::array({"decoupled_doubling", "decoupled_switching"});
  j["env"] = {{"variant", "thm5_switching"}, {"k", 4}, {"T", 3000}, {"seed", 5}};
  j["half_norm_thresholds"] = json::array({1.5, 3.0});
  j["emit"] = {{"timing", true}};
  const ExperimentConfig cfg = parse_config(j);
  const RunResult r = run_experiment(cfg);
  write_outputs(cfg, r);
  for (const char* f : {"env.csv", "env.json", "reward_curves.csv", "half_norms.csv",
                        "regret.json", "summary.json", "timing.json",
                        "counts_decoupled_doubling.csv"}) {
    CHECK_MESSAGE(fs::exists(cfg.output_dir / f), f);
  }
  CHECK_FALSE(fs::exists(cfg.output_dir / "trajectories"));
  std::ifstream curves(cfg.output_dir / "reward_curves.csv");
  std::string header;
  std::getline(curves, header);
  CHECK(header == "t,algo,mean,std");
  const json env = json::parse(slurp(cfg.output_dir / "env.json"));
  CHECK(env.at("schema_version") == 1);
  CHECK(env.at("k") == 4);
  CHECK(env.at("T") == 3000);
  CHECK(env.contains("switch_times"));
  CHECK(env.contains("best_arm_schedule"));
  const json summary = json::parse(slurp(cfg.output_dir / "summary.json"));
  CHECK(summary.dump().find("empirical_P") != std::string::npos);
  for (const auto& a : r.algorithms) {
    CHECK_FALSE(a.error.has_value());
    CHECK(a.empirical_P.size() == 2);
    CHECK(a.empirical_P.at(1.5) >= a.empirical_P.at(3.0));
  }
  // Segment counts default to {1} plus the epoch count when the env switches.
  const std::size_t epochs = r.environments.front().best_arm_schedule.size();
  CHECK(r.regret_segments.front() == 1);
  CHECK(r.regret_segments.size() == (epochs > 1 ? 2u : 1u));
}
