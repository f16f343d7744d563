#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "dmab/environments.hpp"
#include "dmab/metrics.hpp"
#include "dmab/policy.hpp"

namespace dmab {

// Registered learner names.
inline const std::vector<std::string> kAlgorithmNames = {
    "decoupled", "decoupled_switching", "decoupled_doubling", "exp3",
    "exp3p",     "round_robin",         "greedy_decoupled"};

struct AlgorithmSpec {
  std::string label;  // unique per config; defaults to name
  std::string name;
  nlohmann::json params = nlohmann::json::object();
};

struct EmitFlags {
  bool env = true;
  bool reward_curves = true;
  bool count_curves = true;
  bool regret = true;
  bool half_norms = true;
  bool trajectories = false;
  bool timing = false;  // wall-clock file; the only non-reproducible output
};

struct ExperimentConfig {
  EnvSpec env;
  bool env_seed_given = false;
  std::vector<AlgorithmSpec> algorithms;
  std::size_t repetitions = 1;
  std::uint64_t base_seed = 0;
  std::filesystem::path output_dir = "out";
  bool redraw_env_per_repetition = false;
  // Segment counts for switching regret; empty means {1} plus the shared
  // environment's epoch count.
  std::vector<std::size_t> regret_segments;
  // Thresholds v for the empirical half-norm exceedance probability.
  std::vector<double> half_norm_thresholds;
  EmitFlags emit;
  std::size_t threads = 1;
};

// Throws SpecError naming the offending field. Every algorithm name and
// parameter key is checked before anything runs.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

// seed = splitmix64(splitmix64(base_seed ^ fnv1a64(label)) + repetition).
// Keyed by label so adding or removing algorithms leaves other seeds alone.
std::uint64_t derive_seed(std::uint64_t base_seed, const std::string& label,
                          std::uint64_t repetition);
std::uint64_t fnv1a64(const std::string& s);

// Throws SpecError for unknown names or parameters, HorizonTooSmall for
// infeasible decoupled parameters.
std::unique_ptr<Policy> make_policy(const AlgorithmSpec& spec, std::size_t arms,
                                    std::size_t horizon);

// Drives the policy for T rounds. The chosen arm's reward accrues from the
// matrix whether or not the policy observed it.
Trajectory run_policy(Policy& policy, const GroundTruth& gt, Rng& rng);

struct RepetitionOutcome {
  std::uint64_t seed = 0;
  std::vector<double> average_reward;  // entry t-1: (sum_{s<=t} g_{i_s}(s)) / t
  std::vector<double> half_norms;
  RegretReport regret;
  std::vector<std::size_t> restarts;
  double wall_seconds = 0.0;
  std::optional<Trajectory> trajectory;  // kept for repetition 0 or on request
};

struct AlgorithmResult {
  AlgorithmSpec spec;
  std::optional<std::string> error;
  std::vector<RepetitionOutcome> repetitions;
  std::vector<MeanStd> average_reward_curve;
  std::vector<MeanStd> half_norm_curve;
  std::map<double, double> empirical_P;

  std::vector<double> final_average_rewards() const;
  std::vector<double> static_regrets() const;
  std::vector<double> switching_regrets(std::size_t segments) const;
};

struct RunResult {
  std::vector<GroundTruth> environments;  // one, or one per repetition
  std::vector<std::size_t> regret_segments;
  std::vector<AlgorithmResult> algorithms;

  const AlgorithmResult& by_label(const std::string& label) const;
};

// Runs every (algorithm, repetition) pair. Repetitions execute on
// config.threads workers; aggregation is ordered by repetition index, so the
// result does not depend on the thread count.
RunResult run_experiment(const ExperimentConfig& config);

// Writes the CSV/JSON files selected by config.emit into config.output_dir.
//   env.csv / env.json          matrix and sidecar metadata (first environment)
//   reward_curves.csv           t,algo,mean,std   (average reward vs time)
//   half_norms.csv              t,algo,mean,std
//   counts_<label>.csv          repetition 0 count curves
//   regret.json, summary.json   per-algorithm reports
//   trajectories/traj_<label>_r<rep>.csv
//   timing.json
// Throws std::runtime_error with the path on I/O failure.
void write_outputs(const ExperimentConfig& config, const RunResult& result);

}  // namespace dmab
