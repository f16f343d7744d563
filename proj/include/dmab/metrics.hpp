#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <vector>

#include "dmab/core.hpp"

namespace dmab {

// What a learner did over T rounds. Entry t-1 describes round t.
struct Trajectory {
  std::vector<std::size_t> choices;
  std::vector<std::vector<std::size_t>> queries;
  std::vector<double> rewards_accrued;
  std::vector<double> half_norms;
  std::vector<std::size_t> restarts;

  std::size_t horizon() const { return choices.size(); }
};

struct Segment {
  std::size_t start = 1;  // first round, 1-based
  std::size_t arm = 0;
  friend bool operator==(const Segment&, const Segment&) = default;
};

struct StaticRegret {
  double regret = 0.0;
  std::size_t best_arm = 0;
};

struct SwitchingRegret {
  double regret = 0.0;
  double comparator = 0.0;
  // Non-empty segments in round order; at most S of them.
  std::vector<Segment> segmentation;
};

struct RegretReport {
  double static_regret = 0.0;
  std::size_t best_fixed_arm = 0;
  std::map<std::size_t, double> switching_regret;
  std::map<std::size_t, std::vector<Segment>> best_segmentation;
};

// Sum of g_{i_t}(t) over the trajectory's choices, accumulated in round order.
double accrued_reward(const RewardMatrix& m, std::span<const std::size_t> choices);

// max_i sum_t g_i(t) - sum_t g_{i_t}(t); best arm ties to the lowest index.
// Throws DomainError when the horizon or arm indices disagree with the matrix.
StaticRegret static_regret(const RewardMatrix& m, const Trajectory& traj);

// Best comparator that splits rounds 1..T into at most S contiguous epochs
// with one arm each, minus the accrued reward. O(S*T*k) dynamic program over
// (segments used, round, arm of current segment). Ties prefer extending the
// current segment backwards and then the lowest arm. Throws DomainError for
// S outside [1, T].
SwitchingRegret switching_regret(const RewardMatrix& m, const Trajectory& traj,
                                 std::size_t segments);

// Value of a given segmentation against the matrix.
double segmentation_value(const RewardMatrix& m, std::span<const Segment> segmentation);

RegretReport regret_report(const RewardMatrix& m, const Trajectory& traj,
                           std::span<const std::size_t> segment_counts);

// Fraction of trajectories whose mean ||p(t)||_{1/2} is strictly above v.
// Throws DomainError on empty input or mismatched horizons.
double empirical_P(std::span<const Trajectory> trajectories, double v);

// Cumulative per-arm counts; entry [arm][t-1] counts rounds 1..t.
struct CountCurves {
  std::vector<std::vector<std::size_t>> chosen;
  std::vector<std::vector<std::size_t>> queried;
};

CountCurves count_curves(const Trajectory& traj, std::size_t arms);

// Columns: t, then choose_arm_i, query_arm_i for each arm i.
void write_count_curves_csv(const CountCurves& curves, const std::filesystem::path& path);

// Per-trajectory CSV with columns t, chosen, queried, reward, half_norm.
// `queried` holds the round's queried arms joined with ';'.
void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path);
// Reads choices, queries and half norms; rewards_accrued is filled from the
// file's reward column.
Trajectory read_trajectory_csv(const std::filesystem::path& path);

// Sample mean and sample standard deviation (n - 1); std is 0 for n < 2.
struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};
MeanStd mean_std(std::span<const double> xs);

}  // namespace dmab
