#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dmab/core.hpp"

namespace dmab {

enum class EnvVariant { kIidGap, kThm5Switching, kUwb };

std::string to_string(EnvVariant v);
// Accepts "iid_gap", "thm5_switching", "uwb"; throws SpecError otherwise.
EnvVariant parse_env_variant(const std::string& name);

// Stationary Bernoulli arms where every arm in `good` beats every other arm
// by at least `gap` in mean.
struct IidGapParams {
  std::vector<std::size_t> good{0};
  double gap = 0.3;
  // Per-arm means; when empty, good means are drawn from U[gap, 1] and the
  // rest from U[0, min_good - gap].
  std::vector<double> means;
};

// Gap of the single-shift construction used by gen_thm5_switching.
inline constexpr double kShiftGap = 0.2;

// Channel-selection scenario. Epoch lengths are ceil(Exponential(rate)); in
// each epoch one good channel draws truncated Gaussians with mean in
// [good_mean_lo, good_mean_hi], and every other channel alternates round by
// round between a Uniform(lo, hi) and a truncated Gaussian, all with fresh
// parameters. Raw rewards lie in [0, raw_max] and are stored divided by
// raw_max.
struct UwbParams {
  double switch_rate = 5e-4;
  double raw_max = 6.0;
  double good_mean_lo = 3.0;
  double good_mean_hi = 6.0;
  double noisy_mean_lo = 0.0;
  double noisy_mean_hi = 6.0;
  double std_lo = 0.5;
  double std_hi = 2.0;
};

struct EnvSpec {
  EnvVariant variant = EnvVariant::kIidGap;
  std::size_t arms = 2;
  std::size_t horizon = 1;
  std::uint64_t seed = 0;
  IidGapParams iid_gap;
  UwbParams uwb;
};

struct Epoch {
  std::size_t start = 1;  // first round of the epoch, 1-based
  std::size_t best_arm = 0;
  friend bool operator==(const Epoch&, const Epoch&) = default;
};

struct GroundTruth {
  EnvSpec spec;
  RewardMatrix matrix;
  double raw_scale = 1.0;
  // Rounds (1-based) that start a new epoch; excludes round 1.
  std::vector<std::size_t> switch_times;
  std::vector<Epoch> best_arm_schedule;
};

// Throws SpecError for invalid specs.
void validate(const EnvSpec& spec);

GroundTruth gen_iid_gap(const EnvSpec& spec);
// One shift: arm 0 is Bernoulli(1/2); a random arm a in 1..k-1 moves from
// Bernoulli(1/2 - gap) to Bernoulli(1/2 + gap) after round t0, where
// Pr(t0 = T) = 1/2 and t0 is otherwise uniform on 1..T-1. Other arms stay at
// Bernoulli(1/2 - gap).
GroundTruth gen_thm5_switching(const EnvSpec& spec);
// Throws GenerationError if truncated-Gaussian rejection exceeds 1e6 tries.
GroundTruth gen_uwb(const EnvSpec& spec);
// Dispatches on spec.variant.
GroundTruth generate(const EnvSpec& spec);

// g_arm(t) for round t in [1, T]; pure lookup. Throws DomainError out of range.
double query_oracle(const GroundTruth& gt, std::size_t t, std::size_t arm);

// Mean of a Normal(mean, sd) truncated to [lo, hi].
double truncated_normal_mean(double mean, double sd, double lo, double hi);

// Matrix CSV: header "t,arm_0,...,arm_{k-1}", one row per round, values
// printed with 17 significant digits so reading back is lossless.
void write_matrix_csv(const RewardMatrix& m, const std::filesystem::path& path);
RewardMatrix read_matrix_csv(const std::filesystem::path& path);

// Sidecar metadata for a generated matrix (spec, seed, switch times, best-arm
// schedule, raw scale).
void write_metadata_json(const GroundTruth& gt, const std::filesystem::path& path);

// Writes `csv_path` and its sidecar (same stem, ".json").
void save_ground_truth(const GroundTruth& gt, const std::filesystem::path& csv_path);
GroundTruth load_ground_truth(const std::filesystem::path& csv_path);

std::filesystem::path metadata_path_for(const std::filesystem::path& csv_path);

}  // namespace dmab
