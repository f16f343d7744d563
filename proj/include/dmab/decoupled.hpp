#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dmab/core.hpp"
#include "dmab/params.hpp"
#include "dmab/policy.hpp"

namespace dmab {

// Mutable core of a decoupled learner. Weights live in the log domain and
// are shifted so the largest is 0 after every update; only ratios matter.
struct LearnerState {
  DecoupledParams params;
  std::vector<double> log_weights;
  std::size_t round = 0;  // completed rounds
  double cumulative_half_norm = 0.0;

  // All weights equal to one.
  static LearnerState fresh(const DecoupledParams& params);
};

struct RoundDecision {
  std::size_t chosen = 0;
  std::vector<std::size_t> queried;
  ProbVector action_dist;
  ProbVector query_dist;
};

struct Observation {
  std::size_t arm;
  double reward;
};

// p_j = (1 - gamma) * w_j / sum(w) + gamma / k.
ProbVector action_distribution(const LearnerState& state);

// g~_j = ((n_j / c) * g_j + beta) / q_j, where n_j counts the draws of arm j
// among the c observations. Throws DomainError for rewards outside [0,1] or
// arms out of range.
std::vector<double> estimate_rewards(std::span<const Observation> observed,
                                     const ProbVector& q, double beta,
                                     std::size_t queries_per_round);

// Switching update in the log domain, without renormalisation:
//   w_j <- w_j * exp(eta * g~_j) + (e * alpha / k) * sum_l w_l
// Sums run over the k arms at the current round.
std::vector<double> share_update(std::span<const double> log_weights,
                                 std::span<const double> estimates, double eta,
                                 double alpha);

// One round of the basic learner: draw i_t ~ p, c draws j ~ q, query only the
// j's, multiplicative update. Throws StateError past the horizon.
RoundDecision step_algorithm1(LearnerState& state, const QueryOracle& query, Rng& rng);
// As step_algorithm1 with the sharing update. With alpha == 0 this is the
// basic update bit for bit.
RoundDecision step_algorithm2(LearnerState& state, const QueryOracle& query, Rng& rng);

class DecoupledPolicy final : public Policy {
 public:
  explicit DecoupledPolicy(const DecoupledParams& params)
      : state_(LearnerState::fresh(params)) {}

  std::size_t arms() const override { return state_.params.arms; }
  StepRecord step(const QueryOracle& query, Rng& rng) override;
  const LearnerState& state() const { return state_; }

 private:
  LearnerState state_;
};

struct DoublingOptions {
  DecoupledVariant variant = DecoupledVariant::kBasic;
  double initial_v = 1.0;
  double delta = 0.1;
  std::size_t horizon = 0;
  std::size_t arms = 0;
  std::size_t segments = 1;
  std::size_t queries_per_round = 1;
};

// Runs the inner learner with mu = v. Once the half-norm sum since the last
// restart exceeds T * v, v doubles (capped at k), parameters are re-derived
// for the full horizon and weights reset to one. The regret ledger is the
// caller's and is not reset.
class DoublingPolicy final : public Policy {
 public:
  explicit DoublingPolicy(const DoublingOptions& options);

  std::size_t arms() const override { return options_.arms; }
  StepRecord step(const QueryOracle& query, Rng& rng) override;
  std::vector<std::size_t> restarts() const override { return restarts_; }

  double current_v() const { return v_; }
  const LearnerState& state() const { return state_; }

 private:
  DoublingOptions options_;
  double v_;
  LearnerState state_;
  std::size_t rounds_ = 0;
  std::vector<std::size_t> restarts_;
};

}  // namespace dmab
