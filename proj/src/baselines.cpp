#include "dmab/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "dmab/errors.hpp"

namespace dmab {

namespace {

double checked_reward(double r) {
  if (!(r >= 0.0 && r <= 1.0)) {
    throw DomainError("reward " + std::to_string(r) + " outside [0,1]");
  }
  return r;
}

ProbVector mixed_distribution(const std::vector<double>& log_weights, double gamma) {
  const std::size_t k = log_weights.size();
  const double m = *std::max_element(log_weights.begin(), log_weights.end());
  std::vector<double> p(k);
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    p[i] = std::exp(log_weights[i] - m);
    total += p[i];
  }
  for (double& pi : p) pi = (1.0 - gamma) * (pi / total) + gamma / static_cast<double>(k);
  return ProbVector(std::move(p));
}

void validate_arms(std::size_t arms) {
  if (arms < 1) throw SpecError("need at least one arm");
}

}  // namespace

// -- Exp3 ---------------------------------------------------------------------

Exp3Policy::Exp3Policy(std::size_t arms, std::size_t horizon, double gamma)
    : arms_(arms), gamma_(gamma), log_weights_(arms, 0.0) {
  validate_arms(arms);
  if (horizon < 1) throw SpecError("horizon must be at least 1");
  if (gamma_ <= 0.0) {
    const auto k = static_cast<double>(arms);
    gamma_ = std::min(1.0, std::sqrt(k * std::log(k) /
                                     ((std::numbers::e - 1.0) * static_cast<double>(horizon))));
  }
  if (gamma_ > 1.0) throw SpecError("EXP3 gamma must be in (0, 1]");
}

ProbVector Exp3Policy::distribution() const {
  return mixed_distribution(log_weights_, gamma_);
}

StepRecord Exp3Policy::step(const QueryOracle& query, Rng& rng) {
  if (arms_ == 1) {
    checked_reward(query(0));
    return StepRecord{0, {0}, 1.0};
  }
  const ProbVector p = distribution();
  const std::size_t i = sample_categorical(p, rng);
  const double x = checked_reward(query(i));
  log_weights_[i] += gamma_ * (x / p[i]) / static_cast<double>(arms_);
  const double m = *std::max_element(log_weights_.begin(), log_weights_.end());
  for (double& lw : log_weights_) lw -= m;
  return StepRecord{i, {i}, half_norm(p)};
}

// -- Exp3.P -------------------------------------------------------------------

Exp3PPolicy::Exp3PPolicy(std::size_t arms, std::size_t horizon, double delta)
    : arms_(arms), horizon_(horizon) {
  validate_arms(arms);
  if (horizon < 1) throw SpecError("horizon must be at least 1");
  if (!(delta > 0.0 && delta < 1.0)) throw SpecError("EXP3.P delta must be in (0, 1)");
  const auto k = static_cast<double>(arms);
  const auto t = static_cast<double>(horizon);
  alpha_ = 2.0 * std::sqrt(std::log(k * t / delta));
  gamma_ = std::min(0.6, 2.0 * std::sqrt(0.6 * k * std::log(k) / t));
  // Equal initial weights; their common value only matters up to scale.
  log_weights_.assign(arms, alpha_ * gamma_ / 3.0 * std::sqrt(t / k));
}

ProbVector Exp3PPolicy::distribution() const {
  return mixed_distribution(log_weights_, gamma_);
}

StepRecord Exp3PPolicy::step(const QueryOracle& query, Rng& rng) {
  if (arms_ == 1) {
    checked_reward(query(0));
    return StepRecord{0, {0}, 1.0};
  }
  const ProbVector p = distribution();
  const std::size_t i = sample_categorical(p, rng);
  const double x = checked_reward(query(i));
  const auto k = static_cast<double>(arms_);
  const double bonus_scale = alpha_ / std::sqrt(k * static_cast<double>(horizon_));
  const double rate = gamma_ / (3.0 * k);
  for (std::size_t j = 0; j < arms_; ++j) {
    const double estimate = j == i ? x / p[j] : 0.0;
    log_weights_[j] += rate * (estimate + bonus_scale / p[j]);
  }
  const double m = *std::max_element(log_weights_.begin(), log_weights_.end());
  for (double& lw : log_weights_) lw -= m;
  return StepRecord{i, {i}, half_norm(p)};
}

// -- Round robin --------------------------------------------------------------

StepRecord RoundRobinPolicy::step(const QueryOracle&, Rng&) {
  const std::size_t arm = round_ % arms_;
  ++round_;
  return StepRecord{arm, {arm}, 1.0};
}

// -- Greedy decoupled ---------------------------------------------------------

GreedyDecoupledPolicy::GreedyDecoupledPolicy(std::size_t arms)
    : arms_(arms), reward_sums_(arms, 0.0), query_counts_(arms, 0) {
  validate_arms(arms);
}

double GreedyDecoupledPolicy::empirical_mean(std::size_t arm) const {
  return query_counts_[arm] == 0
             ? 0.0
             : reward_sums_[arm] / static_cast<double>(query_counts_[arm]);
}

StepRecord GreedyDecoupledPolicy::step(const QueryOracle& query, Rng&) {
  std::size_t best = 0;
  double best_mean = empirical_mean(0);
  for (std::size_t i = 1; i < arms_; ++i) {
    const double m = empirical_mean(i);
    if (m > best_mean) {
      best = i;
      best_mean = m;
    }
  }
  const std::size_t queried = round_ % arms_;
  reward_sums_[queried] += checked_reward(query(queried));
  ++query_counts_[queried];
  ++round_;
  return StepRecord{best, {queried}, 1.0};
}

}  // namespace dmab
