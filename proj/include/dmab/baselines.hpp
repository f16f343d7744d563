#pragma once

#include <cstddef>
#include <vector>

#include "dmab/core.hpp"
#include "dmab/policy.hpp"

namespace dmab {

// Standard (coupled) EXP3 of Auer, Cesa-Bianchi, Freund and Schapire (2002)
// tuned for a known horizon T, taking g = T as the bound on the best arm's
// total reward:
//   gamma = min{1, sqrt(k ln k / ((e - 1) T))}
//   p_i   = (1 - gamma) w_i / sum(w) + gamma / k
//   w_i  <- w_i exp(gamma * x_i / (p_i k))   for the chosen arm only
// Only the chosen arm's reward is observed.
class Exp3Policy final : public Policy {
 public:
  // gamma <= 0 selects the horizon tuning above.
  Exp3Policy(std::size_t arms, std::size_t horizon, double gamma = 0.0);

  std::size_t arms() const override { return arms_; }
  StepRecord step(const QueryOracle& query, Rng& rng) override;

  double gamma() const { return gamma_; }
  // Current action distribution; requires k >= 2.
  ProbVector distribution() const;

 private:
  std::size_t arms_;
  double gamma_;
  std::vector<double> log_weights_;
};

// EXP3.P (same reference, Theorem 3.2 tuning), for regret bounds holding
// with probability 1 - delta:
//   alpha = 2 sqrt(ln(k T / delta))
//   gamma = min{3/5, 2 sqrt((3/5) k ln k / T)}
//   w_i(1) = exp(alpha * gamma / 3 * sqrt(T / k))
//   x^_i = x_i / p_i if chosen, else 0
//   w_i <- w_i exp(gamma / (3k) * (x^_i + alpha / (p_i sqrt(k T))))  for all i
class Exp3PPolicy final : public Policy {
 public:
  Exp3PPolicy(std::size_t arms, std::size_t horizon, double delta = 0.1);

  std::size_t arms() const override { return arms_; }
  StepRecord step(const QueryOracle& query, Rng& rng) override;

  double alpha() const { return alpha_; }
  double gamma() const { return gamma_; }
  ProbVector distribution() const;

 private:
  std::size_t arms_;
  std::size_t horizon_;
  double alpha_;
  double gamma_;
  std::vector<double> log_weights_;
};

// Plays arm t mod k. Observes the played arm like any coupled learner but
// ignores it.
class RoundRobinPolicy final : public Policy {
 public:
  explicit RoundRobinPolicy(std::size_t arms) : arms_(arms) {}

  std::size_t arms() const override { return arms_; }
  StepRecord step(const QueryOracle& query, Rng& rng) override;

 private:
  std::size_t arms_;
  std::size_t round_ = 0;
};

// Decoupled learner with a fixed query schedule: queries arm t mod k, plays
// the arm with the highest empirical mean of its queried rewards (never
// queried counts as 0, ties to the lowest index).
class GreedyDecoupledPolicy final : public Policy {
 public:
  explicit GreedyDecoupledPolicy(std::size_t arms);

  std::size_t arms() const override { return arms_; }
  StepRecord step(const QueryOracle& query, Rng& rng) override;

  double empirical_mean(std::size_t arm) const;

 private:
  std::size_t arms_;
  std::size_t round_ = 0;
  std::vector<double> reward_sums_;
  std::vector<std::size_t> query_counts_;
};

}  // namespace dmab
