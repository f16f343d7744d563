#include "dmab/decoupled.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "dmab/errors.hpp"

namespace dmab {

namespace {

double log_sum_exp(std::span<const double> xs) {
  const double m = *std::max_element(xs.begin(), xs.end());
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

double log_add_exp(double a, double b) {
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

void shift_to_zero_max(std::vector<double>& log_weights) {
  const double m = *std::max_element(log_weights.begin(), log_weights.end());
  for (double& lw : log_weights) lw -= m;
}

template <typename Update>
RoundDecision run_round(LearnerState& state, const QueryOracle& query, Rng& rng,
                        Update&& update) {
  const DecoupledParams& params = state.params;
  if (state.round >= params.horizon) {
    throw StateError("learner stepped past its horizon T = " +
                     std::to_string(params.horizon));
  }

  ProbVector p = action_distribution(state);
  ProbVector q = query_distribution(p);

  const std::size_t chosen = sample_categorical(p, rng);
  std::vector<std::size_t> queried(params.queries_per_round);
  for (auto& j : queried) j = sample_categorical(q, rng);

  std::vector<Observation> observed;
  observed.reserve(queried.size());
  for (std::size_t j : queried) observed.push_back({j, query(j)});

  const std::vector<double> estimates =
      estimate_rewards(observed, q, params.beta, params.queries_per_round);
  update(state.log_weights, estimates);
  shift_to_zero_max(state.log_weights);

  ++state.round;
  state.cumulative_half_norm += half_norm(p);
  return RoundDecision{chosen, std::move(queried), std::move(p), std::move(q)};
}

void multiplicative_update(std::vector<double>& log_weights,
                           std::span<const double> estimates, double eta) {
  for (std::size_t j = 0; j < log_weights.size(); ++j) {
    log_weights[j] += eta * estimates[j];
  }
}

}  // namespace

LearnerState LearnerState::fresh(const DecoupledParams& params) {
  LearnerState s;
  s.params = params;
  s.log_weights.assign(params.arms, 0.0);
  return s;
}

ProbVector action_distribution(const LearnerState& state) {
  const std::size_t k = state.log_weights.size();
  const double gamma = state.params.gamma;
  const double m = *std::max_element(state.log_weights.begin(), state.log_weights.end());
  std::vector<double> p(k);
  double total = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    p[j] = std::exp(state.log_weights[j] - m);
    total += p[j];
  }
  const double floor = gamma / static_cast<double>(k);
  for (double& pj : p) pj = (1.0 - gamma) * (pj / total) + floor;
  return ProbVector(std::move(p));
}

std::vector<double> estimate_rewards(std::span<const Observation> observed,
                                     const ProbVector& q, double beta,
                                     std::size_t queries_per_round) {
  const std::size_t k = q.size();
  // Sum of observed rewards per arm; repeated draws of one arm in the same
  // round see the same reward, so this equals n_j * g_j.
  std::vector<double> observed_mass(k, 0.0);
  for (const Observation& o : observed) {
    if (o.arm >= k) {
      throw DomainError("queried arm " + std::to_string(o.arm) + " out of range");
    }
    if (!(o.reward >= 0.0 && o.reward <= 1.0)) {
      throw DomainError("queried reward " + std::to_string(o.reward) + " outside [0,1]");
    }
    observed_mass[o.arm] += o.reward;
  }
  const auto c = static_cast<double>(queries_per_round);
  std::vector<double> estimates(k);
  for (std::size_t j = 0; j < k; ++j) {
    estimates[j] = (observed_mass[j] / c + beta) / q[j];
  }
  return estimates;
}

std::vector<double> share_update(std::span<const double> log_weights,
                                 std::span<const double> estimates, double eta,
                                 double alpha) {
  const std::size_t k = log_weights.size();
  std::vector<double> next(k);
  if (alpha == 0.0) {
    for (std::size_t j = 0; j < k; ++j) next[j] = log_weights[j] + eta * estimates[j];
    return next;
  }
  const double log_share = std::log(std::numbers::e * alpha / static_cast<double>(k)) +
                           log_sum_exp(log_weights);
  for (std::size_t j = 0; j < k; ++j) {
    next[j] = log_add_exp(log_weights[j] + eta * estimates[j], log_share);
  }
  return next;
}

RoundDecision step_algorithm1(LearnerState& state, const QueryOracle& query, Rng& rng) {
  const double eta = state.params.eta;
  return run_round(state, query, rng,
                   [eta](std::vector<double>& lw, std::span<const double> est) {
                     multiplicative_update(lw, est, eta);
                   });
}

RoundDecision step_algorithm2(LearnerState& state, const QueryOracle& query, Rng& rng) {
  const double eta = state.params.eta;
  const double alpha = state.params.alpha;
  return run_round(state, query, rng,
                   [eta, alpha](std::vector<double>& lw, std::span<const double> est) {
                     if (alpha == 0.0) {
                       multiplicative_update(lw, est, eta);
                     } else {
                       lw = share_update(lw, est, eta, alpha);
                     }
                   });
}

StepRecord DecoupledPolicy::step(const QueryOracle& query, Rng& rng) {
  RoundDecision d = state_.params.variant == DecoupledVariant::kBasic
                        ? step_algorithm1(state_, query, rng)
                        : step_algorithm2(state_, query, rng);
  return StepRecord{d.chosen, std::move(d.queried), half_norm(d.action_dist)};
}

DoublingPolicy::DoublingPolicy(const DoublingOptions& options)
    : options_(options),
      v_(options.initial_v),
      state_(LearnerState::fresh(derive_params(options.initial_v, options.delta,
                                               options.horizon, options.arms,
                                               options.segments, options.variant,
                                               options.queries_per_round))) {}

StepRecord DoublingPolicy::step(const QueryOracle& query, Rng& rng) {
  if (rounds_ >= options_.horizon) {
    throw StateError("doubling learner stepped past its horizon");
  }
  RoundDecision d = options_.variant == DecoupledVariant::kBasic
                        ? step_algorithm1(state_, query, rng)
                        : step_algorithm2(state_, query, rng);
  ++rounds_;
  const auto k = static_cast<double>(options_.arms);
  const double budget = static_cast<double>(options_.horizon) * v_;
  if (v_ < k && state_.cumulative_half_norm > budget && rounds_ < options_.horizon) {
    v_ = std::min(2.0 * v_, k);
    state_ = LearnerState::fresh(derive_params(v_, options_.delta, options_.horizon,
                                               options_.arms, options_.segments,
                                               options_.variant,
                                               options_.queries_per_round));
    restarts_.push_back(rounds_);
  }
  return StepRecord{d.chosen, std::move(d.queried), half_norm(d.action_dist)};
}

}  // namespace dmab
