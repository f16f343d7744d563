#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "dmab/core.hpp"

namespace dmab {

// Reveals g_arm(t) for the current round. Learners call it only for arms
// they are allowed to observe; the runner accrues the chosen arm's reward
// separately.
using QueryOracle = std::function<double(std::size_t arm)>;

struct StepRecord {
  std::size_t chosen = 0;
  std::vector<std::size_t> queried;
  // ||p(t)||_{1/2} of the action distribution used this round (1 for
  // deterministic choices).
  double half_norm = 1.0;
};

// Common face of every learner the runner can drive for T rounds.
class Policy {
 public:
  virtual ~Policy() = default;

  virtual std::size_t arms() const = 0;
  virtual StepRecord step(const QueryOracle& query, Rng& rng) = 0;
  // Rounds (1-based) after which the learner restarted itself.
  virtual std::vector<std::size_t> restarts() const { return {}; }
};

}  // namespace dmab
