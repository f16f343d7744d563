#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace dmab {

// Input violates a mathematical precondition (off-simplex vector, reward
// outside [0,1], index out of range).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// An environment or experiment description is inconsistent.
class SpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Derived learning-rate parameters are infeasible for the requested horizon.
class HorizonTooSmall : public std::invalid_argument {
 public:
  HorizonTooSmall(const std::string& what, std::uint64_t min_horizon)
      : std::invalid_argument(what), min_horizon_(min_horizon) {}

  // Smallest horizon for which the same (mu, delta, k, S) is admissible.
  std::uint64_t min_horizon() const { return min_horizon_; }

 private:
  std::uint64_t min_horizon_;
};

// A learner was stepped past its horizon.
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Environment generation gave up (e.g. rejection sampling cap reached).
class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dmab
