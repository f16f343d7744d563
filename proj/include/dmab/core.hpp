#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace dmab {

inline constexpr double kSimplexTolerance = 1e-9;

// A point on the k-simplex (k >= 2). Immutable once constructed.
class ProbVector {
 public:
  // Validates without rescaling: entries >= 0, |sum - 1| <= 1e-9, size >= 2.
  // Throws DomainError otherwise.
  explicit ProbVector(std::vector<double> entries);

  // Rescales nonnegative weights to sum to one. Throws DomainError when the
  // weights are negative, non-finite, fewer than two, or all zero.
  static ProbVector normalized(std::vector<double> weights);
  static ProbVector uniform(std::size_t k);

  std::size_t size() const { return entries_.size(); }
  double operator[](std::size_t i) const { return entries_[i]; }
  std::span<const double> entries() const { return entries_; }

  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

 private:
  std::vector<double> entries_;
};

// Oblivious adversary's reward table: k arms by T rounds, values in [0,1].
// Columns are 0-based; round t (1-based) lives in column t-1.
class RewardMatrix {
 public:
  RewardMatrix(std::size_t arms, std::size_t horizon);
  // Row-major by arm: values[arm * horizon + col]. Throws DomainError on
  // size mismatch or any value outside [0,1].
  RewardMatrix(std::size_t arms, std::size_t horizon, std::vector<double> values);

  std::size_t arms() const { return arms_; }
  std::size_t horizon() const { return horizon_; }

  double at(std::size_t arm, std::size_t col) const;
  // Unchecked write used by generators; value must already be in [0,1].
  void set(std::size_t arm, std::size_t col, double value) {
    values_[arm * horizon_ + col] = value;
  }
  std::span<const double> row(std::size_t arm) const {
    return {values_.data() + arm * horizon_, horizon_};
  }
  std::span<const double> values() const { return values_; }

  friend bool operator==(const RewardMatrix&, const RewardMatrix&) = default;

 private:
  std::size_t arms_;
  std::size_t horizon_;
  std::vector<double> values_;
};

// Seeded generator: xoshiro256** with state expanded from the 64-bit seed by
// SplitMix64. All derived draws (uniform, normal, exponential, integer) are
// implemented here so sequences do not depend on the standard library.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();
  result_type operator()() { return next_u64(); }
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  // Uniform on [0,1) with 53 bits of resolution.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer on [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);
  bool bernoulli(double p) { return uniform() < p; }
  // Box-Muller, one pair of uniforms per call (no cached second variate).
  double normal(double mean, double stddev);
  double exponential(double rate);

 private:
  std::uint64_t s_[4];
};

// SplitMix64 finalizer; also used for seed derivation.
std::uint64_t splitmix64(std::uint64_t x);

// (sum_j sqrt(p_j))^2, in [1, k].
double half_norm(const ProbVector& p);

// q_j = sqrt(p_j) / sum_l sqrt(p_l). Throws DomainError if any p_j == 0.
ProbVector query_distribution(const ProbVector& p);

// Inverse-CDF draw. Rounding residue goes to the last arm with positive mass.
std::size_t sample_categorical(const ProbVector& p, Rng& rng);

}  // namespace dmab
