#include "dmab/core.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "dmab/errors.hpp"

namespace dmab {

namespace {

void check_entries(const std::vector<double>& entries) {
  if (entries.size() < 2) {
    throw DomainError("probability vector needs at least 2 entries, got " +
                      std::to_string(entries.size()));
  }
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!std::isfinite(entries[i]) || entries[i] < 0.0) {
      throw DomainError("probability entry " + std::to_string(i) +
                        " is negative or not finite");
    }
  }
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

ProbVector::ProbVector(std::vector<double> entries) : entries_(std::move(entries)) {
  check_entries(entries_);
  const double sum = std::accumulate(entries_.begin(), entries_.end(), 0.0);
  if (std::abs(sum - 1.0) > kSimplexTolerance) {
    throw DomainError("probability vector sums to " + std::to_string(sum));
  }
}

ProbVector ProbVector::normalized(std::vector<double> weights) {
  check_entries(weights);
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(sum > 0.0) || !std::isfinite(sum)) {
    throw DomainError("cannot normalize weights with sum " + std::to_string(sum));
  }
  for (double& w : weights) w /= sum;
  return ProbVector(std::move(weights));
}

ProbVector ProbVector::uniform(std::size_t k) {
  return ProbVector(std::vector<double>(k, 1.0 / static_cast<double>(k)));
}

RewardMatrix::RewardMatrix(std::size_t arms, std::size_t horizon)
    : arms_(arms), horizon_(horizon), values_(arms * horizon, 0.0) {}

RewardMatrix::RewardMatrix(std::size_t arms, std::size_t horizon,
                           std::vector<double> values)
    : arms_(arms), horizon_(horizon), values_(std::move(values)) {
  if (values_.size() != arms_ * horizon_) {
    throw DomainError("reward matrix has " + std::to_string(values_.size()) +
                      " cells, expected " + std::to_string(arms_ * horizon_));
  }
  for (double v : values_) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw DomainError("reward " + std::to_string(v) + " outside [0,1]");
    }
  }
}

double RewardMatrix::at(std::size_t arm, std::size_t col) const {
  if (arm >= arms_ || col >= horizon_) {
    throw DomainError("reward lookup (" + std::to_string(arm) + ", " +
                      std::to_string(col) + ") out of range");
  }
  return values_[arm * horizon_ + col];
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed) {
  std::uint64_t x = seed;
  for (auto& s : s_) {
    s = splitmix64(x);
    x += 0x9e3779b97f4a7c15ULL;
  }
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw DomainError("Rng::below(0)");
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    const std::uint64_t r = next_u64();
    if (r >= threshold) return r % n;
  }
}

double Rng::normal(double mean, double stddev) {
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return mean + stddev * std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

double Rng::exponential(double rate) {
  if (!(rate > 0.0)) throw DomainError("exponential rate must be positive");
  return -std::log1p(-uniform()) / rate;
}

double half_norm(const ProbVector& p) {
  double root_sum = 0.0;
  for (double pj : p) root_sum += std::sqrt(pj);
  return root_sum * root_sum;
}

ProbVector query_distribution(const ProbVector& p) {
  std::vector<double> q(p.size());
  double root_sum = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (p[j] == 0.0) {
      throw DomainError("query distribution undefined: p[" + std::to_string(j) +
                        "] == 0");
    }
    q[j] = std::sqrt(p[j]);
    root_sum += q[j];
  }
  for (double& qj : q) qj /= root_sum;
  return ProbVector(std::move(q));
}

std::size_t sample_categorical(const ProbVector& p, Rng& rng) {
  const double u = rng.uniform();
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    last_positive = i;
    cumulative += p[i];
    if (u < cumulative) return i;
  }
  return last_positive;
}

}  // namespace dmab
