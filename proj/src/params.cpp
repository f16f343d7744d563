#include "dmab/params.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dmab/errors.hpp"

namespace dmab {

namespace {

struct Rates {
  double eta;
  double beta;
  double gamma;
};

Rates rates_for(double mu, double delta, double horizon, double arms,
                double segments, DecoupledVariant variant) {
  Rates r{};
  r.eta = variant == DecoupledVariant::kBasic ? 1.0 / std::sqrt(mu * horizon)
                                              : std::sqrt(segments / (mu * horizon));
  r.beta = 2.0 * r.eta * std::sqrt(6.0 * std::log(3.0 * arms / delta));
  r.gamma = r.eta * r.eta * (1.0 + r.beta) * (1.0 + r.beta) * arms * arms;
  return r;
}

bool feasible(const Rates& r) {
  return r.gamma < 1.0 && (1.0 + r.beta) * (1.0 + r.beta) <= 2.0;
}

// Both conditions are monotone in T (eta shrinks), so bracket and bisect.
std::uint64_t min_feasible_horizon(double mu, double delta, double arms,
                                   double segments, DecoupledVariant variant) {
  auto ok = [&](std::uint64_t t) {
    return feasible(rates_for(mu, delta, static_cast<double>(t), arms, segments, variant));
  };
  std::uint64_t hi = 1;
  while (!ok(hi)) hi *= 2;
  std::uint64_t lo = hi / 2;  // infeasible (or zero)
  while (hi - lo > 1) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    (ok(mid) ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace

DecoupledParams derive_params(double mu, double delta, std::size_t horizon,
                              std::size_t arms, std::size_t segments,
                              DecoupledVariant variant,
                              std::size_t queries_per_round) {
  if (arms < 2) throw SpecError("need at least 2 arms");
  if (horizon < 1) throw SpecError("horizon must be at least 1");
  if (segments < 1) throw SpecError("segment count must be at least 1");
  if (queries_per_round < 1) throw SpecError("queries per round must be at least 1");
  if (!(mu >= 1.0 && mu <= static_cast<double>(arms))) {
    throw SpecError("mu = " + std::to_string(mu) + " outside [1, k]");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw SpecError("delta = " + std::to_string(delta) + " outside (0, 1)");
  }
  if (variant == DecoupledVariant::kBasic && segments != 1) {
    throw SpecError("the basic learner uses a single segment");
  }

  const auto k = static_cast<double>(arms);
  const auto s = static_cast<double>(segments);
  const Rates r = rates_for(mu, delta, static_cast<double>(horizon), k, s, variant);
  if (!feasible(r)) {
    const std::uint64_t min_t = min_feasible_horizon(mu, delta, k, s, variant);
    throw HorizonTooSmall("horizon too small: T = " + std::to_string(horizon) +
                              " gives gamma = " + std::to_string(r.gamma) +
                              ", (1+beta)^2 = " +
                              std::to_string((1 + r.beta) * (1 + r.beta)) +
                              "; minimal admissible T is " + std::to_string(min_t),
                          min_t);
  }

  DecoupledParams p;
  p.variant = variant;
  p.mu = mu;
  p.delta = delta;
  p.horizon = horizon;
  p.arms = arms;
  p.segments = segments;
  p.eta = r.eta;
  p.beta = r.beta;
  p.gamma = r.gamma;
  p.alpha = variant == DecoupledVariant::kSwitching ? 1.0 / static_cast<double>(horizon) : 0.0;
  p.queries_per_round = queries_per_round;
  return p;
}

double select_mu(std::size_t arms, std::size_t horizon) {
  if (arms < 2 || horizon < 2) throw SpecError("select_mu needs k >= 2 and T >= 2");
  const auto k = static_cast<double>(arms);
  const double log_k_t = std::log(static_cast<double>(horizon)) / std::log(k);
  const double exponent = std::min(1.0, std::max(0.0, 4.0 / 3.0 - log_k_t / 3.0));
  return std::clamp(std::pow(k, exponent), 1.0, k);
}

}  // namespace dmab
