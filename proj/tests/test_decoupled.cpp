#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "dmab/decoupled.hpp"
#include "dmab/errors.hpp"
#include "oracles.hpp"

using namespace dmab;

namespace {

DecoupledParams manual_params(std::size_t k, std::size_t T, double eta, double beta,
                              double gamma, double alpha = 0.0) {
  DecoupledParams p;
  p.variant = alpha > 0 ? DecoupledVariant::kSwitching : DecoupledVariant::kBasic;
  p.arms = k;
  p.horizon = T;
  p.eta = eta;
  p.beta = beta;
  p.gamma = gamma;
  p.alpha = alpha;
  return p;
}

LearnerState with_weights(const DecoupledParams& params, std::vector<double> weights) {
  LearnerState s = LearnerState::fresh(params);
  for (std::size_t j = 0; j < weights.size(); ++j) s.log_weights[j] = std::log(weights[j]);
  return s;
}

}  // namespace

TEST_CASE("action_distribution") {
  SUBCASE("equal weights give uniform") {
    const auto p = action_distribution(LearnerState::fresh(manual_params(5, 10, 0.1, 0.0, 0.3)));
    for (double x : p) CHECK(x == doctest::Approx(0.2));
  }
  SUBCASE("weights (e, 1) without floor") {
    const auto p = action_distribution(
        with_weights(manual_params(2, 10, 0.1, 0.0, 0.0), {std::numbers::e, 1.0}));
    CHECK(p[0] == doctest::Approx(0.7310585786).epsilon(1e-9));
    CHECK(p[1] == doctest::Approx(0.2689414214).epsilon(1e-9));
  }
  SUBCASE("floor holds") {
    const auto p =
        action_distribution(with_weights(manual_params(2, 10, 0.1, 0.0, 0.01), {1e6, 1.0}));
    CHECK(p[1] >= 0.005);
  }
}

TEST_CASE("estimate_rewards") {
  const ProbVector half = ProbVector::uniform(2);
  SUBCASE("no bonus") {
    const Observation o{0, 0.5};
    const auto g = estimate_rewards(std::span(&o, 1), half, 0.0, 1);
    CHECK(g[0] == doctest::Approx(1.0));
    CHECK(g[1] == 0.0);
  }
  SUBCASE("with bonus") {
    const Observation o{1, 1.0};
    const auto g = estimate_rewards(std::span(&o, 1), half, 0.1, 1);
    CHECK(g[0] == doctest::Approx(0.2));
    CHECK(g[1] == doctest::Approx(2.2));
  }
  SUBCASE("unqueried arms get beta / q") {
    const ProbVector q({0.5, 0.3, 0.2});
    const Observation o{0, 0.7};
    const auto g = estimate_rewards(std::span(&o, 1), q, 0.05, 1);
    CHECK(g[1] == doctest::Approx(0.05 / 0.3));
    CHECK(g[2] == doctest::Approx(0.05 / 0.2));
  }
  SUBCASE("several queries average the indicator") {
    const std::vector<Observation> obs = {{0, 0.6}, {0, 0.6}, {1, 0.3}};
    const auto g = estimate_rewards(obs, half, 0.0, 3);
    CHECK(g[0] == doctest::Approx(0.8));
    CHECK(g[1] == doctest::Approx(0.2));
  }
  SUBCASE("invalid observations") {
    const Observation bad_reward{0, 1.5};
    CHECK_THROWS_AS(estimate_rewards(std::span(&bad_reward, 1), half, 0.0, 1), DomainError);
    const Observation bad_arm{2, 0.5};
    CHECK_THROWS_AS(estimate_rewards(std::span(&bad_arm, 1), half, 0.0, 1), DomainError);
  }
}

TEST_CASE("share_update") {
  Rng rng(8);
  SUBCASE("alpha = 0 is the plain multiplicative update") {
    const std::vector<double> lw = {0.0, -1.0, -2.5};
    const std::vector<double> est = {1.0, 3.0, 0.5};
    const auto next = share_update(lw, est, 0.2, 0.0);
    for (std::size_t j = 0; j < 3; ++j) CHECK(next[j] == lw[j] + 0.2 * est[j]);
  }
  SUBCASE("equal weights and zero estimates scale by 1 + e alpha") {
    const std::vector<double> lw(4, std::log(3.0));
    const std::vector<double> est(4, 0.0);
    const double alpha = 0.01;
    for (double x : share_update(lw, est, 0.1, alpha)) {
      CHECK(std::exp(x) == doctest::Approx(3.0 * (1.0 + std::numbers::e * alpha)).epsilon(1e-12));
    }
  }
  SUBCASE("matches the direct-domain formula and the mixing bound") {
    for (int n = 0; n < 200; ++n) {
      const std::size_t k = 2 + rng.below(8);
      std::vector<double> lw(k), est(k);
      for (std::size_t j = 0; j < k; ++j) {
        lw[j] = -5.0 * rng.uniform();
        est[j] = 10.0 * rng.uniform();
      }
      const double eta = 0.1 * rng.uniform();
      const double alpha = 1e-3 + 0.1 * rng.uniform();
      const auto next = share_update(lw, est, eta, alpha);
      double total = 0.0;
      for (double x : lw) total += std::exp(x);
      double lo = INFINITY, hi = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        const double direct = std::exp(lw[j]) * std::exp(eta * est[j]) +
                              std::numbers::e * alpha / static_cast<double>(k) * total;
        CHECK(std::exp(next[j]) == doctest::Approx(direct).epsilon(1e-12));
        lo = std::min(lo, std::exp(next[j]));
        hi = std::max(hi, std::exp(next[j]));
      }
      // With eta * est <= 1 the multiplicative factor is at most e.
      if (eta * 10.0 <= 1.0) {
        CHECK(lo / hi >= alpha / (static_cast<double>(k) + alpha) - 1e-12);
      }
      const std::vector<double> zero(k, 0.0);
      const auto flat = share_update(lw, zero, eta, alpha);
      const auto [fmin, fmax] = std::minmax_element(flat.begin(), flat.end());
      const double ea = std::numbers::e * alpha;
      CHECK(std::exp(*fmin - *fmax) >= ea / (static_cast<double>(k) * (1.0 + ea)) - 1e-12);
    }
  }
}

TEST_CASE("step_algorithm1") {
  SUBCASE("fresh two-arm state is uniform") {
    LearnerState s = LearnerState::fresh(derive_params(1.0, 0.1, 10000, 2, 1, DecoupledVariant::kBasic));
    Rng rng(1);
    const auto d = step_algorithm1(s, [](std::size_t) { return 0.5; }, rng);
    CHECK(d.action_dist[0] == 0.5);
    CHECK(d.query_dist[0] == 0.5);
    CHECK(d.queried.size() == 1);
    CHECK(s.round == 1);
    CHECK(s.cumulative_half_norm == doctest::Approx(2.0));
    double total = 0.0;
    for (double x : action_distribution(s)) total += x;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    for (double lw : s.log_weights) CHECK(std::isfinite(lw));
  }
  SUBCASE("consistent reward on arm 0 concentrates p") {
    LearnerState s = LearnerState::fresh(manual_params(2, 100, 0.1, 0.0, 0.01));
    Rng rng(2);
    for (int t = 0; t < 100; ++t) {
      step_algorithm1(s, [](std::size_t j) { return j == 0 ? 1.0 : 0.0; }, rng);
    }
    CHECK(action_distribution(s)[0] > 0.9);
  }
  SUBCASE("oracle is called only for queried arms") {
    LearnerState s = LearnerState::fresh(derive_params(1.0, 0.1, 10000, 5, 1, DecoupledVariant::kBasic));
    Rng rng(3);
    for (int t = 0; t < 200; ++t) {
      std::vector<std::size_t> asked;
      const auto d = step_algorithm1(s, [&](std::size_t j) { asked.push_back(j); return 0.3; }, rng);
      CHECK(asked == d.queried);
    }
  }
  SUBCASE("stepping past the horizon") {
    LearnerState s = LearnerState::fresh(manual_params(2, 3, 0.1, 0.0, 0.1));
    Rng rng(4);
    for (int t = 0; t < 3; ++t) step_algorithm1(s, [](std::size_t) { return 0.0; }, rng);
    CHECK_THROWS_AS(step_algorithm1(s, [](std::size_t) { return 0.0; }, rng), StateError);
  }
}

TEST_CASE("derived parameters keep eta * estimate <= 1") {
  for (std::size_t k : {2, 5, 10, 20}) {
    for (std::size_t T : {20000, 100000}) {
      const double mu = select_mu(k, T);
      DecoupledParams params;
      try {
        params = derive_params(mu, 0.1, T, k, 1, DecoupledVariant::kBasic);
      } catch (const HorizonTooSmall&) {
        continue;
      }
      LearnerState s = LearnerState::fresh(params);
      Rng rng(k * 7 + T);
      for (int t = 0; t < 2000; ++t) {
        const auto d = step_algorithm1(s, [&](std::size_t j) { return j == 0 ? 1.0 : 0.2; }, rng);
        const double qmin = *std::min_element(d.query_dist.begin(), d.query_dist.end());
        CHECK(params.eta * (1.0 + params.beta) / qmin <= 1.0 + 1e-12);
      }
    }
  }
}

TEST_CASE("long runs stay numerically stable") {
  for (auto variant : {DecoupledVariant::kBasic, DecoupledVariant::kSwitching}) {
    constexpr std::size_t T = 100000;
    DecoupledPolicy policy(derive_params(1.0, 0.1, T, 5, variant == DecoupledVariant::kBasic ? 1 : 3, variant));
    Rng rng(9);
    for (std::size_t t = 0; t < T; ++t) {
      policy.step([](std::size_t j) { return j == 2 ? 1.0 : 0.0; }, rng);
    }
    for (double lw : policy.state().log_weights) CHECK(std::isfinite(lw));
    const auto p = action_distribution(policy.state());
    double total = 0.0;
    for (double x : p) total += x;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::max_element(p.begin(), p.end()) - p.begin() == 2);
  }
}

TEST_CASE("step_algorithm2 with alpha = 0 matches step_algorithm1") {
  const DecoupledParams p1 = manual_params(4, 500, 0.05, 0.1, 0.05);
  LearnerState a = LearnerState::fresh(p1);
  LearnerState b = LearnerState::fresh(p1);
  Rng ra(10), rb(10);
  for (int t = 0; t < 500; ++t) {
    const auto oracle = [t](std::size_t j) { return ((t + j) % 3) / 2.0; };
    const auto da = step_algorithm1(a, oracle, ra);
    const auto db = step_algorithm2(b, oracle, rb);
    CHECK(da.chosen == db.chosen);
  }
  CHECK(a.log_weights == b.log_weights);
}

TEST_CASE("estimator unbiasedness (small sample)") {
  const ProbVector p({0.5, 0.3, 0.2});
  const ProbVector q = query_distribution(p);
  const std::vector<double> g = {0.2, 0.9, 0.6};
  Rng rng(11);
  constexpr int kN = 50000;
  std::vector<double> sum(3, 0.0);
  for (int n = 0; n < kN; ++n) {
    const std::size_t j = sample_categorical(q, rng);
    const Observation o{j, g[j]};
    const auto est = estimate_rewards(std::span(&o, 1), q, 0.1, 1);
    for (std::size_t i = 0; i < 3; ++i) sum[i] += est[i] - 0.1 / q[i];
  }
  for (std::size_t i = 0; i < 3; ++i) {
    // Var of g 1[j=i] / q_i is g^2 (1 - q_i) / q_i.
    const double se = std::sqrt(g[i] * g[i] * (1.0 - q[i]) / q[i] / kN);
    CHECK(std::abs(sum[i] / kN - g[i]) <= 3.5 * se);
  }
}

TEST_CASE("doubling wrapper") {
  SUBCASE("v = k never restarts") {
    DoublingPolicy policy({DecoupledVariant::kBasic, 4.0, 0.1, 5000, 4, 1, 1});
    Rng rng(12);
    for (int t = 0; t < 5000; ++t) policy.step([](std::size_t) { return 0.0; }, rng);
    CHECK(policy.restarts().empty());
  }
  SUBCASE("uniform play with v = 1 restarts at ceil(T / k)") {
    // Zero rewards keep p exactly uniform, so the cumulative half norm is 4t.
    DoublingPolicy policy({DecoupledVariant::kBasic, 1.0, 0.1, 1001, 4, 1, 1});
    Rng rng(13);
    for (int t = 0; t < 1001; ++t) policy.step([](std::size_t) { return 0.0; }, rng);
    REQUIRE(policy.restarts().size() == 2);
    CHECK(policy.restarts()[0] == 251);
    CHECK(policy.restarts()[1] == 752);
    CHECK(policy.current_v() == 4.0);
  }
  SUBCASE("no trigger behaves like the inner learner") {
    const DecoupledParams params = derive_params(3.0, 0.1, 3000, 3, 1, DecoupledVariant::kBasic);
    DecoupledPolicy inner(params);
    DoublingPolicy outer({DecoupledVariant::kBasic, 3.0, 0.1, 3000, 3, 1, 1});
    Rng ra(14), rb(14);
    const auto oracle = [](std::size_t j) { return j == 0 ? 1.0 : 0.0; };
    for (int t = 0; t < 3000; ++t) {
      const auto a = inner.step(oracle, ra);
      const auto b = outer.step(oracle, rb);
      CHECK(a.chosen == b.chosen);
      CHECK(a.queried == b.queried);
    }
    CHECK(outer.restarts().empty());
    CHECK(inner.state().log_weights == outer.state().log_weights);
  }
  SUBCASE("rounds before the first restart match the inner learner") {
    DecoupledPolicy inner(derive_params(1.0, 0.1, 4000, 3, 1, DecoupledVariant::kBasic));
    DoublingPolicy outer({DecoupledVariant::kBasic, 1.0, 0.1, 4000, 3, 1, 1});
    Rng ra(15), rb(15);
    const auto oracle = [](std::size_t j) { return j == 1 ? 0.8 : 0.1; };
    std::size_t t = 0;
    while (outer.restarts().empty() && t < 4000) {
      const auto a = inner.step(oracle, ra);
      const auto b = outer.step(oracle, rb);
      CHECK(a.chosen == b.chosen);
      ++t;
    }
    REQUIRE(!outer.restarts().empty());
    CHECK(outer.restarts()[0] == t);
    CHECK(outer.current_v() == 2.0);
  }
}
