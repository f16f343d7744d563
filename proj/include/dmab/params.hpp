#pragma once

#include <cstddef>
#include <cstdint>

namespace dmab {

enum class DecoupledVariant {
  kBasic,      // fixed comparator, multiplicative update only
  kSwitching,  // S-segment comparator, adds uniform weight sharing
};

// Learning-rate schedule for the decoupled learners. Built only through
// derive_params, which enforces
//   eta   = 1/sqrt(mu*T)           (basic)
//         = sqrt(S/(mu*T))         (switching)
//   beta  = 2*eta*sqrt(6*ln(3k/delta))
//   gamma = eta^2 * (1+beta)^2 * k^2
//   alpha = 1/T (switching), 0 (basic)
// with gamma < 1 and (1+beta)^2 <= 2.
struct DecoupledParams {
  DecoupledVariant variant = DecoupledVariant::kBasic;
  double mu = 1.0;
  double delta = 0.1;
  std::size_t horizon = 0;
  std::size_t arms = 0;
  std::size_t segments = 1;
  double eta = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double alpha = 0.0;
  std::size_t queries_per_round = 1;
};

// Throws SpecError on out-of-range inputs and HorizonTooSmall when the
// feasibility conditions fail.
DecoupledParams derive_params(double mu, double delta, std::size_t horizon,
                              std::size_t arms, std::size_t segments,
                              DecoupledVariant variant,
                              std::size_t queries_per_round = 1);

// mu = k^min{1, max{0, 4/3 - log_k(T)/3}}.
double select_mu(std::size_t arms, std::size_t horizon);

}  // namespace dmab
