#pragma once

#include "dphuber/rng.hpp"
#include "dphuber/types.hpp"

#include <span>
#include <string>
#include <vector>

namespace dphuber {

enum class BudgetKind { EpsDelta, Gdp };

// Privacy target driving every noise-scale computation.  Either classic
// (epsilon, delta)-DP or epsilon-GDP (Gaussian differential privacy, which
// composes by root-sum-of-squares).
struct PrivacyBudget {
  BudgetKind kind;
  double epsilon;
  double delta;  // meaningful for EpsDelta only

  static PrivacyBudget eps_delta(double epsilon, double delta);
  static PrivacyBudget gdp(double epsilon);
};

enum class CompositionRule { StandardComposition, AdvancedComposition, GdpComposition };

const char* to_string(CompositionRule rule);

// Calibrated per-iteration noise scale together with the composition rule it
// was derived from and the per-iteration budget it certifies.
struct NoiseScaleReport {
  double sigma = 0.0;
  CompositionRule rule = CompositionRule::StandardComposition;
  PrivacyBudget per_iteration_budget = PrivacyBudget::eps_delta(1.0, 0.5);
};

// Gaussian noise scale for T noisy clipped gradient steps with per-step
// sensitivity 2*gamma*tau/n.
//
//   Gdp:      sigma = (2 gamma tau / (n eps)) sqrt(T)
//   EpsDelta: sigma_standard = (2 gamma tau / (n eps)) T sqrt(2 log(1.25 T / delta))
//             sigma_advanced = (2 gamma tau / (n eps)) sqrt(5 T log(2/delta) log(5T/(2 delta)))
//
// The advanced-composition alternative is admissible only for eps <= 1 and
// delta <= 0.01; when admissible the smaller of the two is returned.
NoiseScaleReport noise_scale_gd(const PrivacyBudget& budget, int T, double gamma, double tau,
                                Index n);

// Laplace scale used for every coordinate draw inside one NoisyHT invocation:
// 2 * lambda * sqrt(5 s log(1/delta)) / eps.
double noisyht_scale(double per_iter_epsilon, double per_iter_delta, int s, double lambda);

struct ConstraintCheck {
  bool valid = true;
  std::string message;
};

// Checks the hypothesis under which NoisyHT carries its (eps, delta)-DP
// guarantee: 0 < eps <= 0.5, 0 < delta <= 0.011, s >= 10.  Violations produce
// a warning, not a failure; callers proceed but must surface the message.
ConstraintCheck validate_noisyht_constraints(double epsilon, double delta, long s);

// Splits a budget across stages.  EpsDelta splits both parameters
// proportionally (additive composition recovers the total); Gdp assigns
// eps_i = sqrt(f_i) * eps (root-sum-square recovers the total).  Fractions
// must be nonnegative and sum to 1 within 1e-12.
std::vector<PrivacyBudget> split_budget(const PrivacyBudget& total,
                                        std::span<const double> fractions);

// dim i.i.d. draws from N(0, scale^2); scale == 0 returns the zero vector
// exactly and consumes no randomness.
Vector sample_gaussian_vector(double scale, Index dim, Rng& rng);

// One draw with density (2 scale)^{-1} exp(-|x|/scale).
double sample_laplace(double scale, Rng& rng);

}  // namespace dphuber
