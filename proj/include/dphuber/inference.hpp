#pragma once

#include "dphuber/privacy.hpp"
#include "dphuber/rng.hpp"
#include "dphuber/types.hpp"

namespace dphuber {

// How the inference budget is spent on the two matrix releases.
//   PerObject: Sigma and Omega are each calibrated at the full budget_infer
//              (the convention behind the reported coverage tables; the pair
//              then composes to twice budget_infer).
//   SplitHalf: budget_infer is split evenly between the two, so the pair
//              composes to exactly budget_infer.
enum class InferenceBudgetConvention { PerObject, SplitHalf };

struct InferenceConfig {
  double tau1;
  double gamma1;
  double zeta = 1e-4;   // floor of the positive-definite cone projection
  double alpha = 0.05;  // CI miscoverage level
  PrivacyBudget budget_infer;
  InferenceBudgetConvention convention = InferenceBudgetConvention::PerObject;
};

// Noise scale of the clipped second-moment release:
//   EpsDelta: 2 gamma1^2 sqrt(2 log(1.25/delta)) / (n eps)
//   Gdp:      2 gamma1^2 / (n eps)
double sigma_hat_noise_scale(const PrivacyBudget& budget, double gamma1, Index n);

// Noise scale of the weighted second-moment release; same with an extra
// tau1^2 factor.
double omega_hat_noise_scale(const PrivacyBudget& budget, double gamma1, double tau1, Index n);

// (1/n) sum_i x_i x_i' w_{gamma1}^2(||x_i||_2) + varsigma1 * E, with E
// symmetric and i.i.d. standard normal on the upper triangle and diagonal.
// Output is exactly symmetric.
Matrix private_sigma_hat(const RegressionData& data, double gamma1, double varsigma1, Rng& rng);

// (1/n) sum_i psi_{tau1}^2(y_i - x_i' beta) x_i x_i' w_{gamma1}^2(||x_i||_2)
// + varsigma2 * E.
Matrix private_omega_hat(const RegressionData& data, const Eigen::Ref<const Vector>& beta,
                         double tau1, double gamma1, double varsigma2, Rng& rng);

// Projection onto {H : H >= zeta I}: eigendecompose (after defensive
// symmetrization) and clamp every eigenvalue below zeta up to zeta.  Attains
// the cone-projection minimum in spectral norm and is idempotent.
Matrix psd_project(const Matrix& a, double zeta);

// Private sandwich estimator (Sigma+)^{-1} Omega+ (Sigma+)^{-1}, composing
// the two private releases and the cone projections.  Output symmetric PSD.
Matrix private_xi(const RegressionData& data, const Eigen::Ref<const Vector>& beta,
                  const InferenceConfig& config, Rng& rng);

struct CiResult {
  Matrix xi_hat;
  Vector lower;
  Vector upper;
  double alpha;
};

// Per-coordinate intervals beta_j +/- z_{alpha/2} sqrt(Xi_jj / n).
CiResult confidence_intervals(const Eigen::Ref<const Vector>& beta, const Matrix& xi, Index n,
                              double alpha);

// Standard normal quantile (Wichura's AS 241, double precision).
double normal_quantile(double prob);

// Defaults: gamma1 = 0.5 sqrt(p + log n), tau1 = 0.95 tau0 sqrt(n eps/(p + log n)).
// The eps entering tau1 is budget_main's, the share of the estimation stage
// whose output is being inferred; budget_infer is the inference share spent
// on the matrix releases.
InferenceConfig default_inference_config(Index n, Index p, const PrivacyBudget& budget_main,
                                         const PrivacyBudget& budget_infer, double tau0,
                                         double alpha = 0.05);

}  // namespace dphuber
