#pragma once

#include "dphuber/huber.hpp"
#include "dphuber/privacy.hpp"
#include "dphuber/rng.hpp"
#include "dphuber/types.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dphuber {

enum class PrivacyVariant { Dp, Gdp };

// Ridge penalty of the private initializer; fixed by the tuning recipe.
inline constexpr double kRidgeLambda0 = 0.2;

// Private proxy for the noise scale: tau0 = sqrt(m2 - m1^2) when positive,
// 2 otherwise, from privately released clipped response moments.
struct Tau0Estimate {
  double tau0;
  double m1;
  double m2;
};

struct LowDimFitConfig {
  double tau;
  double gamma;
  double eta0;
  int T;
  Vector beta0;  // empty => start from zero
  PrivacyBudget budget;
  bool record_trace = false;
  // Testing/ablation knob: force the per-iteration Gaussian scale instead of
  // calibrating it from the budget (0 disables noise injection entirely).
  std::optional<double> noise_scale_override;
};

struct IterationStat {
  double grad_norm;
  double step_norm;
};

struct FitResult {
  Vector beta;                                   // final iterate
  std::vector<IterationStat> trace;              // populated when requested
  std::optional<NoiseScaleReport> noise_report;  // unset for non-private fits
  RngStream seed_record;
  std::vector<std::string> warnings;
};

// delta = 10 n^{-1.1}, the default when the caller does not supply one.
double default_delta(Index n);

// Laplace (Dp) or Gaussian (Gdp) noise scales for the two clipped response
// moments released during tau0 selection, at initialization budget
// epsilon_init:
//   Dp:  (16 log(n)/(n eps), 8 log(n)^2/(n eps))
//   Gdp: ( 4 log(n)/(n eps), 2 log(n)^2/(n eps))
std::pair<double, double> tau0_noise_scales(Index n, double epsilon_init, PrivacyVariant mode);

// Clamps responses to [-log n, log n], releases both clipped moments with
// calibrated noise, and applies the fallback rule.  Requires n >= 2.
Tau0Estimate select_tau0_private(const Eigen::Ref<const Vector>& y, double epsilon_init,
                                 PrivacyVariant mode, Rng& rng);

// Output-perturbation scale of the ridge-Huber initializer, with
// B = sqrt(1 + p/36):
//   EpsDelta: 8 B tau0 sqrt(2 log(1.25/delta)) / (3 n eps lambda0)
//   Gdp:      2 sqrt(2) B tau0 / (n eps lambda0)
// The budget passed here is the full initialization share; the internal
// 1/4 : 3/4 (resp. 1/sqrt2 : 1/sqrt2) split between tau0 selection and output
// perturbation is baked into the constants.
double ridge_output_noise_scale(Index n, Index p, double tau0, const PrivacyBudget& budget_init);

// Ridge-penalized Huber regression on the row-clipped design (non-intercept
// block scaled to l2-norm at most sqrt(p)/6), solved by deterministic
// gradient descent to gradient norm 1e-8, then perturbed with
// N(0, sigma~^2 I).  Throws NumericalError if the solver hits its iteration
// cap, carrying the final gradient norm.
Vector init_ridge_huber(const RegressionData& data, double tau0, const PrivacyBudget& budget_init,
                        Rng& rng);

// Unperturbed ridge-Huber minimizer on the clipped design; exposed for
// testing against independent solvers.
Vector ridge_huber_minimizer(const RegressionData& data, double tau0);

// Full private initialization: tau0 selection followed by the perturbed
// ridge-Huber estimate, consuming exactly budget_init.
struct LowDimInit {
  Vector beta0;
  Tau0Estimate tau0;
};
LowDimInit lowdim_private_init(const RegressionData& data, const PrivacyBudget& budget_init,
                               Rng& rng);

// Noisy clipped gradient descent: T iterations of
//   beta <- beta + eta0 { (1/n) sum_i psi_tau(y_i - x_i' beta) x_i w_gamma(||x_i||_2)
//                         + sigma g_t },   g_t ~ N(0, I_p),
// with sigma from noise_scale_gd(config.budget, T, gamma, tau, n).
FitResult fit_dp_huber(const RegressionData& data, const LowDimFitConfig& config, Rng& rng);

// tau = 0.2 sigma0_hat sqrt(n/(p + log n)) with sigma0_hat^2 the response
// variance; the non-private benchmark rule.
double nonprivate_tau_lowdim(const RegressionData& data);

// Plain Huber gradient descent (no initialization, clipping, or noise).
// tau defaults to nonprivate_tau_lowdim; eta0 = 0.5 and T = ceil(2 log n) are
// the benchmark defaults.
FitResult fit_huber_nonprivate(const RegressionData& data, double eta0, int T,
                               std::optional<double> tau = std::nullopt);
FitResult fit_huber_nonprivate(const RegressionData& data);

// Tuning defaults: eta0 = 0.2, gamma = 0.5 sqrt(p + log n), T = ceil(2 log n),
// tau = 0.04 tau0 sqrt(n eps / (p + log n)).  The epsilon entering tau is the
// full privacy target; when the fit runs inside a pipeline, the main-loop
// budget share is assigned separately.  beta0 is left empty for the caller.
LowDimFitConfig default_lowdim_config(Index n, Index p, const PrivacyBudget& budget, double tau0);

struct LowDimPipelineOptions {
  // Budget share of the initialization step; defaults to 1/6 under
  // (eps, delta)-DP and 1/8 (in eps^2 terms) under GDP.
  std::optional<double> init_fraction;
  std::optional<double> tau;
  std::optional<double> gamma;
  std::optional<double> eta0;
  std::optional<int> T;
  bool record_trace = false;
};

struct LowDimPipelineResult {
  FitResult fit;
  Tau0Estimate tau0;
  Vector beta0;
  PrivacyBudget budget_init;
  PrivacyBudget budget_main;
  LowDimFitConfig config;  // resolved configuration of the main loop
};

// End-to-end private fit: budget split, tau0 selection, ridge-Huber
// initialization, then the noisy clipped gradient descent.  Consumes exactly
// the declared total budget.
LowDimPipelineResult fit_dp_huber_pipeline(const RegressionData& data, const PrivacyBudget& total,
                                           Rng& rng, const LowDimPipelineOptions& options = {});

}  // namespace dphuber
