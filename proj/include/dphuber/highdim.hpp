#pragma once

#include "dphuber/lowdim.hpp"
#include "dphuber/privacy.hpp"
#include "dphuber/rng.hpp"
#include "dphuber/types.hpp"

#include <optional>
#include <vector>

namespace dphuber {

// Thresholded, noise-perturbed iterate: values at strictly increasing
// indices, everything else zero.  Stored zeros are permitted (noise can land
// on zero); the support is the index set itself.
struct SparseVector {
  std::vector<Index> indices;
  std::vector<double> values;
  Index ambient_dim = 0;

  Vector to_dense() const;
};

struct HighDimFitConfig {
  double tau;
  double gamma;
  double eta0;
  int T;
  int s;         // working sparsity
  Vector beta0;  // empty => zeros; ||beta0||_0 <= s required
  PrivacyBudget budget;  // EpsDelta only
  bool record_trace = false;
  // Testing/ablation knob: force the per-coordinate Laplace scale (0 turns
  // every draw into an exact hard threshold).
  std::optional<double> laplace_scale_override;
};

// Exact magnitude top-s projection with lowest-index tie-breaking; the
// zero-noise reduction of NoisyHT.
SparseVector hard_threshold_top_s(const Eigen::Ref<const Vector>& v, int s);

// s peeling rounds, each drawing fresh Laplace noise at the given scale for
// every unselected coordinate and keeping the noisy-magnitude argmax; the
// selected entries are then perturbed once more.  scale == 0 reduces to
// hard_threshold_top_s.
SparseVector noisy_hard_threshold_scaled(const Eigen::Ref<const Vector>& v, int s, double scale,
                                         Rng& rng);

// NoisyHT with the scale calibrated from the per-invocation budget:
// Laplace(2 lambda sqrt(5 s log(1/delta)) / eps), where lambda bounds the
// linf-sensitivity of v across adjacent datasets (caller's obligation).
SparseVector noisy_hard_threshold(const Eigen::Ref<const Vector>& v, int s, double eps,
                                  double delta, double lambda, Rng& rng);

// s0 rounds of Report Noisy Max over the remaining entries of g: add fresh
// i.i.d. Laplace(laplace_scale) to every remaining coordinate, remove the
// argmax.  Returns the removed indices in selection order; only indices are
// released.
std::vector<Index> report_noisy_max_peeling(const Eigen::Ref<const Vector>& g, int s0,
                                            double laplace_scale, Rng& rng);

// linf-sensitivity of the clipped correlation vector used for support
// recovery: Delta = 2 sqrt(log(p n)) / n.
double support_recovery_sensitivity(Index n, Index p);

// Two-stage private initializer for the sparse fit: peeling support recovery
// on the clipped response-covariate correlations at budget (eps_init/2, 0),
// then the low-dimensional private initializer restricted to the selected
// columns at (eps_init/2, delta_init), embedded back into R^p.
struct SupportInit {
  Vector beta0;
  std::vector<Index> support;  // selected non-intercept column indices
  Tau0Estimate tau0;
};
SupportInit init_support_recovery(const RegressionData& data, int s, double eps_init,
                                  double delta_init, Rng& rng);

// Per-iteration NoisyHT budget: the standard option (eps/T, delta/T) against
// the advanced-composition option (eps sqrt(2/(5T log(2/delta))), delta/(2T)),
// the latter admissible only for eps <= 1, delta <= 0.01.  The choice
// minimizes the injected Laplace scale.
struct NoisyHtBudgetChoice {
  PrivacyBudget per_iteration;
  CompositionRule rule;
  double laplace_scale;
};
NoisyHtBudgetChoice choose_noisyht_budget(const PrivacyBudget& budget, int T, int s,
                                          double lambda);

// DP sparse Huber regression: T iterations of an linf-clipped gradient step
// followed by NoisyHT with noise scale lambda = 2 eta0 gamma tau / n.  Every
// iterate satisfies ||beta||_0 <= s.
FitResult fit_dp_sparse_huber(const RegressionData& data, const HighDimFitConfig& config,
                              Rng& rng);

// tau = 0.1 sigma0_hat sqrt(n/(s log p + log n)); the sparse benchmark rule.
double nonprivate_tau_highdim(const RegressionData& data, int s);

struct SparseBenchmarkOptions {
  double eta0 = 0.2;
  int T = 0;  // 0 => ceil(2 log n)
  std::optional<double> tau;
  bool clipping = false;  // benchmark default: no clipping
  std::optional<double> gamma;  // used when clipping is enabled
};

// Iterative hard thresholding on the Huber gradient with every noise draw
// replaced by zero; clipping disabled by default.
FitResult fit_sparse_huber_nonprivate(const RegressionData& data, int s,
                                      const SparseBenchmarkOptions& options = {});

// Tuning defaults: s = ceil(1.2 s*), gamma = 0.5 sqrt(log(p n)),
// T = ceil(2 log n), eta0 = 0.01, tau = 0.04 tau0 sqrt(n eps/(s log p + log n)).
HighDimFitConfig default_highdim_config(Index n, Index p, int s_star, const PrivacyBudget& budget,
                                        double tau0);

struct HighDimPipelineOptions {
  std::optional<int> s;  // working sparsity override
  std::optional<double> tau;
  std::optional<double> gamma;
  std::optional<double> eta0;
  std::optional<int> T;
  bool record_trace = false;
};

struct HighDimPipelineResult {
  FitResult fit;
  SupportInit init;
  PrivacyBudget budget_init;
  PrivacyBudget budget_main;
  HighDimFitConfig config;
};

// End-to-end sparse private fit with the budget split eps_init = 2 eps/3,
// eps_main = eps/3, delta_init = delta_main = delta/2.
HighDimPipelineResult fit_dp_sparse_huber_pipeline(const RegressionData& data, int s_star,
                                                   const PrivacyBudget& total, Rng& rng,
                                                   const HighDimPipelineOptions& options = {});

}  // namespace dphuber
