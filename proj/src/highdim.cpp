#include "dphuber/highdim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace dphuber {

namespace {

int default_iterations(Index n) { return static_cast<int>(std::ceil(2.0 * std::log(n))); }

Index count_nonzeros(const Eigen::Ref<const Vector>& v) {
  Index k = 0;
  for (Index i = 0; i < v.size(); ++i) {
    if (v[i] != 0.0) ++k;
  }
  return k;
}

// Shared IHT loop: linf-clipped gradient step, then (noisy) hard threshold.
FitResult run_iht_loop(const RegressionData& data, double tau, const Vector& weights, double eta0,
                       int T, int s, Vector beta, double laplace_scale, Rng& rng,
                       bool record_trace) {
  FitResult result;
  result.seed_record = rng.stream();
  if (record_trace) result.trace.reserve(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t) {
    const Vector g = clipped_gradient_weighted(data, beta, tau, weights);
    const Vector beta_tilde = beta + eta0 * g;
    const SparseVector thresholded = noisy_hard_threshold_scaled(beta_tilde, s, laplace_scale, rng);
    Vector next = thresholded.to_dense();
    if (!next.allFinite()) {
      throw NumericalError("sparse fit diverged at iteration " + std::to_string(t));
    }
    if (record_trace) result.trace.push_back({g.norm(), (next - beta).norm()});
    beta = std::move(next);
  }
  result.beta = std::move(beta);
  return result;
}

}  // namespace

Vector SparseVector::to_dense() const {
  Vector v = Vector::Zero(ambient_dim);
  for (std::size_t k = 0; k < indices.size(); ++k) v[indices[k]] = values[k];
  return v;
}

SparseVector hard_threshold_top_s(const Eigen::Ref<const Vector>& v, int s) {
  Rng unused(RngStream{});
  return noisy_hard_threshold_scaled(v, s, 0.0, unused);
}

SparseVector noisy_hard_threshold_scaled(const Eigen::Ref<const Vector>& v, int s, double scale,
                                         Rng& rng) {
  const Index p = v.size();
  if (s <= 0 || s > p) throw std::domain_error("noisy_hard_threshold: need 1 <= s <= p");
  if (scale < 0.0) throw std::domain_error("noisy_hard_threshold: scale must be >= 0");

  std::vector<char> taken(static_cast<std::size_t>(p), 0);
  std::vector<Index> order;
  order.reserve(static_cast<std::size_t>(s));
  for (int round = 0; round < s; ++round) {
    double best = -std::numeric_limits<double>::infinity();
    Index best_j = -1;
    // Fresh noise for every remaining coordinate; strict '>' with an
    // ascending scan makes the lowest index win ties (relevant only on the
    // zero-noise path, ties are measure-zero otherwise).
    for (Index j = 0; j < p; ++j) {
      if (taken[static_cast<std::size_t>(j)]) continue;
      const double noisy = std::abs(v[j]) + rng.laplace(scale);
      if (noisy > best) {
        best = noisy;
        best_j = j;
      }
    }
    taken[static_cast<std::size_t>(best_j)] = 1;
    order.push_back(best_j);
  }

  SparseVector out;
  out.ambient_dim = p;
  out.indices = std::move(order);
  std::sort(out.indices.begin(), out.indices.end());
  out.values.reserve(out.indices.size());
  for (Index j : out.indices) out.values.push_back(v[j] + rng.laplace(scale));
  return out;
}

SparseVector noisy_hard_threshold(const Eigen::Ref<const Vector>& v, int s, double eps,
                                  double delta, double lambda, Rng& rng) {
  return noisy_hard_threshold_scaled(v, s, noisyht_scale(eps, delta, s, lambda), rng);
}

std::vector<Index> report_noisy_max_peeling(const Eigen::Ref<const Vector>& g, int s0,
                                            double laplace_scale, Rng& rng) {
  const Index m = g.size();
  if (s0 <= 0 || s0 > m) {
    throw std::domain_error("report_noisy_max_peeling: need 1 <= s0 <= #candidates");
  }
  if (laplace_scale < 0.0) {
    throw std::domain_error("report_noisy_max_peeling: scale must be >= 0");
  }
  std::vector<char> taken(static_cast<std::size_t>(m), 0);
  std::vector<Index> order;
  order.reserve(static_cast<std::size_t>(s0));
  for (int round = 0; round < s0; ++round) {
    double best = -std::numeric_limits<double>::infinity();
    Index best_j = -1;
    for (Index j = 0; j < m; ++j) {
      if (taken[static_cast<std::size_t>(j)]) continue;
      const double noisy = g[j] + rng.laplace(laplace_scale);
      if (noisy > best) {
        best = noisy;
        best_j = j;
      }
    }
    taken[static_cast<std::size_t>(best_j)] = 1;
    order.push_back(best_j);
  }
  return order;
}

double support_recovery_sensitivity(Index n, Index p) {
  if (n < 1 || p < 1) throw std::domain_error("support_recovery_sensitivity: n, p >= 1");
  return 2.0 * std::sqrt(std::log(static_cast<double>(p) * static_cast<double>(n))) /
         static_cast<double>(n);
}

SupportInit init_support_recovery(const RegressionData& data, int s, double eps_init,
                                  double delta_init, Rng& rng) {
  const Index n = data.n();
  const Index p = data.p();
  if (s < 2) throw std::domain_error("init_support_recovery: s must be >= 2");
  if (p < s) throw std::domain_error("init_support_recovery: p must be >= s");
  if (!(eps_init > 0.0)) throw std::domain_error("init_support_recovery: eps_init > 0 required");

  const double cap = std::sqrt(std::log(static_cast<double>(p) * static_cast<double>(n)));
  Vector g(p - 1);
  for (Index j = 1; j < p; ++j) {
    double sum = 0.0;
    for (Index i = 0; i < n; ++i) {
      const double u = data.y[i] * data.x(i, j);
      if (u != 0.0) sum += u * std::min(cap / std::abs(u), 1.0);
    }
    g[j - 1] = std::abs(sum / static_cast<double>(n));
  }

  const int s0 = s - 1;
  const double delta_sens = support_recovery_sensitivity(n, p);
  // Recovery runs on half the initialization budget: per-run Report Noisy
  // Max at eps_init/(2 s0), i.e. Laplace scale 2 s0 Delta / (eps_init/2).
  const double scale = std::isinf(eps_init)
                           ? 0.0
                           : 2.0 * static_cast<double>(s0) * delta_sens / (eps_init / 2.0);
  const std::vector<Index> picked = report_noisy_max_peeling(g, s0, scale, rng);

  SupportInit out;
  out.support.reserve(picked.size());
  for (Index j : picked) out.support.push_back(j + 1);

  std::vector<Index> cols;
  cols.push_back(0);
  cols.insert(cols.end(), out.support.begin(), out.support.end());
  std::sort(cols.begin() + 1, cols.end());

  Matrix xr(n, static_cast<Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) xr.col(static_cast<Index>(k)) = data.x.col(cols[k]);
  const RegressionData restricted(std::move(xr), data.y);

  const LowDimInit init =
      lowdim_private_init(restricted, PrivacyBudget::eps_delta(eps_init / 2.0, delta_init), rng);

  out.tau0 = init.tau0;
  out.beta0 = Vector::Zero(p);
  for (std::size_t k = 0; k < cols.size(); ++k) out.beta0[cols[k]] = init.beta0[static_cast<Index>(k)];
  return out;
}

NoisyHtBudgetChoice choose_noisyht_budget(const PrivacyBudget& budget, int T, int s,
                                          double lambda) {
  if (budget.kind != BudgetKind::EpsDelta) {
    throw std::invalid_argument("choose_noisyht_budget: EpsDelta budget required");
  }
  if (T <= 0) throw std::domain_error("choose_noisyht_budget: T must be >= 1");
  const double dT = static_cast<double>(T);
  const double eps = budget.epsilon;
  const double delta = budget.delta;

  NoisyHtBudgetChoice choice;
  choice.per_iteration = PrivacyBudget::eps_delta(eps / dT, delta / dT);
  choice.rule = CompositionRule::StandardComposition;
  choice.laplace_scale =
      noisyht_scale(choice.per_iteration.epsilon, choice.per_iteration.delta, s, lambda);

  if (eps <= 1.0 && delta <= 0.01) {
    const PrivacyBudget advanced = PrivacyBudget::eps_delta(
        eps * std::sqrt(2.0 / (5.0 * dT * std::log(2.0 / delta))), delta / (2.0 * dT));
    const double advanced_scale = noisyht_scale(advanced.epsilon, advanced.delta, s, lambda);
    if (advanced_scale < choice.laplace_scale) {
      choice.per_iteration = advanced;
      choice.rule = CompositionRule::AdvancedComposition;
      choice.laplace_scale = advanced_scale;
    }
  }
  return choice;
}

FitResult fit_dp_sparse_huber(const RegressionData& data, const HighDimFitConfig& config,
                              Rng& rng) {
  if (config.budget.kind != BudgetKind::EpsDelta) {
    throw std::invalid_argument("fit_dp_sparse_huber: EpsDelta budget required");
  }
  if (config.s <= 0 || config.s > data.p()) {
    throw std::domain_error("fit_dp_sparse_huber: need 1 <= s <= p");
  }
  if (!(config.tau > 0.0) || !(config.gamma > 0.0) || !(config.eta0 > 0.0) || config.T <= 0) {
    throw std::invalid_argument("fit_dp_sparse_huber: tau, gamma, eta0, T must be positive");
  }
  Vector beta = config.beta0.size() == data.p() ? config.beta0 : Vector::Zero(data.p());
  if (config.beta0.size() != 0 && config.beta0.size() != data.p()) {
    throw std::invalid_argument("fit_dp_sparse_huber: beta0 dimension mismatch");
  }
  if (count_nonzeros(beta) > config.s) {
    throw std::invalid_argument("fit_dp_sparse_huber: beta0 must satisfy ||beta0||_0 <= s");
  }

  const double lambda = 2.0 * config.eta0 * config.gamma * config.tau / static_cast<double>(data.n());
  NoiseScaleReport report;
  std::vector<std::string> warnings;
  double scale;
  if (config.laplace_scale_override) {
    scale = *config.laplace_scale_override;
    report.sigma = scale;
    report.rule = CompositionRule::StandardComposition;
    report.per_iteration_budget = config.budget;
  } else {
    const NoisyHtBudgetChoice choice =
        choose_noisyht_budget(config.budget, config.T, config.s, lambda);
    scale = choice.laplace_scale;
    report.sigma = scale;
    report.rule = choice.rule;
    report.per_iteration_budget = choice.per_iteration;
    const ConstraintCheck check = validate_noisyht_constraints(
        choice.per_iteration.epsilon, choice.per_iteration.delta, config.s);
    if (!check.valid) warnings.push_back(check.message);
  }

  const Vector weights = row_clip_weights(data, ClipParam(config.gamma, NormMode::LInf));
  FitResult result = run_iht_loop(data, config.tau, weights, config.eta0, config.T, config.s,
                                  std::move(beta), scale, rng, config.record_trace);
  result.noise_report = report;
  result.warnings = std::move(warnings);
  return result;
}

double nonprivate_tau_highdim(const RegressionData& data, int s) {
  const Index n = data.n();
  const double mean = data.y.mean();
  const double sigma0 = std::sqrt((data.y.array() - mean).square().sum() / static_cast<double>(n));
  const double denom =
      static_cast<double>(s) * std::log(static_cast<double>(data.p())) + std::log(n);
  const double tau = 0.1 * sigma0 * std::sqrt(static_cast<double>(n) / denom);
  return tau > 0.0 ? tau : 2.0;
}

FitResult fit_sparse_huber_nonprivate(const RegressionData& data, int s,
                                      const SparseBenchmarkOptions& options) {
  if (s <= 0 || s > data.p()) {
    throw std::domain_error("fit_sparse_huber_nonprivate: need 1 <= s <= p");
  }
  const int T = options.T > 0 ? options.T : default_iterations(data.n());
  const double tau = options.tau.value_or(nonprivate_tau_highdim(data, s));
  Vector weights;
  if (options.clipping) {
    const double gamma = options.gamma.value_or(
        0.5 * std::sqrt(std::log(static_cast<double>(data.p()) * static_cast<double>(data.n()))));
    weights = row_clip_weights(data, ClipParam(gamma, NormMode::LInf));
  } else {
    weights = Vector::Ones(data.n());
  }
  Rng unused(RngStream{});
  return run_iht_loop(data, tau, weights, options.eta0, T, s, Vector::Zero(data.p()), 0.0, unused,
                      false);
}

HighDimFitConfig default_highdim_config(Index n, Index p, int s_star, const PrivacyBudget& budget,
                                        double tau0) {
  if (n < 2) throw std::domain_error("default_highdim_config: n must be >= 2");
  if (s_star < 1) throw std::domain_error("default_highdim_config: s_star must be >= 1");
  if (!(tau0 > 0.0)) throw std::domain_error("default_highdim_config: tau0 must be positive");
  const int s = static_cast<int>(std::ceil(1.2 * static_cast<double>(s_star)));
  const double denom = static_cast<double>(s) * std::log(static_cast<double>(p)) +
                       std::log(static_cast<double>(n));
  HighDimFitConfig config{
      /*tau=*/0.04 * tau0 * std::sqrt(static_cast<double>(n) * budget.epsilon / denom),
      /*gamma=*/0.5 * std::sqrt(std::log(static_cast<double>(p) * static_cast<double>(n))),
      /*eta0=*/0.01,
      /*T=*/default_iterations(n),
      /*s=*/s,
      /*beta0=*/Vector(),
      /*budget=*/budget,
  };
  return config;
}

HighDimPipelineResult fit_dp_sparse_huber_pipeline(const RegressionData& data, int s_star,
                                                   const PrivacyBudget& total, Rng& rng,
                                                   const HighDimPipelineOptions& options) {
  if (total.kind != BudgetKind::EpsDelta) {
    throw std::invalid_argument("fit_dp_sparse_huber_pipeline: EpsDelta budget required");
  }
  // eps_init = 2 eps_main = 2 eps / 3; delta_init = delta_main = delta / 2.
  const PrivacyBudget budget_init =
      PrivacyBudget::eps_delta(2.0 * total.epsilon / 3.0, total.delta / 2.0);
  const PrivacyBudget budget_main = PrivacyBudget::eps_delta(total.epsilon / 3.0, total.delta / 2.0);

  HighDimFitConfig config = default_highdim_config(data.n(), data.p(), s_star, total, 1.0);
  if (options.s) config.s = *options.s;

  SupportInit init =
      init_support_recovery(data, config.s, budget_init.epsilon, budget_init.delta, rng);

  {
    // Recompute tau with the privately selected tau0, keeping the overridden s.
    const int s = config.s;
    HighDimFitConfig fresh =
        default_highdim_config(data.n(), data.p(), s_star, total, init.tau0.tau0);
    fresh.s = s;
    if (options.s) {
      const double denom = static_cast<double>(s) * std::log(static_cast<double>(data.p())) +
                           std::log(static_cast<double>(data.n()));
      fresh.tau = 0.04 * init.tau0.tau0 *
                  std::sqrt(static_cast<double>(data.n()) * total.epsilon / denom);
    }
    config = fresh;
  }
  if (options.tau) config.tau = *options.tau;
  if (options.gamma) config.gamma = *options.gamma;
  if (options.eta0) config.eta0 = *options.eta0;
  if (options.T) config.T = *options.T;
  config.record_trace = options.record_trace;
  config.budget = budget_main;
  config.beta0 = init.beta0;

  HighDimPipelineResult out{fit_dp_sparse_huber(data, config, rng), std::move(init), budget_init,
                            budget_main, config};
  return out;
}

}  // namespace dphuber
