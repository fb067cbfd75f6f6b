#include "dphuber/lowdim.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>
#include <string>

namespace dphuber {

namespace {

int default_iterations(Index n) { return static_cast<int>(std::ceil(2.0 * std::log(n))); }

// Non-intercept block scaled to l2-norm at most sqrt(p)/6; the intercept
// column is left untouched.
Matrix clip_design_rows(const Matrix& x) {
  Matrix xt = x;
  const Index p = x.cols();
  if (p < 2) return xt;
  const double cap = std::sqrt(static_cast<double>(p)) / 6.0;
  for (Index i = 0; i < x.rows(); ++i) {
    const double norm = xt.row(i).tail(p - 1).norm();
    if (norm > cap) {
      xt.row(i).tail(p - 1) *= cap / norm;
    }
  }
  return xt;
}

// Shared descent loop for Algorithm-style updates.  weights are the
// per-row clipping multipliers (identically 1 for the plain benchmark);
// sigma = 0 makes the loop fully deterministic.
FitResult run_gd_loop(const RegressionData& data, double tau, const Vector& weights, double eta0,
                      int T, Vector beta, double sigma, Rng& rng, bool record_trace) {
  FitResult result;
  result.seed_record = rng.stream();
  if (record_trace) result.trace.reserve(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t) {
    const Vector g = clipped_gradient_weighted(data, beta, tau, weights);
    const Vector noise = sample_gaussian_vector(sigma, data.p(), rng);
    const Vector step = eta0 * (g + noise);
    beta += step;
    if (!beta.allFinite()) {
      throw NumericalError("gradient descent diverged at iteration " + std::to_string(t));
    }
    if (record_trace) result.trace.push_back({g.norm(), step.norm()});
  }
  result.beta = std::move(beta);
  return result;
}

}  // namespace

double default_delta(Index n) {
  if (n <= 0) throw std::domain_error("default_delta: n must be positive");
  return 10.0 * std::pow(static_cast<double>(n), -1.1);
}

std::pair<double, double> tau0_noise_scales(Index n, double epsilon_init, PrivacyVariant mode) {
  if (n < 2) throw std::domain_error("tau0_noise_scales: n must be >= 2");
  if (!(epsilon_init > 0.0)) throw std::domain_error("tau0_noise_scales: epsilon must be positive");
  const double logn = std::log(static_cast<double>(n));
  const double ne = static_cast<double>(n) * epsilon_init;
  if (mode == PrivacyVariant::Dp) {
    return {16.0 * logn / ne, 8.0 * logn * logn / ne};
  }
  return {4.0 * logn / ne, 2.0 * logn * logn / ne};
}

Tau0Estimate select_tau0_private(const Eigen::Ref<const Vector>& y, double epsilon_init,
                                 PrivacyVariant mode, Rng& rng) {
  const Index n = y.size();
  if (n < 2) throw std::domain_error("select_tau0_private: n must be >= 2");
  const double logn = std::log(static_cast<double>(n));
  double s1 = 0.0, s2 = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double yt = std::min(logn, std::max(-logn, y[i]));
    s1 += yt;
    s2 += yt * yt;
  }
  const auto [scale1, scale2] = tau0_noise_scales(n, epsilon_init, mode);
  double m1 = s1 / static_cast<double>(n);
  double m2 = s2 / static_cast<double>(n);
  if (mode == PrivacyVariant::Dp) {
    m1 += rng.laplace(scale1);
    m2 += rng.laplace(scale2);
  } else {
    if (scale1 > 0.0) m1 += scale1 * rng.normal();
    if (scale2 > 0.0) m2 += scale2 * rng.normal();
  }
  const double var = m2 - m1 * m1;
  return Tau0Estimate{var > 0.0 ? std::sqrt(var) : 2.0, m1, m2};
}

double ridge_output_noise_scale(Index n, Index p, double tau0, const PrivacyBudget& budget_init) {
  if (n < 1 || p < 1 || !(tau0 > 0.0)) {
    throw std::domain_error("ridge_output_noise_scale: invalid arguments");
  }
  const double B = std::sqrt(1.0 + static_cast<double>(p) / 36.0);
  const double ne = static_cast<double>(n) * budget_init.epsilon;
  if (budget_init.kind == BudgetKind::EpsDelta) {
    return 8.0 * B * tau0 * std::sqrt(2.0 * std::log(1.25 / budget_init.delta)) /
           (3.0 * ne * kRidgeLambda0);
  }
  return 2.0 * std::sqrt(2.0) * B * tau0 / (ne * kRidgeLambda0);
}

Vector ridge_huber_minimizer(const RegressionData& data, double tau0) {
  if (!(tau0 > 0.0)) throw std::domain_error("ridge_huber_minimizer: tau0 must be positive");
  const Matrix xt = clip_design_rows(data.x);
  const Index n = data.n();
  const Index p = data.p();

  // The objective is lambda0-strongly convex and (L + lambda0)-smooth with
  // L = lambda_max(Xt'Xt/n); a fixed step 1/(L + lambda0) suffices.
  const Matrix gram = xt.transpose() * xt / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  if (eig.info() != Eigen::Success) {
    throw NumericalError("ridge_huber_minimizer: eigenvalue computation failed");
  }
  const double L = eig.eigenvalues().maxCoeff();
  const double step = 1.0 / (L + kRidgeLambda0);

  constexpr double kGradTol = 1e-8;
  constexpr int kMaxIter = 100000;
  Vector beta = Vector::Zero(p);
  double grad_norm = 0.0;
  for (int it = 0; it < kMaxIter; ++it) {
    Vector grad = kRidgeLambda0 * beta;
    const Vector r = data.y - xt * beta;
    for (Index i = 0; i < n; ++i) {
      grad -= huber_score(r[i], tau0) / static_cast<double>(n) * xt.row(i).transpose();
    }
    grad_norm = grad.norm();
    if (grad_norm <= kGradTol) return beta;
    beta -= step * grad;
  }
  throw NumericalError("ridge_huber_minimizer: no convergence within iteration cap, grad norm " +
                       std::to_string(grad_norm));
}

Vector init_ridge_huber(const RegressionData& data, double tau0, const PrivacyBudget& budget_init,
                        Rng& rng) {
  Vector beta = ridge_huber_minimizer(data, tau0);
  const double sigma = ridge_output_noise_scale(data.n(), data.p(), tau0, budget_init);
  if (sigma > 0.0 && std::isfinite(sigma)) {
    beta += sample_gaussian_vector(sigma, data.p(), rng);
  }
  return beta;
}

LowDimInit lowdim_private_init(const RegressionData& data, const PrivacyBudget& budget_init,
                               Rng& rng) {
  const PrivacyVariant mode =
      budget_init.kind == BudgetKind::Gdp ? PrivacyVariant::Gdp : PrivacyVariant::Dp;
  LowDimInit init;
  init.tau0 = select_tau0_private(data.y, budget_init.epsilon, mode, rng);
  init.beta0 = init_ridge_huber(data, init.tau0.tau0, budget_init, rng);
  return init;
}

FitResult fit_dp_huber(const RegressionData& data, const LowDimFitConfig& config, Rng& rng) {
  if (config.beta0.size() != 0 && config.beta0.size() != data.p()) {
    throw std::invalid_argument("fit_dp_huber: beta0 dimension mismatch");
  }
  if (!(config.tau > 0.0) || !(config.gamma > 0.0) || !(config.eta0 > 0.0) || config.T <= 0) {
    throw std::invalid_argument("fit_dp_huber: tau, gamma, eta0, T must be positive");
  }
  NoiseScaleReport report;
  if (config.noise_scale_override) {
    report.sigma = *config.noise_scale_override;
    report.rule = config.budget.kind == BudgetKind::Gdp ? CompositionRule::GdpComposition
                                                        : CompositionRule::StandardComposition;
    report.per_iteration_budget = config.budget;
  } else {
    report = noise_scale_gd(config.budget, config.T, config.gamma, config.tau, data.n());
  }
  const Vector weights = row_clip_weights(data, ClipParam(config.gamma, NormMode::L2));
  Vector beta = config.beta0.size() == data.p() ? config.beta0 : Vector::Zero(data.p());
  FitResult result = run_gd_loop(data, config.tau, weights, config.eta0, config.T,
                                 std::move(beta), report.sigma, rng, config.record_trace);
  result.noise_report = report;
  return result;
}

double nonprivate_tau_lowdim(const RegressionData& data) {
  const Index n = data.n();
  const double mean = data.y.mean();
  const double sigma0 = std::sqrt((data.y.array() - mean).square().sum() / static_cast<double>(n));
  const double tau =
      0.2 * sigma0 *
      std::sqrt(static_cast<double>(n) / (static_cast<double>(data.p()) + std::log(n)));
  return tau > 0.0 ? tau : 2.0;  // constant responses: any tau leaves beta fixed
}

FitResult fit_huber_nonprivate(const RegressionData& data, double eta0, int T,
                               std::optional<double> tau) {
  if (!(eta0 > 0.0) || T <= 0) {
    throw std::invalid_argument("fit_huber_nonprivate: eta0 and T must be positive");
  }
  const double tau_eff = tau.value_or(nonprivate_tau_lowdim(data));
  if (!(tau_eff > 0.0)) throw std::invalid_argument("fit_huber_nonprivate: tau must be positive");
  const Vector weights = Vector::Ones(data.n());
  Rng unused(RngStream{});
  return run_gd_loop(data, tau_eff, weights, eta0, T, Vector::Zero(data.p()), 0.0, unused, false);
}

FitResult fit_huber_nonprivate(const RegressionData& data) {
  return fit_huber_nonprivate(data, 0.5, default_iterations(data.n()));
}

LowDimFitConfig default_lowdim_config(Index n, Index p, const PrivacyBudget& budget, double tau0) {
  if (n < 2) throw std::domain_error("default_lowdim_config: n must be >= 2");
  if (!(tau0 > 0.0)) throw std::domain_error("default_lowdim_config: tau0 must be positive");
  const double pl = static_cast<double>(p) + std::log(static_cast<double>(n));
  LowDimFitConfig config{
      /*tau=*/0.04 * tau0 * std::sqrt(static_cast<double>(n) * budget.epsilon / pl),
      /*gamma=*/0.5 * std::sqrt(pl),
      /*eta0=*/0.2,
      /*T=*/default_iterations(n),
      /*beta0=*/Vector(),
      /*budget=*/budget,
  };
  return config;
}

LowDimPipelineResult fit_dp_huber_pipeline(const RegressionData& data, const PrivacyBudget& total,
                                           Rng& rng, const LowDimPipelineOptions& options) {
  const double init_fraction =
      options.init_fraction.value_or(total.kind == BudgetKind::EpsDelta ? 1.0 / 6.0 : 1.0 / 8.0);
  if (!(init_fraction > 0.0 && init_fraction < 1.0)) {
    throw std::invalid_argument("fit_dp_huber_pipeline: init fraction must lie in (0, 1)");
  }
  const double fractions[] = {init_fraction, 1.0 - init_fraction};
  const auto parts = split_budget(total, fractions);

  LowDimPipelineResult out{
      {}, {}, {}, parts[0], parts[1], default_lowdim_config(data.n(), data.p(), total, 1.0)};
  const LowDimInit init = lowdim_private_init(data, parts[0], rng);
  out.tau0 = init.tau0;
  out.beta0 = init.beta0;

  LowDimFitConfig config = default_lowdim_config(data.n(), data.p(), total, init.tau0.tau0);
  if (options.tau) config.tau = *options.tau;
  if (options.gamma) config.gamma = *options.gamma;
  if (options.eta0) config.eta0 = *options.eta0;
  if (options.T) config.T = *options.T;
  config.record_trace = options.record_trace;
  config.budget = parts[1];  // main loop runs on its share; tau keeps total eps
  config.beta0 = init.beta0;
  out.config = config;

  out.fit = fit_dp_huber(data, config, rng);
  return out;
}

}  // namespace dphuber
