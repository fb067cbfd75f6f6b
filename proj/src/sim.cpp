#include "dphuber/sim.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

namespace dphuber {

namespace {

double draw_design_entry(DesignKind design, Rng& rng) {
  switch (design) {
    case DesignKind::UniformIID:
      return (2.0 * rng.uniform() - 1.0) * std::sqrt(3.0);  // Uniform(-sqrt3, sqrt3), variance 1
    case DesignKind::GaussianIID:
    case DesignKind::GaussianAR:
      return rng.normal();
  }
  return 0.0;
}

double draw_noise(NoiseKind noise, Rng& rng) {
  return noise == NoiseKind::StdNormal ? rng.normal() : rng.student_t(kStudentTDof);
}

Vector draw_responses(const Matrix& x, const Vector& beta_star, double b, NoiseKind noise,
                      Rng& rng) {
  Vector y = x * beta_star;
  const double sb = std::sqrt(b);
  for (Index i = 0; i < y.size(); ++i) y[i] += sb * draw_noise(noise, rng);
  return y;
}

int resolve_workers(const ExperimentSpec& spec) {
  int w = spec.workers;
  if (w <= 0) w = static_cast<int>(std::thread::hardware_concurrency());
  if (w <= 0) w = 1;
  return std::min<int>(w, std::max(1, spec.reps));
}

struct RepOutcome {
  double rel_error = std::numeric_limits<double>::quiet_NaN();
  double coverage = 0.0;
  double mean_width = 0.0;
};

template <typename RepFn>
ExperimentSummary run_parallel(const ExperimentSpec& spec, bool with_coverage, RepFn one_rep) {
  if (spec.reps < 1) throw std::invalid_argument("run_experiment: reps must be >= 1");
  const auto start = std::chrono::steady_clock::now();

  std::vector<RepOutcome> outcomes(static_cast<std::size_t>(spec.reps));
  std::vector<std::string> failures;
  std::mutex failures_mutex;
  std::atomic<int> next{0};

  auto work = [&]() {
    for (;;) {
      const int rep = next.fetch_add(1);
      if (rep >= spec.reps) return;
      const RngStream stream = RngStream{spec.seed, 0}.substream(static_cast<std::uint64_t>(rep));
      try {
        outcomes[static_cast<std::size_t>(rep)] = one_rep(stream);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(failures_mutex);
        failures.push_back("rep " + std::to_string(rep) + ": " + e.what());
      }
    }
  };

  const int workers = resolve_workers(spec);
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int i = 0; i < workers; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  ExperimentSummary summary;
  summary.per_rep_errors.resize(static_cast<std::size_t>(spec.reps));
  double log_sum = 0.0, cov_sum = 0.0, width_sum = 0.0;
  int ok = 0;
  for (int rep = 0; rep < spec.reps; ++rep) {
    const RepOutcome& out = outcomes[static_cast<std::size_t>(rep)];
    summary.per_rep_errors[static_cast<std::size_t>(rep)] = out.rel_error;
    if (std::isnan(out.rel_error)) continue;
    ++ok;
    log_sum += std::log(std::max(out.rel_error, 1e-300));
    cov_sum += out.coverage;
    width_sum += out.mean_width;
  }
  summary.failed_reps = spec.reps - ok;
  summary.failure_messages = std::move(failures);
  // The benchmarks report no failures; tolerating more than 1% would mask bugs.
  if (summary.failed_reps * 100 > spec.reps) {
    std::string detail = summary.failure_messages.empty() ? "" : " (" + summary.failure_messages[0] + ")";
    throw NumericalError("run_experiment: " + std::to_string(summary.failed_reps) + " of " +
                         std::to_string(spec.reps) + " replications failed" + detail);
  }
  if (ok > 0) {
    summary.mean_log_rel_error = log_sum / ok;
    double ss = 0.0;
    for (double err : summary.per_rep_errors) {
      if (std::isnan(err)) continue;
      const double d = std::log(std::max(err, 1e-300)) - summary.mean_log_rel_error;
      ss += d * d;
    }
    summary.sd = ok > 1 ? std::sqrt(ss / (ok - 1)) : 0.0;
    if (with_coverage) {
      summary.coverage = cov_sum / ok;
      summary.mean_width = width_sum / ok;
    }
  }
  summary.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return summary;
}

}  // namespace

std::pair<RegressionData, Vector> gen_lowdim_data(const ExperimentSpec& spec, Rng& rng) {
  if (spec.n < 1 || spec.p < 1) throw std::invalid_argument("gen_lowdim_data: need n, p >= 1");
  Vector beta_star(spec.p);
  for (Index j = 0; j < spec.p; ++j) beta_star[j] = rng.uniform() < 0.5 ? spec.a : -spec.a;

  Matrix x(spec.n, spec.p);
  x.col(0).setOnes();
  for (Index i = 0; i < spec.n; ++i) {
    if (spec.design == DesignKind::GaussianAR) {
      double prev = 0.0;
      for (Index j = 1; j < spec.p; ++j) {
        const double z = rng.normal();
        prev = j == 1 ? z
                      : kArCorrelation * prev +
                            std::sqrt(1.0 - kArCorrelation * kArCorrelation) * z;
        x(i, j) = prev;
      }
    } else {
      for (Index j = 1; j < spec.p; ++j) x(i, j) = draw_design_entry(spec.design, rng);
    }
  }
  Vector y = draw_responses(x, beta_star, spec.b, spec.noise, rng);
  return {RegressionData(std::move(x), std::move(y)), std::move(beta_star)};
}

std::pair<RegressionData, Vector> gen_highdim_data(const ExperimentSpec& spec, Rng& rng) {
  if (spec.n < 1 || spec.p < 2) throw std::invalid_argument("gen_highdim_data: need n >= 1, p >= 2");
  if (spec.s_star < 1 || spec.s_star > spec.p - 1) {
    throw std::invalid_argument("gen_highdim_data: need 1 <= s_star <= p - 1");
  }
  Vector beta_star = Vector::Zero(spec.p);
  for (Index j = 1; j <= spec.s_star; ++j) beta_star[j] = rng.uniform() < 0.5 ? spec.a : -spec.a;

  Matrix x(spec.n, spec.p);
  x.col(0).setOnes();
  const double rho = spec.design == DesignKind::GaussianAR ? kArCorrelation : 0.0;
  const double innovation = std::sqrt(1.0 - rho * rho);
  for (Index i = 0; i < spec.n; ++i) {
    double prev = 0.0;
    for (Index j = 1; j < spec.p; ++j) {
      const double z = spec.design == DesignKind::UniformIID
                           ? (2.0 * rng.uniform() - 1.0) * std::sqrt(3.0)
                           : rng.normal();
      prev = j == 1 ? z : rho * prev + innovation * z;
      x(i, j) = prev;
    }
  }
  Vector y = draw_responses(x, beta_star, spec.b, spec.noise, rng);
  return {RegressionData(std::move(x), std::move(y)), std::move(beta_star)};
}

double rel_l2_error(const Eigen::Ref<const Vector>& beta_hat,
                    const Eigen::Ref<const Vector>& beta_star, bool slope_only) {
  if (beta_hat.size() != beta_star.size()) {
    throw std::invalid_argument("rel_l2_error: dimension mismatch");
  }
  const Index from = slope_only ? 1 : 0;
  const Index len = beta_star.size() - from;
  if (len < 1) throw std::invalid_argument("rel_l2_error: empty comparison");
  const double denom = beta_star.segment(from, len).norm();
  if (denom == 0.0) throw std::domain_error("rel_l2_error: beta* must be nonzero");
  return (beta_hat.segment(from, len) - beta_star.segment(from, len)).norm() / denom;
}

ExperimentSummary run_experiment(const ExperimentSpec& spec) {
  const bool highdim = spec.regime == Regime::HighDim;
  return run_parallel(spec, /*with_coverage=*/false, [&](const RngStream& stream) {
    Rng data_rng(stream.substream(0));
    auto [data, beta_star] =
        highdim ? gen_highdim_data(spec, data_rng) : gen_lowdim_data(spec, data_rng);
    Vector beta;
    if (spec.budget) {
      Rng fit_rng(stream.substream(1));
      if (highdim) {
        beta = fit_dp_sparse_huber_pipeline(data, spec.s_star, *spec.budget, fit_rng).fit.beta;
      } else {
        beta = fit_dp_huber_pipeline(data, *spec.budget, fit_rng).fit.beta;
      }
    } else {
      if (highdim) {
        const int s = static_cast<int>(std::ceil(1.2 * spec.s_star));
        beta = fit_sparse_huber_nonprivate(data, s).beta;
      } else {
        beta = fit_huber_nonprivate(data).beta;
      }
    }
    RepOutcome out;
    out.rel_error = rel_l2_error(beta, beta_star, /*slope_only=*/highdim);
    return out;
  });
}

ExperimentSummary coverage_experiment(const ExperimentSpec& spec, double alpha,
                                      InferenceBudgetConvention convention) {
  if (spec.regime != Regime::LowDim) {
    throw std::invalid_argument("coverage_experiment: LowDim regime required");
  }
  if (!spec.budget || spec.budget->kind != BudgetKind::EpsDelta) {
    throw std::invalid_argument("coverage_experiment: EpsDelta budget required");
  }
  const PrivacyBudget total = *spec.budget;
  const double fractions[] = {1.0 / 6.0, 4.0 / 6.0, 1.0 / 6.0};
  const auto parts = split_budget(total, fractions);

  return run_parallel(spec, /*with_coverage=*/true, [&, total, parts](const RngStream& stream) {
    Rng data_rng(stream.substream(0));
    auto [data, beta_star] = gen_lowdim_data(spec, data_rng);

    Rng fit_rng(stream.substream(1));
    const LowDimInit init = lowdim_private_init(data, parts[0], fit_rng);
    LowDimFitConfig config = default_lowdim_config(data.n(), data.p(), total, init.tau0.tau0);
    config.budget = parts[1];
    config.beta0 = init.beta0;
    const FitResult fit = fit_dp_huber(data, config, fit_rng);

    Rng infer_rng(stream.substream(2));
    InferenceConfig icfg =
        default_inference_config(data.n(), data.p(), parts[1], parts[2], init.tau0.tau0, alpha);
    icfg.convention = convention;
    const Matrix xi = private_xi(data, fit.beta, icfg, infer_rng);
    const CiResult ci = confidence_intervals(fit.beta, xi, data.n(), alpha);

    RepOutcome out;
    out.rel_error = rel_l2_error(fit.beta, beta_star);
    int covered = 0;
    double width = 0.0;
    for (Index j = 0; j < data.p(); ++j) {
      if (ci.lower[j] <= beta_star[j] && beta_star[j] <= ci.upper[j]) ++covered;
      width += ci.upper[j] - ci.lower[j];
    }
    out.coverage = static_cast<double>(covered) / static_cast<double>(data.p());
    out.mean_width = width / static_cast<double>(data.p());
    return out;
  });
}

}  // namespace dphuber
