#include "dphuber/privacy.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace dphuber {

PrivacyBudget PrivacyBudget::eps_delta(double epsilon, double delta) {
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("PrivacyBudget: epsilon must be positive");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("PrivacyBudget: delta must lie in (0, 1)");
  }
  return PrivacyBudget{BudgetKind::EpsDelta, epsilon, delta};
}

PrivacyBudget PrivacyBudget::gdp(double epsilon) {
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("PrivacyBudget: epsilon must be positive");
  }
  return PrivacyBudget{BudgetKind::Gdp, epsilon, 0.0};
}

const char* to_string(CompositionRule rule) {
  switch (rule) {
    case CompositionRule::StandardComposition: return "standard";
    case CompositionRule::AdvancedComposition: return "advanced";
    case CompositionRule::GdpComposition: return "gdp";
  }
  return "unknown";
}

NoiseScaleReport noise_scale_gd(const PrivacyBudget& budget, int T, double gamma, double tau,
                                Index n) {
  if (T <= 0) throw std::domain_error("noise_scale_gd: T must be >= 1");
  if (!(gamma > 0.0) || !(tau > 0.0) || n <= 0) {
    throw std::domain_error("noise_scale_gd: gamma, tau, n must be positive");
  }
  const double dT = static_cast<double>(T);
  const double base = 2.0 * gamma * tau / (static_cast<double>(n) * budget.epsilon);

  if (budget.kind == BudgetKind::Gdp) {
    NoiseScaleReport report;
    report.sigma = base * std::sqrt(dT);
    report.rule = CompositionRule::GdpComposition;
    report.per_iteration_budget = PrivacyBudget::gdp(budget.epsilon / std::sqrt(dT));
    return report;
  }

  const double eps = budget.epsilon;
  const double delta = budget.delta;
  const double sigma_standard = base * dT * std::sqrt(2.0 * std::log(1.25 * dT / delta));

  NoiseScaleReport report;
  report.sigma = sigma_standard;
  report.rule = CompositionRule::StandardComposition;
  report.per_iteration_budget = PrivacyBudget::eps_delta(eps / dT, delta / dT);

  // Advanced composition is only valid inside 0 < eps <= 1, 0 < delta <= 0.01.
  if (eps <= 1.0 && delta <= 0.01) {
    const double sigma_advanced =
        base * std::sqrt(5.0 * dT * std::log(2.0 / delta) * std::log(5.0 * dT / (2.0 * delta)));
    if (sigma_advanced < sigma_standard) {
      report.sigma = sigma_advanced;
      report.rule = CompositionRule::AdvancedComposition;
      report.per_iteration_budget = PrivacyBudget::eps_delta(
          eps * std::sqrt(2.0 / (5.0 * dT * std::log(2.0 / delta))), delta / (2.0 * dT));
    }
  }
  return report;
}

double noisyht_scale(double per_iter_epsilon, double per_iter_delta, int s, double lambda) {
  if (!(per_iter_epsilon > 0.0) || !(lambda > 0.0) || s <= 0) {
    throw std::domain_error("noisyht_scale: epsilon, lambda, s must be positive");
  }
  if (!(per_iter_delta > 0.0 && per_iter_delta < 1.0)) {
    throw std::domain_error("noisyht_scale: delta must lie in (0, 1)");
  }
  return 2.0 * lambda * std::sqrt(5.0 * static_cast<double>(s) * std::log(1.0 / per_iter_delta)) /
         per_iter_epsilon;
}

ConstraintCheck validate_noisyht_constraints(double epsilon, double delta, long s) {
  ConstraintCheck check;
  std::string msg;
  if (!(epsilon > 0.0 && epsilon <= 0.5)) {
    msg += "epsilon " + std::to_string(epsilon) + " outside (0, 0.5]";
  }
  if (!(delta > 0.0 && delta <= 0.011)) {
    if (!msg.empty()) msg += "; ";
    msg += "delta " + std::to_string(delta) + " outside (0, 0.011]";
  }
  if (s < 10) {
    if (!msg.empty()) msg += "; ";
    msg += "s " + std::to_string(s) + " below 10";
  }
  if (!msg.empty()) {
    check.valid = false;
    check.message = "NoisyHT guarantee hypothesis violated: " + msg;
  }
  return check;
}

std::vector<PrivacyBudget> split_budget(const PrivacyBudget& total,
                                        std::span<const double> fractions) {
  double sum = 0.0;
  for (double f : fractions) {
    if (f < 0.0) throw std::invalid_argument("split_budget: fractions must be nonnegative");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw std::invalid_argument("split_budget: fractions must sum to 1");
  }
  std::vector<PrivacyBudget> parts;
  parts.reserve(fractions.size());
  for (double f : fractions) {
    if (total.kind == BudgetKind::EpsDelta) {
      parts.push_back(PrivacyBudget::eps_delta(f * total.epsilon, f * total.delta));
    } else {
      parts.push_back(PrivacyBudget::gdp(std::sqrt(f) * total.epsilon));
    }
  }
  return parts;
}

Vector sample_gaussian_vector(double scale, Index dim, Rng& rng) {
  if (scale < 0.0) throw std::domain_error("sample_gaussian_vector: scale must be >= 0");
  if (dim <= 0) throw std::domain_error("sample_gaussian_vector: dim must be >= 1");
  if (scale == 0.0) return Vector::Zero(dim);
  Vector v(dim);
  for (Index i = 0; i < dim; ++i) v[i] = scale * rng.normal();
  return v;
}

double sample_laplace(double scale, Rng& rng) {
  if (!(scale > 0.0)) throw std::domain_error("sample_laplace: scale must be positive");
  return rng.laplace(scale);
}

}  // namespace dphuber
