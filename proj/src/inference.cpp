#include "dphuber/inference.hpp"

#include "dphuber/huber.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace dphuber {

namespace {

// Symmetric matrix with i.i.d. N(0,1) upper-triangular and diagonal entries,
// mirrored below; drawn row by row for determinism.
Matrix symmetric_gaussian(Index p, Rng& rng) {
  Matrix e(p, p);
  for (Index i = 0; i < p; ++i) {
    for (Index j = i; j < p; ++j) {
      const double z = rng.normal();
      e(i, j) = z;
      e(j, i) = z;
    }
  }
  return e;
}

Matrix weighted_second_moment(const RegressionData& data, const Vector& row_scale) {
  // (1/n) sum_i row_scale_i^2 x_i x_i', assembled as (S X)'(S X)/n.
  Matrix scaled = data.x;
  for (Index i = 0; i < data.n(); ++i) scaled.row(i) *= row_scale[i];
  Matrix m = scaled.transpose() * scaled / static_cast<double>(data.n());
  return ((m + m.transpose()) / 2.0).eval();
}

}  // namespace

double sigma_hat_noise_scale(const PrivacyBudget& budget, double gamma1, Index n) {
  if (!(gamma1 > 0.0) || n < 1) {
    throw std::domain_error("sigma_hat_noise_scale: gamma1 and n must be positive");
  }
  const double base = 2.0 * gamma1 * gamma1 / (static_cast<double>(n) * budget.epsilon);
  if (budget.kind == BudgetKind::Gdp) return base;
  return base * std::sqrt(2.0 * std::log(1.25 / budget.delta));
}

double omega_hat_noise_scale(const PrivacyBudget& budget, double gamma1, double tau1, Index n) {
  if (!(tau1 > 0.0)) throw std::domain_error("omega_hat_noise_scale: tau1 must be positive");
  return sigma_hat_noise_scale(budget, gamma1, n) * tau1 * tau1;
}

Matrix private_sigma_hat(const RegressionData& data, double gamma1, double varsigma1, Rng& rng) {
  if (varsigma1 < 0.0) throw std::domain_error("private_sigma_hat: varsigma1 must be >= 0");
  const Vector w = row_clip_weights(data, ClipParam(gamma1, NormMode::L2));
  Matrix m = weighted_second_moment(data, w);
  if (varsigma1 > 0.0) m += varsigma1 * symmetric_gaussian(data.p(), rng);
  return m;
}

Matrix private_omega_hat(const RegressionData& data, const Eigen::Ref<const Vector>& beta,
                         double tau1, double gamma1, double varsigma2, Rng& rng) {
  if (varsigma2 < 0.0) throw std::domain_error("private_omega_hat: varsigma2 must be >= 0");
  if (beta.size() != data.p()) throw std::invalid_argument("private_omega_hat: beta dimension");
  const Vector w = row_clip_weights(data, ClipParam(gamma1, NormMode::L2));
  const Vector r = data.y - data.x * beta;
  Vector scale(data.n());
  for (Index i = 0; i < data.n(); ++i) scale[i] = std::abs(huber_score(r[i], tau1)) * w[i];
  Matrix m = weighted_second_moment(data, scale);
  if (varsigma2 > 0.0) m += varsigma2 * symmetric_gaussian(data.p(), rng);
  return m;
}

Matrix psd_project(const Matrix& a, double zeta) {
  if (!(zeta > 0.0)) throw std::domain_error("psd_project: zeta must be positive");
  if (a.rows() != a.cols()) throw std::invalid_argument("psd_project: matrix must be square");
  const Eigen::MatrixXd sym = (a + a.transpose()) / 2.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  if (eig.info() != Eigen::Success) {
    throw NumericalError("psd_project: eigendecomposition failed");
  }
  Eigen::VectorXd lambda = eig.eigenvalues();
  for (Index i = 0; i < lambda.size(); ++i) lambda[i] = std::max(lambda[i], zeta);
  Eigen::MatrixXd out =
      eig.eigenvectors() * lambda.asDiagonal() * eig.eigenvectors().transpose();
  out = (out + out.transpose()) / 2.0;
  return out;
}

Matrix private_xi(const RegressionData& data, const Eigen::Ref<const Vector>& beta,
                  const InferenceConfig& config, Rng& rng) {
  PrivacyBudget b_sigma = config.budget_infer;
  PrivacyBudget b_omega = config.budget_infer;
  if (config.convention == InferenceBudgetConvention::SplitHalf) {
    const double halves[] = {0.5, 0.5};
    const auto parts = split_budget(config.budget_infer, halves);
    b_sigma = parts[0];
    b_omega = parts[1];
  }
  const double vs1 = sigma_hat_noise_scale(b_sigma, config.gamma1, data.n());
  const double vs2 = omega_hat_noise_scale(b_omega, config.gamma1, config.tau1, data.n());

  const Matrix sigma_plus =
      psd_project(private_sigma_hat(data, config.gamma1, std::isfinite(vs1) ? vs1 : 0.0, rng),
                  config.zeta);
  const Matrix omega_plus = psd_project(
      private_omega_hat(data, beta, config.tau1, config.gamma1, std::isfinite(vs2) ? vs2 : 0.0, rng),
      config.zeta);

  // lambda_min(sigma_plus) >= zeta > 0, so the solve is well posed.
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(sigma_plus);
  const Eigen::MatrixXd inv = ldlt.solve(Eigen::MatrixXd::Identity(data.p(), data.p()));
  Matrix xi = inv * omega_plus * inv;
  xi = ((xi + xi.transpose()) / 2.0).eval();
  return xi;
}

CiResult confidence_intervals(const Eigen::Ref<const Vector>& beta, const Matrix& xi, Index n,
                              double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::domain_error("confidence_intervals: alpha must lie in (0, 1)");
  }
  if (xi.rows() != beta.size() || xi.cols() != beta.size()) {
    throw std::invalid_argument("confidence_intervals: dimension mismatch");
  }
  if (n < 1) throw std::domain_error("confidence_intervals: n must be >= 1");
  const double z = normal_quantile(1.0 - alpha / 2.0);
  CiResult out{xi, Vector(beta.size()), Vector(beta.size()), alpha};
  for (Index j = 0; j < beta.size(); ++j) {
    const double v = xi(j, j);
    if (v < 0.0) {
      throw std::domain_error("confidence_intervals: negative diagonal entry in Xi");
    }
    const double half = z * std::sqrt(v / static_cast<double>(n));
    out.lower[j] = beta[j] - half;
    out.upper[j] = beta[j] + half;
  }
  return out;
}

// Wichura (1988), algorithm AS 241, PPND16.
double normal_quantile(double prob) {
  if (!(prob > 0.0 && prob < 1.0)) {
    throw std::domain_error("normal_quantile: prob must lie in (0, 1)");
  }
  const double q = prob - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
               1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
             1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
           (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
               5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
             4.2313330701600911252e1) * r + 1.0);
  }
  double r = q < 0.0 ? prob : 1.0 - prob;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    value = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
              4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
              2.05319162663775882187e0) * r + 1.0);
  } else {
    r -= 5.0;
    value = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
              5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
  }
  return q < 0.0 ? -value : value;
}

InferenceConfig default_inference_config(Index n, Index p, const PrivacyBudget& budget_main,
                                         const PrivacyBudget& budget_infer, double tau0,
                                         double alpha) {
  if (n < 2) throw std::domain_error("default_inference_config: n must be >= 2");
  if (!(tau0 > 0.0)) throw std::domain_error("default_inference_config: tau0 must be positive");
  const double pl = static_cast<double>(p) + std::log(static_cast<double>(n));
  InferenceConfig config{
      /*tau1=*/0.95 * tau0 * std::sqrt(static_cast<double>(n) * budget_main.epsilon / pl),
      /*gamma1=*/0.5 * std::sqrt(pl),
      /*zeta=*/1e-4,
      /*alpha=*/alpha,
      /*budget_infer=*/budget_infer,
  };
  return config;
}

}  // namespace dphuber
