#pragma once

#include "dphuber/types.hpp"

#include <cmath>
#include <stdexcept>

namespace dphuber {

// Huber loss: u^2/2 inside |u| <= tau, linear continuation tau|u| - tau^2/2
// outside.  Continuously differentiable in u.
template <typename Scalar>
Scalar huber_loss(Scalar u, Scalar tau) {
  if (!std::isfinite(u) || !std::isfinite(tau) || tau <= Scalar(0)) {
    throw std::domain_error("huber_loss: requires finite u and finite tau > 0");
  }
  const Scalar a = std::abs(u);
  if (a <= tau) return u * u / Scalar(2);
  return tau * a - tau * tau / Scalar(2);
}

// Derivative of the Huber loss: sign(u) * min{|u|, tau}.  Bounded by tau,
// odd, and 1-Lipschitz; this bound is what caps gradient sensitivity.
template <typename Scalar>
Scalar huber_score(Scalar u, Scalar tau) {
  if (!std::isfinite(u) || !std::isfinite(tau) || tau <= Scalar(0)) {
    throw std::domain_error("huber_score: requires finite u and finite tau > 0");
  }
  const Scalar a = std::abs(u);
  if (a <= tau) return u;
  return u > Scalar(0) ? tau : -tau;
}

// Row clipping weight min{gamma/t, 1} with the convention w(0) = 1; the
// clipped vector t*w is 0 either way, and weight 1 is the continuous
// extension adopted throughout.  gamma = +inf disables clipping.
template <typename Scalar>
Scalar clip_weight(Scalar t, Scalar gamma) {
  if (std::isnan(gamma) || gamma <= Scalar(0)) {
    throw std::domain_error("clip_weight: requires gamma > 0");
  }
  if (!(t >= Scalar(0))) {
    throw std::domain_error("clip_weight: requires t >= 0");
  }
  return t <= gamma ? Scalar(1) : gamma / t;
}

enum class NormMode { L2, LInf };

// Houses the truncation level gamma; L2 is the low-dimensional variant,
// LInf the sparse one.
struct ClipParam {
  double gamma;
  NormMode norm_mode = NormMode::L2;

  ClipParam(double gamma_in, NormMode mode = NormMode::L2) : gamma(gamma_in), norm_mode(mode) {
    if (std::isnan(gamma) || gamma <= 0.0) {
      throw std::invalid_argument("ClipParam: gamma must be positive");
    }
  }
};

// Mean Huber loss of the residuals y - x beta.  Accumulated with compensated
// summation so table-scale runs (n = 1e4) stay reproducible.
double empirical_loss(const RegressionData& data, const Eigen::Ref<const Vector>& beta,
                      double tau);

// Per-row clipping weights w_gamma(||x_i||) for the requested norm.
Vector row_clip_weights(const RegressionData& data, const ClipParam& clip);

// Ascent direction (1/n) sum_i psi_tau(y_i - x_i' beta) x_i w_gamma(||x_i||),
// exactly as it appears inside the noisy gradient update; equals the negative
// gradient of empirical_loss when clipping is inactive.  Each summand has
// l2-norm (resp. linf-norm) at most gamma * tau, the bound the privacy
// accounting relies on.
Vector clipped_gradient(const RegressionData& data, const Eigen::Ref<const Vector>& beta,
                        double tau, const ClipParam& clip);

// Same, with the (iteration-invariant) weights precomputed by the caller.
Vector clipped_gradient_weighted(const RegressionData& data, const Eigen::Ref<const Vector>& beta,
                                 double tau, const Eigen::Ref<const Vector>& weights);

}  // namespace dphuber
