#include "dphuber/huber.hpp"

#include <stdexcept>
#include <string>

namespace dphuber {

namespace {

void check_beta_dim(const RegressionData& data, const Eigen::Ref<const Vector>& beta,
                    const char* where) {
  if (beta.size() != data.p()) {
    throw std::invalid_argument(std::string(where) + ": beta has " + std::to_string(beta.size()) +
                                " entries, expected " + std::to_string(data.p()));
  }
}

}  // namespace

double empirical_loss(const RegressionData& data, const Eigen::Ref<const Vector>& beta,
                      double tau) {
  check_beta_dim(data, beta, "empirical_loss");
  const Vector r = data.y - data.x * beta;
  // Kahan-compensated accumulation.
  double sum = 0.0, comp = 0.0;
  for (Index i = 0; i < r.size(); ++i) {
    const double term = huber_loss(r[i], tau) - comp;
    const double next = sum + term;
    comp = (next - sum) - term;
    sum = next;
  }
  return sum / static_cast<double>(data.n());
}

Vector row_clip_weights(const RegressionData& data, const ClipParam& clip) {
  Vector w(data.n());
  for (Index i = 0; i < data.n(); ++i) {
    const double t = clip.norm_mode == NormMode::L2 ? data.x.row(i).norm()
                                                    : data.x.row(i).cwiseAbs().maxCoeff();
    w[i] = clip_weight(t, clip.gamma);
  }
  return w;
}

Vector clipped_gradient(const RegressionData& data, const Eigen::Ref<const Vector>& beta,
                        double tau, const ClipParam& clip) {
  return clipped_gradient_weighted(data, beta, tau, row_clip_weights(data, clip));
}

Vector clipped_gradient_weighted(const RegressionData& data, const Eigen::Ref<const Vector>& beta,
                                 double tau, const Eigen::Ref<const Vector>& weights) {
  check_beta_dim(data, beta, "clipped_gradient");
  if (weights.size() != data.n()) {
    throw std::invalid_argument("clipped_gradient: weights/rows mismatch");
  }
  const Vector r = data.y - data.x * beta;
  Vector g = Vector::Zero(data.p());
  Vector comp = Vector::Zero(data.p());
  for (Index i = 0; i < data.n(); ++i) {
    const double c = huber_score(r[i], tau) * weights[i];
    if (c == 0.0) continue;
    // Kahan step, vectorised over the coordinates of row i.
    const auto term = (c * data.x.row(i).transpose().array()) - comp.array();
    const Vector next = (g.array() + term).matrix();
    comp = ((next - g).array() - term).matrix();
    g = next;
  }
  return g / static_cast<double>(data.n());
}

}  // namespace dphuber
