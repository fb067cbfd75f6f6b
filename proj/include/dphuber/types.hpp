#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace dphuber {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Row-major so that per-row operations (residuals, norms, clipped updates)
// walk contiguous memory.
using Matrix = MatrixX<double>;
using Vector = VectorX<double>;
using Index = Eigen::Index;

// Thrown when an iterative routine diverges or fails to converge.  The CLI
// maps this family to exit code 3; input/usage problems map to exit code 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Design matrix with a mandatory intercept column plus the response vector.
// Column 0 must be identically one; every fit in the library consumes this.
struct RegressionData {
  Matrix x;  // n x p, column 0 == 1
  Vector y;  // n

  RegressionData(Matrix x_in, Vector y_in) : x(std::move(x_in)), y(std::move(y_in)) {
    if (x.rows() < 1 || x.cols() < 1) {
      throw std::invalid_argument("RegressionData: need n >= 1 and p >= 1");
    }
    if (x.rows() != y.size()) {
      throw std::invalid_argument("RegressionData: x has " + std::to_string(x.rows()) +
                                  " rows but y has " + std::to_string(y.size()));
    }
    for (Index i = 0; i < x.rows(); ++i) {
      if (x(i, 0) != 1.0) {
        throw std::invalid_argument("RegressionData: column 0 must be identically 1 (row " +
                                    std::to_string(i) + ")");
      }
    }
  }

  Index n() const { return x.rows(); }
  Index p() const { return x.cols(); }
};

// Prepends the intercept column to a raw covariate block.
inline RegressionData make_regression_data(const Matrix& covariates, Vector y) {
  Matrix x(covariates.rows(), covariates.cols() + 1);
  x.col(0).setOnes();
  if (covariates.cols() > 0) {
    x.rightCols(covariates.cols()) = covariates;
  }
  return RegressionData(std::move(x), std::move(y));
}

}  // namespace dphuber
