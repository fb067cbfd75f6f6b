#pragma once

#include "dphuber/highdim.hpp"
#include "dphuber/inference.hpp"
#include "dphuber/lowdim.hpp"
#include "dphuber/privacy.hpp"
#include "dphuber/rng.hpp"
#include "dphuber/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dphuber {

enum class Regime { LowDim, HighDim };
enum class DesignKind { GaussianIID, UniformIID, GaussianAR };
enum class NoiseKind { StdNormal, StudentT };

inline constexpr double kStudentTDof = 2.25;
inline constexpr double kArCorrelation = 0.1;

// One benchmark cell: data-generating design plus the estimator to evaluate.
struct ExperimentSpec {
  Regime regime = Regime::LowDim;
  Index n = 0;
  Index p = 0;
  int s_star = 0;  // high-dimensional true sparsity
  double a = 1.0;  // signal magnitude: coefficients are +/- a
  double b = 1.0;  // noise scale: y = x'beta* + sqrt(b) eps
  DesignKind design = DesignKind::GaussianIID;
  NoiseKind noise = NoiseKind::StdNormal;
  std::optional<PrivacyBudget> budget;  // nullopt => non-private benchmark
  int reps = 1;
  std::uint64_t seed = 0;
  int workers = 0;  // 0 => hardware concurrency
};

struct ExperimentSummary {
  double mean_log_rel_error = 0.0;
  double sd = 0.0;                     // sample sd of the per-rep log errors
  std::vector<double> per_rep_errors;  // relative l2 errors; NaN marks a failed rep
  std::optional<double> coverage;
  std::optional<double> mean_width;
  double wall_time_seconds = 0.0;
  int failed_reps = 0;
  std::vector<std::string> failure_messages;
};

// Intercept column of ones, remaining columns i.i.d. per design; all
// coefficients +/- a with equal probability; y = X beta* + sqrt(b) eps.
std::pair<RegressionData, Vector> gen_lowdim_data(const ExperimentSpec& spec, Rng& rng);

// Non-intercept block from the AR(1) recursion x_1 = z_1,
// x_j = 0.1 x_{j-1} + sqrt(1 - 0.01) z_j (exactly the law N(0, Psi) with
// Psi_{jk} = 0.1^{|j-k|}, O(p) per row); beta* supported on the first s_star
// non-intercept coordinates.
std::pair<RegressionData, Vector> gen_highdim_data(const ExperimentSpec& spec, Rng& rng);

// ||beta_hat - beta*||_2 / ||beta*||_2; slope_only drops the intercept
// coordinate from both vectors.
double rel_l2_error(const Eigen::Ref<const Vector>& beta_hat,
                    const Eigen::Ref<const Vector>& beta_star, bool slope_only = false);

// Runs spec.reps replications on disjoint substreams (parallel across
// workers), each: fresh data, full pipeline (private init + fit, or the
// non-private benchmark), log relative error.  Deterministic given the seed.
// Aborts if more than 1% of replications fail.
ExperimentSummary run_experiment(const ExperimentSpec& spec);

// Low-dimensional EpsDelta-only variant that also builds the privatized
// sandwich matrix and per-coordinate confidence intervals each replication,
// with the three-way budget split init : main : infer = 1/6 : 4/6 : 1/6.
ExperimentSummary coverage_experiment(const ExperimentSpec& spec, double alpha,
                                      InferenceBudgetConvention convention =
                                          InferenceBudgetConvention::PerObject);

}  // namespace dphuber
