// Command-line surface: fit models on CSV data, produce private confidence
// intervals, and run benchmark experiments from JSON specs.

#include "dphuber/csv.hpp"
#include "dphuber/highdim.hpp"
#include "dphuber/inference.hpp"
#include "dphuber/lowdim.hpp"
#include "dphuber/sim.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>

namespace {

using dphuber::Index;
using dphuber::PrivacyBudget;
using dphuber::Vector;
using nlohmann::json;

constexpr int kExitUser = 2;
constexpr int kExitNumerical = 3;

struct BudgetFlags {
  std::optional<double> epsilon;
  std::optional<double> delta;
  std::optional<double> gdp_epsilon;

  void attach(CLI::App* cmd) {
    cmd->add_option("--epsilon", epsilon, "(eps, delta)-DP privacy budget epsilon");
    cmd->add_option("--delta", delta, "(eps, delta)-DP privacy budget delta (default 10 n^-1.1)");
    cmd->add_option("--gdp-epsilon", gdp_epsilon, "Gaussian differential privacy budget");
  }

  bool any() const { return epsilon || delta || gdp_epsilon; }

  PrivacyBudget resolve(Index n) const {
    if (gdp_epsilon && (epsilon || delta)) {
      throw std::invalid_argument("pass either --epsilon/--delta or --gdp-epsilon, not both");
    }
    if (gdp_epsilon) return PrivacyBudget::gdp(*gdp_epsilon);
    if (!epsilon) throw std::invalid_argument("a privacy budget is required: --epsilon or --gdp-epsilon");
    const double d = delta ? *delta : dphuber::default_delta(n);
    if (!(d > 0.0 && d < 1.0)) {
      throw std::invalid_argument("resolved delta " + std::to_string(d) +
                                  " outside (0, 1); pass --delta explicitly");
    }
    return PrivacyBudget::eps_delta(*epsilon, d);
  }
};

struct SeedFlags {
  std::optional<std::uint64_t> seed;
  bool debug_seed = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--seed", seed, "root seed of the noise stream");
    cmd->add_flag("--debug-seed", debug_seed,
                  "emit an auto-generated seed in the output (voids the privacy guarantee "
                  "against anyone who learns it)");
  }

  // Returns the seed and whether it may appear in the output.  A seed the
  // caller supplied is theirs to know; an auto-generated one is emitted only
  // under --debug-seed.
  std::pair<std::uint64_t, bool> resolve() const {
    if (seed) return {*seed, true};
    std::random_device rd;
    const std::uint64_t s = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    if (debug_seed) {
      std::cerr << "warning: --debug-seed emits the noise seed; anyone who learns it can undo "
                   "the privacy protection of this output\n";
    }
    return {s, debug_seed};
  }
};

json budget_json(const PrivacyBudget& b) {
  json j;
  if (b.kind == dphuber::BudgetKind::EpsDelta) {
    j["framework"] = "eps_delta";
    j["epsilon"] = b.epsilon;
    j["delta"] = b.delta;
  } else {
    j["framework"] = "gdp";
    j["epsilon"] = b.epsilon;
  }
  return j;
}

json noise_report_json(const dphuber::NoiseScaleReport& r) {
  json j;
  j["sigma"] = r.sigma;
  j["rule"] = dphuber::to_string(r.rule);
  j["per_iteration_budget"] = budget_json(r.per_iteration_budget);
  return j;
}

json trace_json(const std::vector<dphuber::IterationStat>& trace) {
  json arr = json::array();
  for (const auto& t : trace) arr.push_back({{"grad_norm", t.grad_norm}, {"step_norm", t.step_norm}});
  return arr;
}

void emit(const json& out, const std::string& output_path) {
  const std::string text = out.dump(2) + "\n";
  if (!output_path.empty()) {
    std::ofstream f(output_path);
    if (!f) throw std::invalid_argument("cannot write to '" + output_path + "'");
    f << text;
  }
  std::cout << text;
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

// ---------------------------------------------------------------------------
// fit

struct FitArgs {
  std::string input, output, response;
  BudgetFlags budget;
  SeedFlags seed;
  std::optional<double> tau, gamma, eta0;
  std::optional<int> T;
  std::optional<double> init_fraction;
  bool trace = false;
};

int cmd_fit(const FitArgs& args) {
  const dphuber::CsvRegression reg = regression_from_csv(dphuber::read_csv(args.input), args.response);
  const PrivacyBudget budget = args.budget.resolve(reg.data.n());
  const auto [seed, emit_seed] = args.seed.resolve();

  dphuber::LowDimPipelineOptions options;
  options.tau = args.tau;
  options.gamma = args.gamma;
  options.eta0 = args.eta0;
  options.T = args.T;
  options.init_fraction = args.init_fraction;
  options.record_trace = args.trace;

  dphuber::Rng rng(dphuber::RngStream{seed, 0});
  const auto res = dphuber::fit_dp_huber_pipeline(reg.data, budget, rng, options);
  print_warnings(res.fit.warnings);

  json out;
  out["command"] = "fit";
  out["n"] = reg.data.n();
  out["p"] = reg.data.p();
  out["response"] = reg.response_column;
  out["columns"] = reg.design_columns;
  out["beta"] = std::vector<double>(res.fit.beta.data(), res.fit.beta.data() + res.fit.beta.size());
  json config;
  config["budget"] = budget_json(budget);
  config["budget_init"] = budget_json(res.budget_init);
  config["budget_main"] = budget_json(res.budget_main);
  config["tau0"] = res.tau0.tau0;
  config["tau"] = res.config.tau;
  config["gamma"] = res.config.gamma;
  config["eta0"] = res.config.eta0;
  config["T"] = res.config.T;
  config["lambda0"] = dphuber::kRidgeLambda0;
  out["config_used"] = config;
  out["noise_report"] = noise_report_json(*res.fit.noise_report);
  if (emit_seed) out["seed"] = seed;
  if (args.trace) out["trace"] = trace_json(res.fit.trace);
  emit(out, args.output);
  return 0;
}

// ---------------------------------------------------------------------------
// fit-sparse

struct FitSparseArgs {
  std::string input, output, response;
  BudgetFlags budget;
  SeedFlags seed;
  int s_star = 0;
  std::optional<int> s;
  std::optional<double> tau, gamma, eta0;
  std::optional<int> T;
  bool no_privacy = false;
  bool trace = false;
};

int cmd_fit_sparse(const FitSparseArgs& args) {
  const dphuber::CsvRegression reg = regression_from_csv(dphuber::read_csv(args.input), args.response);

  json out;
  out["command"] = "fit-sparse";
  out["n"] = reg.data.n();
  out["p"] = reg.data.p();
  out["response"] = reg.response_column;
  out["columns"] = reg.design_columns;
  out["s_star"] = args.s_star;

  if (args.no_privacy) {
    if (args.budget.any()) {
      throw std::invalid_argument("--no-privacy conflicts with privacy budget flags");
    }
    dphuber::SparseBenchmarkOptions options;
    if (args.eta0) options.eta0 = *args.eta0;
    if (args.T) options.T = *args.T;
    options.tau = args.tau;
    const int s = args.s.value_or(static_cast<int>(std::ceil(1.2 * args.s_star)));
    const dphuber::FitResult fit = fit_sparse_huber_nonprivate(reg.data, s, options);
    out["beta"] = std::vector<double>(fit.beta.data(), fit.beta.data() + fit.beta.size());
    json support = json::array();
    for (Index j = 0; j < fit.beta.size(); ++j) {
      if (fit.beta[j] != 0.0) support.push_back(reg.design_columns[static_cast<std::size_t>(j)]);
    }
    out["support"] = support;
    out["config_used"] = {{"private", false}, {"s", s}, {"eta0", options.eta0}};
    emit(out, args.output);
    return 0;
  }

  const PrivacyBudget budget = args.budget.resolve(reg.data.n());
  if (budget.kind != dphuber::BudgetKind::EpsDelta) {
    throw std::invalid_argument("fit-sparse requires an (eps, delta)-DP budget");
  }
  const auto [seed, emit_seed] = args.seed.resolve();

  dphuber::HighDimPipelineOptions options;
  options.s = args.s;
  options.tau = args.tau;
  options.gamma = args.gamma;
  options.eta0 = args.eta0;
  options.T = args.T;
  options.record_trace = args.trace;

  dphuber::Rng rng(dphuber::RngStream{seed, 0});
  const auto res = dphuber::fit_dp_sparse_huber_pipeline(reg.data, args.s_star, budget, rng, options);
  print_warnings(res.fit.warnings);

  out["beta"] = std::vector<double>(res.fit.beta.data(), res.fit.beta.data() + res.fit.beta.size());
  json support = json::array();
  for (Index j = 0; j < res.fit.beta.size(); ++j) {
    if (res.fit.beta[j] != 0.0) support.push_back(reg.design_columns[static_cast<std::size_t>(j)]);
  }
  out["support"] = support;
  json config;
  config["private"] = true;
  config["budget"] = budget_json(budget);
  config["budget_init"] = budget_json(res.budget_init);
  config["budget_main"] = budget_json(res.budget_main);
  config["tau0"] = res.init.tau0.tau0;
  config["tau"] = res.config.tau;
  config["gamma"] = res.config.gamma;
  config["eta0"] = res.config.eta0;
  config["T"] = res.config.T;
  config["s"] = res.config.s;
  out["config_used"] = config;
  out["noise_report"] = noise_report_json(*res.fit.noise_report);
  if (emit_seed) out["seed"] = seed;
  if (args.trace) out["trace"] = trace_json(res.fit.trace);
  emit(out, args.output);
  return 0;
}

// ---------------------------------------------------------------------------
// ci

struct CiArgs {
  std::string input, output, response;
  BudgetFlags budget;
  SeedFlags seed;
  double alpha = 0.05;
  bool split_half = false;
};

int cmd_ci(const CiArgs& args) {
  const dphuber::CsvRegression reg = regression_from_csv(dphuber::read_csv(args.input), args.response);
  const PrivacyBudget total = args.budget.resolve(reg.data.n());
  const auto [seed, emit_seed] = args.seed.resolve();

  const double fractions[] = {1.0 / 6.0, 4.0 / 6.0, 1.0 / 6.0};
  const auto parts = dphuber::split_budget(total, fractions);

  dphuber::Rng rng(dphuber::RngStream{seed, 0});
  const dphuber::LowDimInit init = lowdim_private_init(reg.data, parts[0], rng);
  dphuber::LowDimFitConfig config =
      dphuber::default_lowdim_config(reg.data.n(), reg.data.p(), total, init.tau0.tau0);
  config.budget = parts[1];
  config.beta0 = init.beta0;
  const dphuber::FitResult fit = fit_dp_huber(reg.data, config, rng);

  dphuber::InferenceConfig icfg = dphuber::default_inference_config(
      reg.data.n(), reg.data.p(), parts[1], parts[2], init.tau0.tau0, args.alpha);
  icfg.convention = args.split_half ? dphuber::InferenceBudgetConvention::SplitHalf
                                    : dphuber::InferenceBudgetConvention::PerObject;
  const dphuber::Matrix xi = private_xi(reg.data, fit.beta, icfg, rng);
  const dphuber::CiResult ci =
      dphuber::confidence_intervals(fit.beta, xi, reg.data.n(), args.alpha);

  json out;
  out["command"] = "ci";
  out["alpha"] = args.alpha;
  out["n"] = reg.data.n();
  out["p"] = reg.data.p();
  out["response"] = reg.response_column;
  json estimates = json::array();
  json diag = json::array();
  for (Index j = 0; j < fit.beta.size(); ++j) {
    estimates.push_back({{"name", reg.design_columns[static_cast<std::size_t>(j)]},
                         {"estimate", fit.beta[j]},
                         {"lower", ci.lower[j]},
                         {"upper", ci.upper[j]}});
    diag.push_back(xi(j, j));
  }
  out["estimates"] = estimates;
  out["xi_diagonal"] = diag;
  json config_used;
  config_used["budget_init"] = budget_json(parts[0]);
  config_used["budget_main"] = budget_json(parts[1]);
  config_used["budget_infer"] = budget_json(parts[2]);
  config_used["tau0"] = init.tau0.tau0;
  config_used["tau"] = config.tau;
  config_used["gamma"] = config.gamma;
  config_used["eta0"] = config.eta0;
  config_used["T"] = config.T;
  config_used["tau1"] = icfg.tau1;
  config_used["gamma1"] = icfg.gamma1;
  config_used["zeta"] = icfg.zeta;
  config_used["inference_budget_convention"] = args.split_half ? "split_half" : "per_object";
  out["config_used"] = config_used;
  out["noise_report"] = noise_report_json(*fit.noise_report);
  out["privacy_total"] = budget_json(total);
  if (emit_seed) out["seed"] = seed;
  emit(out, args.output);
  return 0;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  std::string spec_path;
  std::string out_dir = ".";
  std::optional<int> reps;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
};

void require_keys(const json& j, const std::vector<std::string>& allowed, const std::string& where) {
  std::string unknown;
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool found = false;
    for (const auto& k : allowed) {
      if (it.key() == k) {
        found = true;
        break;
      }
    }
    if (!found) {
      if (!unknown.empty()) unknown += ", ";
      unknown += it.key();
    }
  }
  if (!unknown.empty()) {
    throw std::invalid_argument("spec " + where + ": unknown field(s): " + unknown);
  }
}

template <typename T>
T required_field(const json& j, const std::string& key) {
  if (!j.contains(key)) throw std::invalid_argument("spec: missing required field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw std::invalid_argument("spec: field '" + key + "' has the wrong type");
  }
}

dphuber::ExperimentSpec parse_spec(const json& j, std::optional<double>* alpha) {
  require_keys(j,
               {"regime", "n", "p", "s_star", "a", "b", "design", "noise", "budget", "reps",
                "seed", "alpha", "workers"},
               "top level");
  dphuber::ExperimentSpec spec;

  const std::string regime = required_field<std::string>(j, "regime");
  if (regime == "lowdim") spec.regime = dphuber::Regime::LowDim;
  else if (regime == "highdim") spec.regime = dphuber::Regime::HighDim;
  else throw std::invalid_argument("spec: regime must be 'lowdim' or 'highdim'");

  spec.n = required_field<Index>(j, "n");
  spec.p = required_field<Index>(j, "p");
  spec.a = required_field<double>(j, "a");
  spec.b = required_field<double>(j, "b");
  spec.reps = required_field<int>(j, "reps");
  if (j.contains("seed")) spec.seed = required_field<std::uint64_t>(j, "seed");
  if (j.contains("workers")) spec.workers = required_field<int>(j, "workers");
  if (spec.regime == dphuber::Regime::HighDim) {
    spec.s_star = required_field<int>(j, "s_star");
  } else if (j.contains("s_star")) {
    spec.s_star = required_field<int>(j, "s_star");
  }

  const std::string design = required_field<std::string>(j, "design");
  if (design == "gaussian") spec.design = dphuber::DesignKind::GaussianIID;
  else if (design == "uniform") spec.design = dphuber::DesignKind::UniformIID;
  else if (design == "gaussian_ar") spec.design = dphuber::DesignKind::GaussianAR;
  else throw std::invalid_argument("spec: design must be gaussian, uniform, or gaussian_ar");

  const std::string noise = required_field<std::string>(j, "noise");
  if (noise == "normal") spec.noise = dphuber::NoiseKind::StdNormal;
  else if (noise == "student_t") spec.noise = dphuber::NoiseKind::StudentT;
  else throw std::invalid_argument("spec: noise must be normal or student_t");

  if (!j.contains("budget")) throw std::invalid_argument("spec: missing required field 'budget'");
  const json& b = j.at("budget");
  if (b.is_string()) {
    if (b.get<std::string>() != "non_private") {
      throw std::invalid_argument("spec: budget string must be 'non_private'");
    }
  } else if (b.is_object()) {
    require_keys(b, {"epsilon", "delta", "gdp_epsilon"}, "budget");
    if (b.contains("gdp_epsilon")) {
      if (b.contains("epsilon") || b.contains("delta")) {
        throw std::invalid_argument("spec: budget must be eps_delta or gdp, not both");
      }
      spec.budget = PrivacyBudget::gdp(required_field<double>(b, "gdp_epsilon"));
    } else {
      const double eps = required_field<double>(b, "epsilon");
      const double delta =
          b.contains("delta") ? required_field<double>(b, "delta") : dphuber::default_delta(spec.n);
      spec.budget = PrivacyBudget::eps_delta(eps, delta);
    }
  } else {
    throw std::invalid_argument("spec: budget must be an object or 'non_private'");
  }

  if (j.contains("alpha")) *alpha = required_field<double>(j, "alpha");
  return spec;
}

json spec_json(const dphuber::ExperimentSpec& spec, const std::optional<double>& alpha) {
  json j;
  j["regime"] = spec.regime == dphuber::Regime::LowDim ? "lowdim" : "highdim";
  j["n"] = spec.n;
  j["p"] = spec.p;
  if (spec.regime == dphuber::Regime::HighDim) j["s_star"] = spec.s_star;
  j["a"] = spec.a;
  j["b"] = spec.b;
  switch (spec.design) {
    case dphuber::DesignKind::GaussianIID: j["design"] = "gaussian"; break;
    case dphuber::DesignKind::UniformIID: j["design"] = "uniform"; break;
    case dphuber::DesignKind::GaussianAR: j["design"] = "gaussian_ar"; break;
  }
  j["noise"] = spec.noise == dphuber::NoiseKind::StdNormal ? "normal" : "student_t";
  j["budget"] = spec.budget ? budget_json(*spec.budget) : json("non_private");
  j["reps"] = spec.reps;
  j["seed"] = spec.seed;
  if (alpha) j["alpha"] = *alpha;
  return j;
}

int cmd_simulate(const SimulateArgs& args) {
  std::ifstream in(args.spec_path);
  if (!in) throw std::invalid_argument("cannot open spec file '" + args.spec_path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("spec: invalid JSON: ") + e.what());
  }

  std::optional<double> alpha;
  dphuber::ExperimentSpec spec = parse_spec(j, &alpha);
  if (args.reps) spec.reps = *args.reps;
  if (args.seed) spec.seed = *args.seed;
  if (args.workers) {
    spec.workers = *args.workers;
  } else if (const char* env = std::getenv("THREADS")) {
    spec.workers = std::atoi(env);
  }

  const dphuber::ExperimentSummary summary =
      alpha ? coverage_experiment(spec, *alpha) : run_experiment(spec);

  std::filesystem::create_directories(args.out_dir);
  const std::string csv_path = args.out_dir + "/replications.csv";
  {
    std::ofstream csv(csv_path);
    csv << "rep,rel_l2_error,log_rel_l2_error,status\n";
    csv.precision(17);
    for (std::size_t r = 0; r < summary.per_rep_errors.size(); ++r) {
      const double err = summary.per_rep_errors[r];
      if (std::isnan(err)) {
        csv << r << ",,,failed\n";
      } else {
        csv << r << "," << err << "," << std::log(err) << ",ok\n";
      }
    }
  }

  json out;
  out["spec"] = spec_json(spec, alpha);
  out["mean_log_rel_error"] = summary.mean_log_rel_error;
  out["sd"] = summary.sd;
  out["reps"] = spec.reps;
  out["failed_reps"] = summary.failed_reps;
  if (summary.coverage) out["coverage"] = *summary.coverage;
  if (summary.mean_width) out["mean_width"] = *summary.mean_width;
  out["wall_time_seconds"] = summary.wall_time_seconds;
  out["replications_csv"] = csv_path;
  for (const auto& msg : summary.failure_messages) std::cerr << "warning: " << msg << "\n";

  const std::string summary_path = args.out_dir + "/summary.json";
  emit(out, summary_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private Huber regression"};
  app.require_subcommand(1);

  FitArgs fit_args;
  CLI::App* fit = app.add_subcommand("fit", "private low-dimensional Huber fit on CSV data");
  fit->add_option("--input", fit_args.input, "input CSV (header row required)")->required();
  fit->add_option("--output", fit_args.output, "write the JSON result here as well");
  fit->add_option("--response", fit_args.response, "response column name (default: first column)");
  fit_args.budget.attach(fit);
  fit_args.seed.attach(fit);
  fit->add_option("--tau", fit_args.tau, "robustification parameter override");
  fit->add_option("--gamma", fit_args.gamma, "clip level override");
  fit->add_option("--eta0", fit_args.eta0, "learning rate override");
  fit->add_option("--T", fit_args.T, "iteration count override");
  fit->add_option("--init-fraction", fit_args.init_fraction,
                  "budget share of the initialization step");
  fit->add_flag("--trace", fit_args.trace, "record per-iteration diagnostics");

  FitSparseArgs sparse_args;
  CLI::App* fs = app.add_subcommand("fit-sparse", "private sparse Huber fit on CSV data");
  fs->add_option("--input", sparse_args.input, "input CSV (header row required)")->required();
  fs->add_option("--output", sparse_args.output, "write the JSON result here as well");
  fs->add_option("--response", sparse_args.response, "response column name");
  fs->add_option("--sparsity", sparse_args.s_star, "target sparsity s*")->required();
  fs->add_option("--s", sparse_args.s, "working sparsity override (default ceil(1.2 s*))");
  fs->add_flag("--no-privacy", sparse_args.no_privacy, "run the non-private benchmark instead");
  sparse_args.budget.attach(fs);
  sparse_args.seed.attach(fs);
  fs->add_option("--tau", sparse_args.tau, "robustification parameter override");
  fs->add_option("--gamma", sparse_args.gamma, "clip level override");
  fs->add_option("--eta0", sparse_args.eta0, "learning rate override");
  fs->add_option("--T", sparse_args.T, "iteration count override");
  fs->add_flag("--trace", sparse_args.trace, "record per-iteration diagnostics");

  CiArgs ci_args;
  CLI::App* ci = app.add_subcommand("ci", "private fit plus per-coordinate confidence intervals");
  ci->add_option("--input", ci_args.input, "input CSV (header row required)")->required();
  ci->add_option("--output", ci_args.output, "write the JSON result here as well");
  ci->add_option("--response", ci_args.response, "response column name");
  ci->add_option("--alpha", ci_args.alpha, "miscoverage level (default 0.05)");
  ci->add_flag("--infer-split-half", ci_args.split_half,
               "split the inference budget between the two matrix releases");
  ci_args.budget.attach(ci);
  ci_args.seed.attach(ci);

  SimulateArgs sim_args;
  CLI::App* sim = app.add_subcommand("simulate", "run a benchmark experiment from a JSON spec");
  sim->add_option("--spec", sim_args.spec_path, "experiment spec JSON file")->required();
  sim->add_option("--out-dir", sim_args.out_dir, "output directory (default .)");
  sim->add_option("--reps", sim_args.reps, "override the replication count");
  sim->add_option("--seed", sim_args.seed, "override the seed");
  sim->add_option("--workers", sim_args.workers, "worker threads (default: logical cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUser;
  }

  try {
    if (fit->parsed()) return cmd_fit(fit_args);
    if (fs->parsed()) return cmd_fit_sparse(sparse_args);
    if (ci->parsed()) return cmd_ci(ci_args);
    if (sim->parsed()) return cmd_simulate(sim_args);
    return kExitUser;
  } catch (const dphuber::NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUser;
  }
}
