#pragma once

#include <functional>
#include <optional>

#include "renyivmc/estimator.hpp"

namespace rvmc {

struct OptimizerConfig {
  enum class Method { sgd, adam, sr } method = Method::adam;
  double learning_rate = 0.01;
  double sr_shift = 0.05;  ///< diagonal shift added to the Gram matrix
  int max_iterations = 1000;
  /// stop when the windowed mean energy changes by less than threshold * N
  double convergence_threshold = 1e-4;
  int convergence_window = 50;
  int warmup_iterations = 50;  ///< linear learning-rate ramp
  double decay = 1e-3;         ///< inverse-time decay rate after warm-up
  int entropy_every = 50;      ///< iterations between S2 estimates (0 = never)
  long final_samples = 1 << 16;
  /// full enumeration instead of Monte Carlo (exact expectations, small N)
  bool exact_expectations = false;

  void validate(std::size_t parameter_count) const;
};

struct IterationRecord {
  int iteration = 0;
  Estimate energy;
  double s2 = std::numeric_limits<double>::quiet_NaN();
  double s2_error = std::numeric_limits<double>::quiet_NaN();
  double free_energy = std::numeric_limits<double>::quiet_NaN();
  double gradient_norm = 0.0;
  double learning_rate = 0.0;
  double acceptance_diag = 0.0;
  double acceptance_offdiag = 0.0;
  double wall_seconds = 0.0;  ///< not serialized; console diagnostics only
};

struct FinalReport {
  Estimate energy;
  Estimate gamma;
  double s2 = 0.0;
  double s2_error = 0.0;
  double free_energy = 0.0;
  double free_energy_error = 0.0;
  std::map<std::string, Estimate> observables;
  long sample_budget = 0;
};

struct OptimizationResult {
  ParameterVector params;
  std::vector<IterationRecord> records;
  FinalReport final_report;
  bool converged = false;
};

/// theta <- theta - eta * g
void step_sgd(ParameterVector& params, const Eigen::VectorXd& gradient, double eta);

struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  long t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};
void step_adam(AdamState& state, ParameterVector& params, const Eigen::VectorXd& gradient,
               double eta);

/// Solves (Re G + shift I) x = g and applies theta <- theta - eta x. Falls
/// back to a column-pivoting solve when the Cholesky route fails.
void step_sr(ParameterVector& params, const Eigen::VectorXd& gradient, const GramMatrix& gram,
             double shift, double eta);

/// Raised when an iteration produces non-finite estimates; carries the last
/// finite parameters for a checkpoint dump.
struct OptimizationAbort : std::runtime_error {
  OptimizationAbort(const std::string& what, ParameterVector params)
      : std::runtime_error(what), params(std::move(params)) {}
  ParameterVector params;
};

using IterationCallback = std::function<void(const IterationRecord&, const ParameterVector&)>;

OptimizationResult run_optimization(const DensityAnsatz& ansatz, const IsingHamiltonian& h,
                                    double beta_r, const SamplerConfig& sampler_config,
                                    const OptimizerConfig& optimizer_config, std::uint64_t seed,
                                    ParameterVector initial_params,
                                    const std::vector<Observable>& observables = {},
                                    const IterationCallback& on_iteration = nullptr);

struct BetaPointResult {
  double beta_r = 0.0;
  OptimizationResult result;
};

/// Optimizes along an ascending list of beta_R values, warm-starting each
/// point from the previous solution.
std::vector<BetaPointResult> sweep_beta(const DensityAnsatz& ansatz, const IsingHamiltonian& h,
                                        const std::vector<double>& beta_r_values,
                                        const SamplerConfig& sampler_config,
                                        const OptimizerConfig& optimizer_config,
                                        std::uint64_t seed, ParameterVector initial_params,
                                        const std::vector<Observable>& observables = {},
                                        const IterationCallback& on_iteration = nullptr);

}  // namespace rvmc
