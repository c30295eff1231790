#include "renyivmc/optimizer.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace rvmc {

namespace {

constexpr std::size_t kSrParameterCap = 5000;

double ramped_decayed_rate(const OptimizerConfig& cfg, int t) {
  double eta = cfg.learning_rate;
  if (cfg.warmup_iterations > 0 && t < cfg.warmup_iterations) {
    eta *= static_cast<double>(t + 1) / cfg.warmup_iterations;
  } else {
    eta /= 1.0 + cfg.decay * std::max(0, t - cfg.warmup_iterations);
  }
  return eta;
}

bool all_finite(const Eigen::VectorXd& v) { return v.allFinite(); }

}  // namespace

void OptimizerConfig::validate(std::size_t parameter_count) const {
  if (learning_rate <= 0.0) throw std::invalid_argument("learning rate must be positive");
  if (max_iterations < 1) throw std::invalid_argument("max iterations must be >= 1");
  if (method == Method::sr) {
    if (sr_shift < 1e-4 || sr_shift > 1.0) {
      throw std::invalid_argument("sr shift must lie in [1e-4, 1]");
    }
    if (parameter_count > kSrParameterCap) {
      throw std::invalid_argument(
          "stochastic reconfiguration refused: " + std::to_string(parameter_count) +
          " parameters exceed the dense-solve cap of " + std::to_string(kSrParameterCap));
    }
  }
  if (convergence_window < 1 || warmup_iterations < 0 || decay < 0.0 || entropy_every < 0 ||
      final_samples < 1) {
    throw std::invalid_argument("bad optimizer config field");
  }
}

void step_sgd(ParameterVector& params, const Eigen::VectorXd& gradient, double eta) {
  if (static_cast<std::size_t>(gradient.size()) != params.size()) {
    throw std::invalid_argument("gradient size mismatch");
  }
  if (!all_finite(gradient)) throw std::runtime_error("non-finite gradient in sgd step");
  Eigen::VectorXd::Map(params.data(), params.size()) -= eta * gradient;
}

void step_adam(AdamState& state, ParameterVector& params, const Eigen::VectorXd& gradient,
               double eta) {
  if (static_cast<std::size_t>(gradient.size()) != params.size()) {
    throw std::invalid_argument("gradient size mismatch");
  }
  if (!all_finite(gradient)) throw std::runtime_error("non-finite gradient in adam step");
  if (state.m.size() == 0) {
    state.m = Eigen::VectorXd::Zero(gradient.size());
    state.v = Eigen::VectorXd::Zero(gradient.size());
  }
  ++state.t;
  state.m = state.beta1 * state.m + (1.0 - state.beta1) * gradient;
  state.v = state.beta2 * state.v + (1.0 - state.beta2) * gradient.cwiseAbs2();
  const double c1 = 1.0 - std::pow(state.beta1, state.t);
  const double c2 = 1.0 - std::pow(state.beta2, state.t);
  Eigen::VectorXd update =
      (state.m / c1).cwiseQuotient(((state.v / c2).cwiseSqrt().array() + state.epsilon).matrix());
  Eigen::VectorXd::Map(params.data(), params.size()) -= eta * update;
}

void step_sr(ParameterVector& params, const Eigen::VectorXd& gradient, const GramMatrix& gram,
             double shift, double eta) {
  const auto p = gradient.size();
  if (gram.rows() != p || gram.cols() != p) throw std::invalid_argument("gram size mismatch");
  if (!all_finite(gradient)) throw std::runtime_error("non-finite gradient in sr step");
  // Real parameters see the real part of the Hermitian Gram matrix as the
  // quadratic form on perturbations.
  Eigen::MatrixXd a = gram.real();
  a.diagonal().array() += shift;
  Eigen::VectorXd x = a.ldlt().solve(gradient);
  const double residual = (a * x - gradient).norm();
  if (!x.allFinite() || residual > 1e-8 * std::max(1e-300, gradient.norm())) {
    x = a.colPivHouseholderQr().solve(gradient);
    const double retry = (a * x - gradient).norm();
    if (!x.allFinite() || retry > 1e-6 * std::max(1e-300, gradient.norm())) {
      throw std::runtime_error("sr solve failed (residual " + std::to_string(retry) + ")");
    }
  }
  Eigen::VectorXd::Map(params.data(), params.size()) -= eta * x;
}

namespace {

struct EstimationContext {
  const DensityAnsatz& ansatz;
  const IsingHamiltonian& h;
  double beta_r;
  const SamplerConfig& sampler_config;
  bool exact;
  SamplerPool diag_pool;
  SamplerPool offdiag_pool;

  DiagonalSamples last_diag;
  OffdiagSamples last_offdiag;

  EstimationContext(const DensityAnsatz& a, const IsingHamiltonian& ham, double beta,
                    const SamplerConfig& sc, bool exact_mode, std::uint64_t seed)
      : ansatz(a),
        h(ham),
        beta_r(beta),
        sampler_config(sc),
        exact(exact_mode),
        diag_pool(TargetKind::diagonal, sc.chains, derive_seed(seed, 11)),
        offdiag_pool(TargetKind::offdiagonal, sc.chains, derive_seed(seed, 13)) {}

  FreeEnergyGradient gradients(const ParameterVector& params, bool want_gram) {
    if (exact) {
      return exact_grad_free_energy(ansatz, params, h, beta_r, want_gram, ansatz.num_sites());
    }
    last_diag = diag_pool.sample_diagonal(sampler_config, ansatz, params);
    last_offdiag = offdiag_pool.sample_offdiagonal(sampler_config, ansatz, params);
    return grad_free_energy(ansatz, params, h, beta_r, last_diag, last_offdiag, want_gram);
  }

  /// S2 from the current diagonal chains, split into two independent halves.
  std::optional<PurityEstimate> entropy(const ParameterVector& params) {
    if (exact) {
      const ExactEstimates e = exact_estimates(ansatz, params, h, beta_r, ansatz.num_sites());
      PurityEstimate pe;
      pe.gamma = Estimate{e.gamma, 0.0, 1, 0.0};
      pe.s2 = e.s2;
      pe.s2_error = 0.0;
      return pe;
    }
    if (last_diag.chains.size() < 2) return std::nullopt;
    const std::size_t half = last_diag.chains.size() / 2;
    DiagonalSamples a, b;
    a.chains.assign(last_diag.chains.begin(), last_diag.chains.begin() + half);
    b.chains.assign(last_diag.chains.begin() + half, last_diag.chains.begin() + 2 * half);
    return estimate_purity(ansatz, params, a, b);
  }
};

double mean_acceptance(const std::vector<double>& a) {
  if (a.empty()) return 0.0;
  double acc = 0.0;
  for (double x : a) acc += x;
  return acc / a.size();
}

FinalReport final_report(const DensityAnsatz& ansatz, const IsingHamiltonian& h, double beta_r,
                         const SamplerConfig& base, const OptimizerConfig& cfg,
                         std::uint64_t seed, const ParameterVector& params,
                         const std::vector<Observable>& observables) {
  FinalReport report;
  if (cfg.exact_expectations) {
    const ExactEstimates e = exact_estimates(ansatz, params, h, beta_r, ansatz.num_sites());
    report.energy = Estimate{e.energy, 0.0, 1, 1.0};
    report.gamma = Estimate{e.gamma, 0.0, 1, 1.0};
    report.s2 = e.s2;
    report.free_energy = e.free_energy;
    report.sample_budget = 0;
    for (const auto& obs : observables) {
      std::vector<std::vector<double>> vals(1);
      const int n = ansatz.num_sites();
      // exact diagonal average of the local estimator
      double acc = 0.0;
      double z = 0.0;
      for (std::size_t i = 0; i < (std::size_t{1} << n); ++i) {
        const SpinConfiguration s = configuration_from_index(i, n);
        const CLog l = ansatz.eval(params, s, s, false).log_value;
        if (clog_is_zero(l)) continue;
        const double w = std::exp(l.real());
        acc += w * local_estimator(ansatz, params, obs.connected_elements(s), s);
        z += w;
      }
      report.observables[obs.name] = Estimate{acc / z, 0.0, 1, 1.0};
    }
    return report;
  }

  SamplerConfig fc = base;
  fc.seed = derive_seed(seed, 101);
  fc.samples_per_chain =
      static_cast<int>((cfg.final_samples + 2L * fc.chains - 1) / (2L * fc.chains));
  fc.burn_in_sweeps = std::max(fc.burn_in_sweeps, 50);

  SamplerConfig fc2 = fc;
  fc2.seed = derive_seed(seed, 103);
  const DiagonalSamples first = run_chains_diagonal(fc, ansatz, params);
  const DiagonalSamples second = run_chains_diagonal(fc2, ansatz, params);

  report.energy = estimate_energy(ansatz, params, h, first);
  const PurityEstimate purity = estimate_purity(ansatz, params, first, second);
  report.gamma = purity.gamma;
  report.s2 = purity.s2;
  report.s2_error = purity.s2_error;
  report.free_energy = beta_r * report.energy.mean - report.s2;
  report.free_energy_error = std::sqrt(std::pow(beta_r * report.energy.std_error, 2) +
                                       std::pow(report.s2_error, 2));
  report.sample_budget = first.total() + second.total();
  for (const auto& obs : observables) {
    report.observables[obs.name] = estimate_observable(ansatz, params, obs, first);
  }
  return report;
}

}  // namespace

OptimizationResult run_optimization(const DensityAnsatz& ansatz, const IsingHamiltonian& h,
                                    double beta_r, const SamplerConfig& sampler_config,
                                    const OptimizerConfig& optimizer_config, std::uint64_t seed,
                                    ParameterVector initial_params,
                                    const std::vector<Observable>& observables,
                                    const IterationCallback& on_iteration) {
  ansatz.check_params(initial_params);
  sampler_config.validate();
  optimizer_config.validate(ansatz.parameter_count());
  if (h.num_sites() != ansatz.num_sites()) {
    throw std::invalid_argument("hamiltonian and ansatz disagree on the number of sites");
  }

  SamplerConfig sc = sampler_config;
  sc.seed = derive_seed(seed, 7);
  EstimationContext ctx(ansatz, h, beta_r, sc, optimizer_config.exact_expectations, seed);

  OptimizationResult out;
  out.params = std::move(initial_params);
  AdamState adam;
  std::vector<double> energy_history;
  const auto t0 = std::chrono::steady_clock::now();

  for (int iter = 0; iter < optimizer_config.max_iterations; ++iter) {
    const bool want_gram = optimizer_config.method == OptimizerConfig::Method::sr;
    FreeEnergyGradient grads;
    try {
      grads = ctx.gradients(out.params, want_gram);
    } catch (const std::runtime_error& e) {
      throw OptimizationAbort(std::string("estimation failed: ") + e.what(), out.params);
    }
    if (!grads.grad_free_energy.allFinite() || !std::isfinite(grads.energy.mean)) {
      throw OptimizationAbort("non-finite estimates at iteration " + std::to_string(iter),
                              out.params);
    }

    const double eta = ramped_decayed_rate(optimizer_config, iter);
    IterationRecord rec;
    rec.iteration = iter;
    rec.energy = grads.energy;
    rec.gradient_norm = grads.grad_free_energy.norm();
    rec.learning_rate = eta;
    rec.acceptance_diag = mean_acceptance(ctx.last_diag.acceptance);
    rec.acceptance_offdiag = mean_acceptance(ctx.last_offdiag.acceptance);
    if (optimizer_config.entropy_every > 0 && iter % optimizer_config.entropy_every == 0) {
      if (const auto purity = ctx.entropy(out.params)) {
        rec.s2 = purity->s2;
        rec.s2_error = purity->s2_error;
        rec.free_energy = beta_r * grads.energy.mean - purity->s2;
      }
    }
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.records.push_back(rec);
    if (on_iteration) on_iteration(rec, out.params);

    switch (optimizer_config.method) {
      case OptimizerConfig::Method::sgd:
        step_sgd(out.params, grads.grad_free_energy, eta);
        break;
      case OptimizerConfig::Method::adam:
        step_adam(adam, out.params, grads.grad_free_energy, eta);
        break;
      case OptimizerConfig::Method::sr:
        step_sr(out.params, grads.grad_free_energy, grads.gram, optimizer_config.sr_shift, eta);
        break;
    }

    energy_history.push_back(grads.energy.mean);
    const int w = optimizer_config.convergence_window;
    if (static_cast<int>(energy_history.size()) >= 2 * w) {
      double m1 = 0.0, m2 = 0.0;
      const std::size_t t = energy_history.size();
      for (int k = 0; k < w; ++k) {
        m1 += energy_history[t - 2 * w + k];
        m2 += energy_history[t - w + k];
      }
      m1 /= w;
      m2 /= w;
      if (std::abs(m2 - m1) / ansatz.num_sites() < optimizer_config.convergence_threshold) {
        out.converged = true;
        break;
      }
    }
  }

  out.final_report = final_report(ansatz, h, beta_r, sc, optimizer_config, seed, out.params,
                                  observables);
  return out;
}

std::vector<BetaPointResult> sweep_beta(const DensityAnsatz& ansatz, const IsingHamiltonian& h,
                                        const std::vector<double>& beta_r_values,
                                        const SamplerConfig& sampler_config,
                                        const OptimizerConfig& optimizer_config,
                                        std::uint64_t seed, ParameterVector initial_params,
                                        const std::vector<Observable>& observables,
                                        const IterationCallback& on_iteration) {
  if (beta_r_values.empty()) throw std::invalid_argument("beta sweep needs at least one value");
  for (std::size_t i = 1; i < beta_r_values.size(); ++i) {
    if (beta_r_values[i] < beta_r_values[i - 1]) {
      throw std::invalid_argument("beta sweep values must ascend");
    }
  }
  std::vector<BetaPointResult> out;
  ParameterVector params = std::move(initial_params);
  for (std::size_t i = 0; i < beta_r_values.size(); ++i) {
    OptimizationResult r =
        run_optimization(ansatz, h, beta_r_values[i], sampler_config, optimizer_config,
                         derive_seed(seed, 1000 + i), params, observables, on_iteration);
    params = r.params;
    out.push_back({beta_r_values[i], std::move(r)});
  }
  return out;
}

}  // namespace rvmc
