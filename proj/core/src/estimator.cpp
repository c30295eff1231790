#include "renyivmc/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rvmc {

namespace {

/// Batch means within each chain: accounts for autocorrelation without
/// estimating it explicitly.
std::vector<double> chain_batch_means(const std::vector<double>& values) {
  const long n = static_cast<long>(values.size());
  if (n == 0) return {};
  const long batches = std::min<long>(16, n);
  const long size = n / batches;
  std::vector<double> means;
  means.reserve(batches);
  for (long b = 0; b < batches; ++b) {
    double acc = 0.0;
    for (long k = b * size; k < (b + 1) * size; ++k) acc += values[k];
    means.push_back(acc / size);
  }
  return means;
}

double mean_of(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return v.empty() ? 0.0 : acc / v.size();
}

CLog diag_log_or_throw(const DensityAnsatz& ansatz, const ParameterVector& params,
                       const SpinConfiguration& s) {
  const CLog l = ansatz.eval(params, s, s, false).log_value;
  if (clog_is_zero(l)) {
    throw std::runtime_error("estimator visited a configuration with rho_ss = 0");
  }
  return l;
}

}  // namespace

Estimate batch_mean_estimate(const std::vector<std::vector<double>>& per_chain) {
  Estimate est;
  double total = 0.0;
  long count = 0;
  std::vector<double> batch_means;
  for (const auto& chain : per_chain) {
    for (double v : chain) {
      total += v;
      ++count;
    }
    auto means = chain_batch_means(chain);
    batch_means.insert(batch_means.end(), means.begin(), means.end());
  }
  if (count == 0) throw std::invalid_argument("empty sample set");
  est.mean = total / count;
  est.count = count;
  if (batch_means.size() >= 2) {
    const double m = mean_of(batch_means);
    double var = 0.0;
    for (double b : batch_means) var += (b - m) * (b - m);
    var /= (batch_means.size() - 1);
    est.std_error = std::sqrt(var / batch_means.size());
  }
  return est;
}

double local_estimator(const DensityAnsatz& ansatz, const ParameterVector& params,
                       const std::vector<ConnectedTerm>& terms, const SpinConfiguration& s) {
  auto cache = ansatz.make_cache(params, s, s);
  if (cache->is_zero()) {
    throw std::runtime_error("local estimator at a configuration with rho_ss = 0");
  }
  std::complex<double> acc{0.0, 0.0};
  for (const auto& term : terms) {
    if (term.flips.empty()) {
      acc += term.value;
      continue;
    }
    // Ratio for a multi-site bra flip: chain the single-site ratios through
    // temporary commits, then undo them. A vanishing intermediate element
    // says nothing about the final one, so that case re-evaluates directly.
    CLog log_ratio{0.0, 0.0};
    bool direct = false;
    std::vector<int> committed;
    for (std::size_t k = 0; k < term.flips.size(); ++k) {
      const int site = term.flips[k];
      const CLog r = cache->flip_log_ratio(Side::bra, site);
      if (clog_is_zero(r)) {
        direct = k + 1 < term.flips.size();
        log_ratio = {neg_infinity(), 0.0};
        break;
      }
      log_ratio += r;
      if (k + 1 < term.flips.size()) {
        cache->commit_flip(Side::bra, site);
        committed.push_back(site);
      }
    }
    for (int site : committed) cache->commit_flip(Side::bra, site);
    if (direct) {
      SpinConfiguration sp = s;
      for (int site : term.flips) flip(sp, site);
      const CLog l = ansatz.eval(params, s, sp, false).log_value;
      log_ratio = clog_is_zero(l) ? CLog{neg_infinity(), 0.0} : l - cache->log_value();
    }
    if (!clog_is_zero(log_ratio)) {
      acc += term.value * std::polar(std::exp(log_ratio.real()), log_ratio.imag());
    }
  }
  return acc.real();
}

double local_energy(const DensityAnsatz& ansatz, const ParameterVector& params,
                    const IsingHamiltonian& h, const SpinConfiguration& s) {
  return local_estimator(ansatz, params, h.connected_elements(s), s);
}

namespace {

template <typename TermRule>
Estimate estimate_local(const DensityAnsatz& ansatz, const ParameterVector& params,
                        const TermRule& rule, const DiagonalSamples& samples) {
  std::vector<std::vector<double>> values(samples.chains.size());
  for (std::size_t c = 0; c < samples.chains.size(); ++c) {
    values[c].reserve(samples.chains[c].size());
    for (const auto& s : samples.chains[c]) {
      values[c].push_back(local_estimator(ansatz, params, rule.connected_elements(s), s));
    }
  }
  Estimate est = batch_mean_estimate(values);
  if (!samples.acceptance.empty()) {
    est.acceptance = mean_of(samples.acceptance);
  }
  return est;
}

}  // namespace

Estimate estimate_energy(const DensityAnsatz& ansatz, const ParameterVector& params,
                         const IsingHamiltonian& h, const DiagonalSamples& samples) {
  return estimate_local(ansatz, params, h, samples);
}

Estimate estimate_observable(const DensityAnsatz& ansatz, const ParameterVector& params,
                             const Observable& obs, const DiagonalSamples& samples) {
  return estimate_local(ansatz, params, obs, samples);
}

PurityEstimate estimate_purity(const DensityAnsatz& ansatz, const ParameterVector& params,
                               const DiagonalSamples& first, const DiagonalSamples& second) {
  if (first.chains.size() != second.chains.size()) {
    throw std::invalid_argument("purity streams must have the same chain layout");
  }
  std::vector<std::vector<double>> values(first.chains.size());
  for (std::size_t c = 0; c < first.chains.size(); ++c) {
    const std::size_t pairs = std::min(first.chains[c].size(), second.chains[c].size());
    if (pairs == 0) throw std::invalid_argument("empty purity stream");
    values[c].reserve(pairs);
    for (std::size_t k = 0; k < pairs; ++k) {
      const auto& s = first.chains[c][k];
      const auto& sp = second.chains[c][k];
      const CLog l_ss = diag_log_or_throw(ansatz, params, s);
      const CLog l_pp = diag_log_or_throw(ansatz, params, sp);
      const CLog l_sp = ansatz.eval(params, s, sp, false).log_value;
      values[c].push_back(clog_is_zero(l_sp)
                              ? 0.0
                              : std::exp(2.0 * l_sp.real() - l_ss.real() - l_pp.real()));
    }
  }
  PurityEstimate out;
  out.gamma = batch_mean_estimate(values);
  if (out.gamma.mean <= 0.0) throw std::runtime_error("purity estimate is not positive");
  out.s2 = -std::log(out.gamma.mean);
  out.s2_error = out.gamma.std_error / out.gamma.mean;
  return out;
}

namespace {

struct GradientAccumulators {
  Eigen::VectorXcd sum_delta_diag;
  Eigen::VectorXcd sum_h_weighted;
  Eigen::VectorXcd sum_delta_off;
  std::vector<std::vector<double>> e_loc;
  long n_diag = 0;
  long n_off = 0;

  // optional Gram accumulation (off-diagonal deltas)
  bool want_gram = false;
  bool real_gram = false;
  Eigen::MatrixXcd gram_sum;   // sum of conj(delta) delta^T
  Eigen::MatrixXd gram_sum_r;  // real fast path
};

void accumulate_gram(GradientAccumulators& acc, const Eigen::VectorXcd& delta) {
  if (!acc.want_gram) return;
  if (acc.real_gram) {
    acc.gram_sum_r.selfadjointView<Eigen::Lower>().rankUpdate(delta.real(), 1.0);
  } else {
    acc.gram_sum.noalias() += delta.conjugate() * delta.transpose();
  }
}

}  // namespace

FreeEnergyGradient grad_free_energy(const DensityAnsatz& ansatz, const ParameterVector& params,
                                    const IsingHamiltonian& h, double beta_r,
                                    const DiagonalSamples& diag, const OffdiagSamples& offdiag,
                                    bool want_gram) {
  const std::size_t p = ansatz.parameter_count();
  if (diag.total() == 0 || offdiag.total() == 0) {
    throw std::invalid_argument("gradient needs both sample streams");
  }

  GradientAccumulators acc;
  acc.sum_delta_diag = Eigen::VectorXcd::Zero(p);
  acc.sum_h_weighted = Eigen::VectorXcd::Zero(p);
  acc.sum_delta_off = Eigen::VectorXcd::Zero(p);
  acc.want_gram = want_gram;
  acc.real_gram = !ansatz.complex_parameters();
  if (want_gram) {
    if (acc.real_gram) {
      acc.gram_sum_r = Eigen::MatrixXd::Zero(p, p);
    } else {
      acc.gram_sum = Eigen::MatrixXcd::Zero(p, p);
    }
  }
  acc.e_loc.resize(diag.chains.size());

  for (std::size_t c = 0; c < diag.chains.size(); ++c) {
    acc.e_loc[c].reserve(diag.chains[c].size());
    for (const auto& s : diag.chains[c]) {
      const EnergyGradientSample g =
          ansatz.energy_gradient_sample(params, h.connected_elements(s), s);
      acc.sum_delta_diag += g.delta_diag;
      acc.sum_h_weighted += g.h_weighted;
      acc.e_loc[c].push_back(g.local_energy);
      ++acc.n_diag;
    }
  }
  for (const auto& chain : offdiag.chains) {
    for (const auto& [s, sp] : chain) {
      const EvalResult r = ansatz.eval(params, s, sp, /*want_gradient=*/true);
      if (r.is_zero()) {
        throw std::runtime_error("off-diagonal sample with rho_ss' = 0");
      }
      acc.sum_delta_off += r.gradient;
      accumulate_gram(acc, r.gradient);
      ++acc.n_off;
    }
  }

  FreeEnergyGradient out;
  out.energy = batch_mean_estimate(acc.e_loc);
  if (!diag.acceptance.empty()) {
    double a = 0.0;
    for (double x : diag.acceptance) a += x;
    out.energy.acceptance = a / diag.acceptance.size();
  }
  const Eigen::VectorXcd mean_dd = acc.sum_delta_diag / double(acc.n_diag);
  const Eigen::VectorXcd mean_hw = acc.sum_h_weighted / double(acc.n_diag);
  const Eigen::VectorXcd mean_off = acc.sum_delta_off / double(acc.n_off);

  out.grad_energy = (mean_hw - out.energy.mean * mean_dd).real();
  out.grad_log_gamma = 2.0 * (mean_off - mean_dd).real();
  out.grad_free_energy = beta_r * out.grad_energy + out.grad_log_gamma;

  if (want_gram) {
    if (acc.real_gram) {
      Eigen::MatrixXd g = acc.gram_sum_r.selfadjointView<Eigen::Lower>();
      g /= double(acc.n_off);
      g.noalias() -= mean_off.real() * mean_off.real().transpose();
      out.gram = g.cast<std::complex<double>>();
    } else {
      out.gram = acc.gram_sum / double(acc.n_off);
      out.gram.noalias() -= mean_off.conjugate() * mean_off.transpose();
    }
  }
  return out;
}

GramMatrix gram_matrix(const DensityAnsatz& ansatz, const ParameterVector& params,
                       const OffdiagSamples& offdiag) {
  const std::size_t p = ansatz.parameter_count();
  if (offdiag.total() == 0) throw std::invalid_argument("gram matrix needs samples");
  Eigen::VectorXcd sum = Eigen::VectorXcd::Zero(p);
  Eigen::MatrixXcd outer = Eigen::MatrixXcd::Zero(p, p);
  long n = 0;
  for (const auto& chain : offdiag.chains) {
    for (const auto& [s, sp] : chain) {
      const EvalResult r = ansatz.eval(params, s, sp, true);
      if (r.is_zero()) throw std::runtime_error("off-diagonal sample with rho_ss' = 0");
      sum += r.gradient;
      outer.noalias() += r.gradient.conjugate() * r.gradient.transpose();
      ++n;
    }
  }
  const Eigen::VectorXcd mean = sum / double(n);
  GramMatrix g = outer / double(n);
  g.noalias() -= mean.conjugate() * mean.transpose();
  return g;
}

namespace {

/// Normalized diagonal weights p(s) = rho_ss / tr rho over the full basis.
std::vector<double> diagonal_weights(const DensityAnsatz& ansatz, const ParameterVector& params,
                                     std::vector<double>* logs_out) {
  const int n = ansatz.num_sites();
  const std::size_t dim = std::size_t{1} << n;
  std::vector<double> logs(dim, neg_infinity());
  double max_log = neg_infinity();
  for (std::size_t i = 0; i < dim; ++i) {
    const SpinConfiguration s = configuration_from_index(i, n);
    const CLog l = ansatz.eval(params, s, s, false).log_value;
    if (!clog_is_zero(l)) {
      logs[i] = l.real();
      max_log = std::max(max_log, logs[i]);
    }
  }
  if (!std::isfinite(max_log)) throw std::runtime_error("rho has an identically zero diagonal");
  std::vector<double> w(dim, 0.0);
  double z = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    if (std::isfinite(logs[i])) {
      w[i] = std::exp(logs[i] - max_log);
      z += w[i];
    }
  }
  for (auto& x : w) x /= z;
  if (logs_out) *logs_out = std::move(logs);
  return w;
}

}  // namespace

ExactEstimates exact_estimates(const DensityAnsatz& ansatz, const ParameterVector& params,
                               const IsingHamiltonian& h, double beta_r, int max_sites) {
  const int n = ansatz.num_sites();
  if (n > max_sites) throw std::invalid_argument("exact estimates above the site cap");
  const std::size_t dim = std::size_t{1} << n;
  std::vector<double> logs;
  const std::vector<double> w = diagonal_weights(ansatz, params, &logs);

  ExactEstimates out;
  double gamma = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    if (w[i] == 0.0) continue;
    const SpinConfiguration s = configuration_from_index(i, n);
    out.energy += w[i] * local_energy(ansatz, params, h, s);
    for (std::size_t j = 0; j < dim; ++j) {
      if (w[j] == 0.0) continue;
      const SpinConfiguration sp = configuration_from_index(j, n);
      const CLog l = ansatz.eval(params, s, sp, false).log_value;
      if (!clog_is_zero(l)) {
        gamma += w[i] * w[j] * std::exp(2.0 * l.real() - logs[i] - logs[j]);
      }
    }
  }
  out.gamma = gamma;
  out.s2 = -std::log(gamma);
  out.free_energy = beta_r * out.energy - out.s2;
  return out;
}

FreeEnergyGradient exact_grad_free_energy(const DensityAnsatz& ansatz,
                                          const ParameterVector& params,
                                          const IsingHamiltonian& h, double beta_r, bool want_gram,
                                          int max_sites) {
  const int n = ansatz.num_sites();
  if (n > max_sites) throw std::invalid_argument("exact gradient above the site cap");
  const std::size_t dim = std::size_t{1} << n;
  const std::size_t p = ansatz.parameter_count();
  std::vector<double> logs;
  const std::vector<double> w = diagonal_weights(ansatz, params, &logs);

  Eigen::VectorXcd mean_dd = Eigen::VectorXcd::Zero(p);
  Eigen::VectorXcd mean_hw = Eigen::VectorXcd::Zero(p);
  double energy = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    if (w[i] == 0.0) continue;
    const SpinConfiguration s = configuration_from_index(i, n);
    const EnergyGradientSample g = ansatz.energy_gradient_sample(params, h.connected_elements(s), s);
    energy += w[i] * g.local_energy;
    mean_dd += w[i] * g.delta_diag;
    mean_hw += w[i] * g.h_weighted;
  }

  // off-diagonal expectation under q(s,s') ~ |rho_ss'|^2, enumerated
  Eigen::VectorXcd mean_off = Eigen::VectorXcd::Zero(p);
  Eigen::MatrixXcd gram_outer;
  if (want_gram) gram_outer = Eigen::MatrixXcd::Zero(p, p);
  double zq = 0.0;
  double max2 = neg_infinity();
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      const SpinConfiguration s = configuration_from_index(i, n);
      const SpinConfiguration sp = configuration_from_index(j, n);
      const CLog l = ansatz.eval(params, s, sp, false).log_value;
      if (!clog_is_zero(l)) max2 = std::max(max2, 2.0 * l.real());
    }
  }
  for (std::size_t i = 0; i < dim; ++i) {
    const SpinConfiguration s = configuration_from_index(i, n);
    for (std::size_t j = 0; j < dim; ++j) {
      const SpinConfiguration sp = configuration_from_index(j, n);
      const EvalResult r = ansatz.eval(params, s, sp, true);
      if (r.is_zero()) continue;
      const double q = std::exp(2.0 * r.log_value.real() - max2);
      zq += q;
      mean_off += q * r.gradient;
      if (want_gram) gram_outer.noalias() += q * (r.gradient.conjugate() * r.gradient.transpose());
    }
  }
  mean_off /= zq;

  FreeEnergyGradient out;
  out.energy = Estimate{energy, 0.0, static_cast<long>(dim), 0.0};
  out.grad_energy = (mean_hw - energy * mean_dd).real();
  out.grad_log_gamma = 2.0 * (mean_off - mean_dd).real();
  out.grad_free_energy = beta_r * out.grad_energy + out.grad_log_gamma;
  if (want_gram) {
    out.gram = gram_outer / zq;
    out.gram.noalias() -= mean_off.conjugate() * mean_off.transpose();
  }
  return out;
}

}  // namespace rvmc
