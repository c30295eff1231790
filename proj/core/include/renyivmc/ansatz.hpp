#pragma once

#include <Eigen/Dense>
#include <complex>
#include <memory>
#include <string>
#include <vector>

#include "renyivmc/lattice.hpp"
#include "renyivmc/log_amplitude.hpp"
#include "renyivmc/parameters.hpp"
#include "renyivmc/spin.hpp"

namespace rvmc {

struct EvalResult {
  CLog log_value{neg_infinity(), 0.0};  ///< raw complex log of rho_{s s'}
  Eigen::VectorXcd gradient;  ///< Delta_theta(s,s') = d log rho / d theta; empty unless requested

  LogAmplitude amplitude() const { return LogAmplitude::from_log(log_value); }
  bool is_zero() const { return clog_is_zero(log_value); }
};

enum class Side { ket, bra, both };

/// Incremental evaluator bound to one (s, s') pair and one parameter set.
/// Supports single-site flip proposals on either index (or both at once)
/// without re-evaluating the full element. Diagonal Markov chains use a
/// cache with s == s' and Side::both moves.
class PairCache {
 public:
  virtual ~PairCache() = default;

  virtual CLog log_value() const = 0;
  bool is_zero() const { return clog_is_zero(log_value()); }

  /// Complex log-ratio log rho(flipped) - log rho(current). Real part is
  /// -infinity when the flipped element is an exact zero. May repair
  /// internal partial results but does not change the tracked pair.
  virtual CLog flip_log_ratio(Side side, int site) = 0;

  /// Applies the flip to the tracked pair.
  virtual void commit_flip(Side side, int site) = 0;

  virtual const SpinConfiguration& ket() const = 0;
  virtual const SpinConfiguration& bra() const = 0;
};

/// Per-sample ingredients of the energy gradient at a diagonal sample s:
/// the local energy, the diagonal log-derivative, and the H-weighted sum of
/// log-derivatives over connected pairs,
///   sum_{s'} H_{s' s} (rho_{s s'} / rho_{s s}) Delta_theta(s, s').
struct EnergyGradientSample {
  double local_energy = 0.0;
  Eigen::VectorXcd delta_diag;
  Eigen::VectorXcd h_weighted;
};

/// A purification-based density-matrix ansatz: unnormalized rho_{s s'} in
/// log form plus analytic log-derivatives. Evaluation is pure given
/// (parameters, s, s'); instances hold only structural data and are safe to
/// share across threads.
class DensityAnsatz {
 public:
  virtual ~DensityAnsatz() = default;

  virtual std::string kind() const = 0;
  virtual int num_sites() const = 0;
  virtual std::size_t parameter_count() const = 0;
  virtual const ParameterLayout& layout() const = 0;

  /// True when parameters are complex (stored as real pairs) so that
  /// log-derivatives carry nonzero imaginary parts.
  virtual bool complex_parameters() const { return false; }

  /// Random initialization; deterministic given seed.
  virtual ParameterVector init(std::uint64_t seed, double scale) const = 0;

  virtual EvalResult eval(const ParameterVector& params, const SpinConfiguration& s,
                          const SpinConfiguration& sp, bool want_gradient) const = 0;

  virtual std::unique_ptr<PairCache> make_cache(const ParameterVector& params,
                                                SpinConfiguration s,
                                                SpinConfiguration sp) const = 0;

  /// Energy-gradient ingredients for one diagonal sample. The base
  /// implementation loops over connected elements and calls eval() per
  /// pair; subclasses may override with a cheaper equivalent.
  virtual EnergyGradientSample energy_gradient_sample(
      const ParameterVector& params, const std::vector<ConnectedTerm>& connected,
      const SpinConfiguration& s) const;

  /// Embeds parameters of a smaller instance of the same ansatz family into
  /// this (dominating) instance; freshly exposed entries get noise of the
  /// given width. noise = 0 reproduces the small model's rho up to a global
  /// constant.
  virtual ParameterVector grow_from(const DensityAnsatz& small,
                                    const ParameterVector& params_small, std::uint64_t seed,
                                    double noise) const = 0;

  /// Structural hyperparameters, for checkpoints and factories.
  virtual std::string spec_string() const = 0;

  void check_params(const ParameterVector& params) const {
    if (params.size() != parameter_count())
      throw std::invalid_argument("parameter vector size mismatch for " + kind());
  }
};

/// Shared base-path implementation, also used as the reference route when
/// testing specialized overrides.
EnergyGradientSample energy_gradient_sample_by_eval(const DensityAnsatz& ansatz,
                                                    const ParameterVector& params,
                                                    const std::vector<ConnectedTerm>& connected,
                                                    const SpinConfiguration& s);

/// Materializes rho over the full basis by evaluating every element.
/// Test/oracle support only; N capped.
Eigen::MatrixXcd brute_force_rho(const DensityAnsatz& ansatz, const ParameterVector& params,
                                 int max_sites = 10);

}  // namespace rvmc
