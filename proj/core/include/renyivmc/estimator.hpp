#pragma once

#include <limits>
#include <map>
#include <string>

#include "renyivmc/ansatz.hpp"
#include "renyivmc/lattice.hpp"
#include "renyivmc/sampler.hpp"

namespace rvmc {

/// A Monte Carlo expectation with a batch-means standard error.
struct Estimate {
  double mean = 0.0;
  double std_error = std::numeric_limits<double>::infinity();
  long count = 0;
  double acceptance = std::numeric_limits<double>::quiet_NaN();
};

/// Mean and batch-means standard error of per-chain value streams.
Estimate batch_mean_estimate(const std::vector<std::vector<double>>& per_chain);

/// E_loc(s) = sum_{s'} H_{s' s} rho_{s s'} / rho_{s s} (real part). Throws
/// when rho_ss = 0.
double local_energy(const DensityAnsatz& ansatz, const ParameterVector& params,
                    const IsingHamiltonian& h, const SpinConfiguration& s);

/// Local estimator of an arbitrary connected-elements rule at s.
double local_estimator(const DensityAnsatz& ansatz, const ParameterVector& params,
                       const std::vector<ConnectedTerm>& terms, const SpinConfiguration& s);

Estimate estimate_energy(const DensityAnsatz& ansatz, const ParameterVector& params,
                         const IsingHamiltonian& h, const DiagonalSamples& samples);

Estimate estimate_observable(const DensityAnsatz& ansatz, const ParameterVector& params,
                             const Observable& obs, const DiagonalSamples& samples);

struct PurityEstimate {
  Estimate gamma;   ///< purity tr(rho^2) / (tr rho)^2
  double s2 = 0.0;  ///< -log gamma
  double s2_error = std::numeric_limits<double>::infinity();
};

/// Swap-trick purity from two independent diagonal streams, paired
/// positionally chain by chain.
PurityEstimate estimate_purity(const DensityAnsatz& ansatz, const ParameterVector& params,
                               const DiagonalSamples& first, const DiagonalSamples& second);

using GramMatrix = Eigen::MatrixXcd;

struct FreeEnergyGradient {
  Eigen::VectorXd grad_free_energy;  ///< beta_R dE + d log Gamma
  Eigen::VectorXd grad_energy;
  Eigen::VectorXd grad_log_gamma;
  Estimate energy;
  GramMatrix gram;  ///< empty unless requested
};

/// Monte Carlo gradient of F_R = beta_R <H> + log Gamma and, optionally, the
/// Gram matrix cov_q(Delta) assembled from the same off-diagonal
/// log-derivative evaluations.
FreeEnergyGradient grad_free_energy(const DensityAnsatz& ansatz, const ParameterVector& params,
                                    const IsingHamiltonian& h, double beta_r,
                                    const DiagonalSamples& diag, const OffdiagSamples& offdiag,
                                    bool want_gram = false);

/// G_ij = E_q[Delta_i^* Delta_j] - E_q[Delta_i^*] E_q[Delta_j] over
/// off-diagonal samples; Hermitian by construction.
GramMatrix gram_matrix(const DensityAnsatz& ansatz, const ParameterVector& params,
                       const OffdiagSamples& offdiag);

/// Deterministic full-enumeration versions (test oracles, small N).
struct ExactEstimates {
  double energy = 0.0;
  double gamma = 0.0;
  double s2 = 0.0;
  double free_energy = 0.0;
};
ExactEstimates exact_estimates(const DensityAnsatz& ansatz, const ParameterVector& params,
                               const IsingHamiltonian& h, double beta_r, int max_sites = 10);
FreeEnergyGradient exact_grad_free_energy(const DensityAnsatz& ansatz,
                                          const ParameterVector& params,
                                          const IsingHamiltonian& h, double beta_r,
                                          bool want_gram = false, int max_sites = 6);

}  // namespace rvmc
