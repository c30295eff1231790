#pragma once

#include <map>
#include <optional>
#include <string>

#include "renyivmc/ansatz.hpp"
#include "renyivmc/lattice.hpp"

namespace rvmc {

struct Spectrum {
  Eigen::VectorXd eigenvalues;   ///< ascending
  Eigen::MatrixXd eigenvectors;  ///< empty when not requested

  bool has_vectors() const { return eigenvectors.size() > 0; }
};

Spectrum exact_spectrum(const IsingHamiltonian& h, bool want_vectors, int max_sites = 14);

enum class EnsembleKind { gibbs, renyi };

struct EnsembleResult {
  EnsembleKind kind = EnsembleKind::gibbs;
  double beta = 0.0;             ///< beta (Gibbs) or beta_R (Renyi)
  Eigen::VectorXd weights;       ///< p_i over eigenstates, ascending energies
  double energy = 0.0;
  double entropy = 0.0;          ///< S (Gibbs) or S2 (Renyi)
  double free_energy = 0.0;      ///< beta * E - S (dimensionless convention)
  std::map<std::string, double> observables;
};

/// Gibbs weights p_i ~ exp(-beta E_i).
EnsembleResult exact_gibbs(const Spectrum& spectrum, double beta);

/// Minimizer of beta_R sum p_i E_i + log sum p_i^2 over the simplex:
/// truncated-linear (water-filling) weights found by a support scan. Ties at
/// the support boundary resolve toward the lower objective.
EnsembleResult exact_renyi(const Spectrum& spectrum, double beta_r);

/// max over i of the KKT violation of the Renyi stationarity conditions.
double renyi_kkt_residual(const Spectrum& spectrum, const Eigen::VectorXd& weights, double beta_r);

/// Renyi objective beta_R sum p E + log sum p^2.
double renyi_objective(const Spectrum& spectrum, const Eigen::VectorXd& weights, double beta_r);

/// tr(O rho) for an ensemble diagonal in the eigenbasis (needs vectors).
double ensemble_observable(const Spectrum& spectrum, const Eigen::VectorXd& weights,
                           const Eigen::MatrixXd& dense_observable);

/// Adds the standard observables for the geometry to the result.
void attach_observables(EnsembleResult& result, const Spectrum& spectrum,
                        const Geometry& geometry);

/// tr(H^2 rho) - tr(H rho)^2 for an eigenbasis-diagonal ensemble.
double energy_variance(const Spectrum& spectrum, const Eigen::VectorXd& weights);

/// Exactly evaluated free energy of a materialized ansatz state.
struct AnsatzFreeEnergy {
  double free_energy = 0.0;
  double energy = 0.0;
  double s2 = 0.0;
};
AnsatzFreeEnergy exact_ansatz_free_energy(const DensityAnsatz& ansatz,
                                          const ParameterVector& params,
                                          const IsingHamiltonian& h, double beta_r,
                                          int max_sites = 10);

/// Inverse temperature at which the ensemble's energy density matches the
/// target (monotone bisection to 1e-8 in density).
double match_energy_density(const Spectrum& spectrum, double target_density, EnsembleKind kind,
                            int num_sites);

}  // namespace rvmc
