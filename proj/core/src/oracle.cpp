#include "renyivmc/oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace rvmc {

Spectrum exact_spectrum(const IsingHamiltonian& h, bool want_vectors, int max_sites) {
  if (h.num_sites() > max_sites) {
    throw std::invalid_argument("exact diagonalization above the site cap");
  }
  const Eigen::MatrixXd dense = dense_matrix(h, max_sites);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      dense, want_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigensolve failed");
  Spectrum s;
  s.eigenvalues = solver.eigenvalues();
  if (want_vectors) s.eigenvectors = solver.eigenvectors();
  return s;
}

EnsembleResult exact_gibbs(const Spectrum& spectrum, double beta) {
  const auto& e = spectrum.eigenvalues;
  const Eigen::Index dim = e.size();
  Eigen::VectorXd logw = -beta * e.array();
  const double shift = logw.maxCoeff();
  Eigen::VectorXd w = (logw.array() - shift).exp();
  w /= w.sum();

  EnsembleResult r;
  r.kind = EnsembleKind::gibbs;
  r.beta = beta;
  r.weights = w;
  r.energy = w.dot(e);
  double entropy = 0.0;
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (w(i) > 0.0) entropy -= w(i) * std::log(w(i));
  }
  r.entropy = entropy;
  r.free_energy = beta * r.energy - entropy;
  return r;
}

double renyi_objective(const Spectrum& spectrum, const Eigen::VectorXd& weights, double beta_r) {
  return beta_r * weights.dot(spectrum.eigenvalues) + std::log(weights.squaredNorm());
}

double renyi_kkt_residual(const Spectrum& spectrum, const Eigen::VectorXd& weights,
                          double beta_r) {
  // Stationarity: beta_R E_i + 2 p_i / sum p^2 is constant on the support
  // and >= that constant off it.
  const auto& e = spectrum.eigenvalues;
  const double purity = weights.squaredNorm();
  double lambda = 0.0;
  double weight_on_support = 0.0;
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    if (weights(i) > 0.0) {
      lambda += weights(i) * (beta_r * e(i) + 2.0 * weights(i) / purity);
      weight_on_support += weights(i);
    }
  }
  lambda /= weight_on_support;
  double residual = std::abs(weight_on_support - 1.0);
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    const double grad_i = beta_r * e(i) + 2.0 * weights(i) / purity;
    if (weights(i) > 0.0) {
      residual = std::max(residual, std::abs(grad_i - lambda));
    } else {
      residual = std::max(residual, std::max(0.0, lambda - grad_i));
    }
  }
  return residual;
}

EnsembleResult exact_renyi(const Spectrum& spectrum, double beta_r) {
  const auto& e = spectrum.eigenvalues;
  const Eigen::Index dim = e.size();
  if (beta_r < 0.0) throw std::invalid_argument("beta_r must be >= 0");

  EnsembleResult r;
  r.kind = EnsembleKind::renyi;
  r.beta = beta_r;

  if (beta_r == 0.0) {
    r.weights = Eigen::VectorXd::Constant(dim, 1.0 / dim);
  } else {
    // Water filling: on a support of the k lowest eigenvalues the weights
    // are truncated-linear, p_i = a - b E_i, fixed by sum p = 1 and
    // b = beta_R sum p^2 / 2. Eliminating a gives a quadratic in b; the
    // root continuous with b -> 0 as beta_R -> 0 is the minimizer.
    double best_objective = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best;
    double s1 = 0.0;
    double s2 = 0.0;
    for (Eigen::Index k = 1; k <= dim; ++k) {
      s1 += e(k - 1);
      s2 += e(k - 1) * e(k - 1);
      // a support must not split a degenerate multiplet
      if (k < dim && e(k) == e(k - 1)) continue;
      const double var = s2 - s1 * s1 / k;  // k * variance of the support energies
      const double disc = 1.0 / (beta_r * beta_r) - var / k;
      if (disc < 0.0) continue;
      double b;
      if (var <= 1e-300) {
        b = beta_r / (2.0 * k);  // flat support limit of the small root
      } else {
        b = (1.0 / beta_r - std::sqrt(disc)) / var;
      }
      const double a = (1.0 + b * s1) / k;
      Eigen::VectorXd w = Eigen::VectorXd::Zero(dim);
      bool feasible = b >= 0.0;
      for (Eigen::Index i = 0; i < k && feasible; ++i) {
        w(i) = a - b * e(i);
        feasible = w(i) >= -1e-14;
        w(i) = std::max(w(i), 0.0);
      }
      // off-support optimality: a - b E_i <= 0 beyond the boundary
      if (feasible && k < dim && a - b * e(k) > 1e-14) feasible = false;
      if (!feasible) continue;
      const double objective = renyi_objective(spectrum, w, beta_r);
      if (objective < best_objective) {
        best_objective = objective;
        best = w;
      }
    }
    if (best.size() == 0) throw std::runtime_error("water-filling scan found no feasible support");
    r.weights = best;
  }

  r.energy = r.weights.dot(e);
  r.entropy = -std::log(r.weights.squaredNorm());
  r.free_energy = beta_r * r.energy - r.entropy;
  return r;
}

double ensemble_observable(const Spectrum& spectrum, const Eigen::VectorXd& weights,
                           const Eigen::MatrixXd& dense_observable) {
  if (!spectrum.has_vectors()) throw std::invalid_argument("observables need eigenvectors");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (weights(i) == 0.0) continue;
    const auto v = spectrum.eigenvectors.col(i);
    acc += weights(i) * v.dot(dense_observable * v);
  }
  return acc;
}

void attach_observables(EnsembleResult& result, const Spectrum& spectrum,
                        const Geometry& geometry) {
  for (const auto& obs : standard_observables(geometry)) {
    result.observables[obs.name] =
        ensemble_observable(spectrum, result.weights, dense_matrix(obs));
  }
}

double energy_variance(const Spectrum& spectrum, const Eigen::VectorXd& weights) {
  const auto& e = spectrum.eigenvalues;
  const double mean = weights.dot(e);
  return weights.dot(e.cwiseAbs2()) - mean * mean;
}

AnsatzFreeEnergy exact_ansatz_free_energy(const DensityAnsatz& ansatz,
                                          const ParameterVector& params,
                                          const IsingHamiltonian& h, double beta_r,
                                          int max_sites) {
  if (ansatz.num_sites() != h.num_sites()) {
    throw std::invalid_argument("hamiltonian and ansatz disagree on the number of sites");
  }
  const Eigen::MatrixXcd rho = brute_force_rho(ansatz, params, max_sites);
  const Eigen::MatrixXd dense = dense_matrix(h, std::max(max_sites, h.num_sites()));
  const double tr = rho.trace().real();
  if (tr <= 0.0) throw std::runtime_error("materialized rho has non-positive trace");
  AnsatzFreeEnergy out;
  out.energy = (dense * rho).trace().real() / tr;
  const double purity = (rho * rho).trace().real() / (tr * tr);
  out.s2 = -std::log(purity);
  out.free_energy = beta_r * out.energy - out.s2;
  return out;
}

double match_energy_density(const Spectrum& spectrum, double target_density, EnsembleKind kind,
                            int num_sites) {
  const auto energy_at = [&](double beta) {
    return (kind == EnsembleKind::gibbs ? exact_gibbs(spectrum, beta)
                                        : exact_renyi(spectrum, beta))
               .energy /
           num_sites;
  };
  const double e0 = spectrum.eigenvalues(0) / num_sites;
  const double e_infinite_t = energy_at(0.0);
  if (target_density < e0 || target_density > e_infinite_t) {
    throw std::invalid_argument("target energy density out of reachable range");
  }
  double lo = 0.0;
  double hi = 1.0;
  while (energy_at(hi) > target_density) {
    hi *= 2.0;
    if (hi > 1e8) break;
  }
  // energy decreases monotonically in beta
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double em = energy_at(mid);
    if (std::abs(em - target_density) < 1e-8) return mid;
    if (em > target_density) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace rvmc
