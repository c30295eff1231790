#include "renyivmc/ansatz.hpp"

#include <stdexcept>

namespace rvmc {

EnergyGradientSample energy_gradient_sample_by_eval(const DensityAnsatz& ansatz,
                                                    const ParameterVector& params,
                                                    const std::vector<ConnectedTerm>& connected,
                                                    const SpinConfiguration& s) {
  const std::size_t p = ansatz.parameter_count();
  EnergyGradientSample out;
  out.delta_diag = Eigen::VectorXcd::Zero(p);
  out.h_weighted = Eigen::VectorXcd::Zero(p);

  const EvalResult diag = ansatz.eval(params, s, s, /*want_gradient=*/true);
  if (diag.is_zero()) {
    throw std::runtime_error("local energy at a configuration with rho_ss = 0");
  }
  out.delta_diag = diag.gradient;

  std::complex<double> e_loc{0.0, 0.0};
  for (const auto& term : connected) {
    if (term.flips.empty()) {
      e_loc += term.value;
      out.h_weighted += term.value * diag.gradient;
      continue;
    }
    SpinConfiguration sp = s;
    for (int site : term.flips) flip(sp, site);
    const EvalResult off = ansatz.eval(params, s, sp, /*want_gradient=*/true);
    if (off.is_zero()) continue;
    const std::complex<double> ratio = ratio_from_logs(off.log_value, diag.log_value);
    e_loc += term.value * ratio;
    out.h_weighted += (term.value * ratio) * off.gradient;
  }
  out.local_energy = e_loc.real();
  return out;
}

EnergyGradientSample DensityAnsatz::energy_gradient_sample(
    const ParameterVector& params, const std::vector<ConnectedTerm>& connected,
    const SpinConfiguration& s) const {
  return energy_gradient_sample_by_eval(*this, params, connected, s);
}

Eigen::MatrixXcd brute_force_rho(const DensityAnsatz& ansatz, const ParameterVector& params,
                                 int max_sites) {
  const int n = ansatz.num_sites();
  if (n > max_sites) throw std::invalid_argument("brute_force_rho above the site cap");
  const std::size_t dim = std::size_t{1} << n;
  Eigen::MatrixXcd logs(dim, dim);
  double max_log = neg_infinity();
  for (std::size_t col = 0; col < dim; ++col) {
    const SpinConfiguration sp = configuration_from_index(col, n);
    for (std::size_t row = 0; row < dim; ++row) {
      const SpinConfiguration s = configuration_from_index(row, n);
      const LogAmplitude a = ansatz.eval(params, s, sp, false).amplitude();
      logs(row, col) = {a.log_modulus, a.phase};
      if (a.log_modulus > max_log) max_log = a.log_modulus;
    }
  }
  // Rescale by the largest element so the dense matrix is representable for
  // any parameter magnitude; rho is unnormalized anyway.
  Eigen::MatrixXcd rho(dim, dim);
  for (std::size_t col = 0; col < dim; ++col) {
    for (std::size_t row = 0; row < dim; ++row) {
      const double lm = logs(row, col).real();
      rho(row, col) = std::isfinite(lm)
                          ? std::polar(std::exp(lm - max_log), logs(row, col).imag())
                          : std::complex<double>{0.0, 0.0};
    }
  }
  return rho;
}

}  // namespace rvmc
