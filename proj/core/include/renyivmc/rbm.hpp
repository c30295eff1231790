#pragma once

#include <array>
#include <complex>

#include "renyivmc/ansatz.hpp"

namespace rvmc {

/// Restricted Boltzmann machine purification with the hidden sum and the
/// ancilla trace carried out analytically:
///   log rho_{s s'} = sum_j (b^s_j s_j + conj(b^s_j) s'_j)
///                  + sum_i [lc(th_i(s)) + conj(lc(th_i(s')))]
///                  + sum_k lc(ta_k(s) + conj(ta_k(s'))),
/// where lc(z) = log 2 cosh z, th_i(x) = b^h_i + sum_j W^h_ij x_j and
/// ta_k(x) = b^a_k + sum_j W^a_kj x_j. All parameters are complex, stored
/// as (re, im) pairs.
class RbmAnsatz : public DensityAnsatz {
 public:
  RbmAnsatz(int num_sites, double hidden_density, double ancilla_density);

  std::string kind() const override { return "rbm"; }
  int num_sites() const override { return n_; }
  int num_hidden() const { return n_hidden_; }
  int num_ancilla() const { return n_ancilla_; }
  double hidden_density() const { return alpha_; }
  double ancilla_density() const { return beta_; }
  bool complex_parameters() const override { return true; }
  std::size_t parameter_count() const override { return layout_.total_size(); }
  const ParameterLayout& layout() const override { return layout_; }

  ParameterVector init(std::uint64_t seed, double scale) const override;
  EvalResult eval(const ParameterVector& params, const SpinConfiguration& s,
                  const SpinConfiguration& sp, bool want_gradient) const override;
  std::unique_ptr<PairCache> make_cache(const ParameterVector& params, SpinConfiguration s,
                                        SpinConfiguration sp) const override;
  ParameterVector grow_from(const DensityAnsatz& small, const ParameterVector& params_small,
                            std::uint64_t seed, double noise) const override;
  std::string spec_string() const override;

 private:
  friend class RbmPairCache;
  int n_;
  double alpha_;
  double beta_;
  int n_hidden_;
  int n_ancilla_;
  ParameterLayout layout_;
};

/// log(2 cosh z), stable for large |Re z|.
std::complex<double> log2cosh(std::complex<double> z);

/// tanh z, stable for large |Re z|.
std::complex<double> stable_tanh(std::complex<double> z);

/// A hidden-unit cosh factor rewritten as a string of bond-dimension-2
/// diagonal matrices: the traced product over all sites equals
/// 2 cosh(bias + sum_j w_j s_j) for every configuration.
struct DiagonalMatrixString {
  std::complex<double> bias;
  std::vector<std::complex<double>> weights;

  /// Diagonal entries of the 2x2 site matrix for spin value s at site j.
  std::array<std::complex<double>, 2> site_matrix(int j, Spin s) const;

  /// tr prod_j A^{s_j}_j (product of diagonals along each branch).
  std::complex<double> trace_product(const SpinConfiguration& s) const;
};

DiagonalMatrixString rbm_cosh_as_string(std::complex<double> hidden_bias,
                                        std::vector<std::complex<double>> weights);

}  // namespace rvmc
