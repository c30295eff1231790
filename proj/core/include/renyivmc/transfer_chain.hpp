#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "renyivmc/log_amplitude.hpp"
#include "renyivmc/spin.hpp"

namespace rvmc {

inline int spin_index(Spin s) { return s > 0 ? 0 : 1; }

/// View of the site tensors of one locally purified chain inside a flat
/// parameter array. Site j occupies 2 * chi * D * D doubles: for physical
/// index s in {0,1} and Kraus index a, a column-major D x D matrix at
/// offset ((s * chi + a) * D * D).
class ChainTensorView {
 public:
  ChainTensorView(const double* data, int length, int bond_dim, int kraus_dim)
      : data_(data), length_(length), d_(bond_dim), chi_(kraus_dim) {}

  int length() const { return length_; }
  int bond_dim() const { return d_; }
  int kraus_dim() const { return chi_; }
  int site_stride() const { return 2 * chi_ * d_ * d_; }

  Eigen::Map<const Eigen::MatrixXd> slice(int site, int s_idx, int a) const {
    return {data_ + site * site_stride() + (s_idx * chi_ + a) * d_ * d_, d_, d_};
  }

  /// Transfer matrix M_j(s, s') = sum_a A_{s,a} (x) A_{s',a}, size D^2 x D^2.
  Eigen::MatrixXd transfer(int site, int ket_idx, int bra_idx) const;

 private:
  const double* data_;
  int length_;
  int d_;
  int chi_;
};

/// log tr(M_1 ... M_L) of prebuilt transfer matrices, with per-step
/// rescaling. Imaginary part is 0 or pi (real chains).
CLog chain_log_trace(const std::vector<Eigen::MatrixXd>& ms);

/// Evaluates log rho for one chain and, when grad_out != nullptr,
/// accumulates d log rho / d(tensor entries) into grad_out (layout identical
/// to the tensor block, length = length * site_stride). Zero elements leave
/// grad_out untouched.
CLog chain_eval(const ChainTensorView& view, const int* ket_idx, const int* bra_idx,
                double* grad_out);

/// Diagonal-configuration environments of one chain, supporting single-site
/// bra-flip ratios and the weighted-gradient pass.
struct ChainDiagEnvironments {
  std::vector<Eigen::MatrixXd> transfer;  ///< M_j at the diagonal configuration
  std::vector<Eigen::MatrixXd> prefix;    ///< prefix[j] = normalized M_1..M_j, prefix[0] = I
  std::vector<Eigen::MatrixXd> suffix;    ///< suffix[j] = normalized M_j..M_L, suffix[L] = I
  double trace = 0.0;                     ///< tr(prefix[L]) (rescaled; sign meaningful)

  bool zero() const { return trace == 0.0; }
};

ChainDiagEnvironments chain_diag_environments(const ChainTensorView& view, const int* s_idx);

/// rho(bra flip at position k) / rho, from cached environments.
double chain_flip_ratio(const ChainTensorView& view, const ChainDiagEnvironments& env,
                        const int* s_idx, int position);

/// Gradient pass over one chain at a diagonal configuration:
///   delta_out  += d log rho_ss / d(tensors)
///   weighted_out += sum_k v_k * (rho_k / rho) * d log rho_k / d(tensors)
/// where rho_k is the element with the bra flipped at position k and v_k are
/// caller-supplied weights (entries with v_k = 0 are skipped). Implemented
/// with a first-order insertion chain, O(L) matrix products total.
void chain_weighted_gradient(const ChainTensorView& view, const int* s_idx,
                             const std::vector<double>& v, double* delta_out,
                             double* weighted_out);

/// Incremental evaluator of one chain's element under single-position
/// replacements of the physical indices. Keeps prefix/suffix partial
/// products with lazy repair, so a proposal costs one matrix product plus
/// the repair distance from the last committed position.
class ChainPairCache {
 public:
  ChainPairCache(const ChainTensorView& view, std::vector<int> ket_idx, std::vector<int> bra_idx);

  CLog log_value() const { return log_value_; }
  int ket_index(int position) const { return ket_idx_[position]; }
  int bra_index(int position) const { return bra_idx_[position]; }

  /// rho(with indices replaced at position) / rho(current); 0 if the new
  /// element vanishes.
  double ratio(int position, int new_ket, int new_bra);

  void commit(int position, int new_ket, int new_bra);

  /// Full recomputation of the tracked value (also used to bound fp drift).
  void refresh();

 private:
  void ensure_prefix(int j);
  void ensure_suffix(int j);

  ChainTensorView view_;
  std::vector<int> ket_idx_;
  std::vector<int> bra_idx_;
  std::vector<Eigen::MatrixXd> ms_;
  std::vector<Eigen::MatrixXd> prefix_;
  std::vector<Eigen::MatrixXd> suffix_;
  int valid_prefix_ = 0;  ///< prefix_[j] valid for j <= valid_prefix_
  int valid_suffix_ = 0;  ///< suffix_[j] valid for j >= valid_suffix_
  CLog log_value_{0.0, 0.0};
  long commits_since_refresh_ = 0;

  struct Proposal {
    int position = -1;
    int ket = 0;
    int bra = 0;
    double ratio = 0.0;
    Eigen::MatrixXd transfer;
  } last_;
};

}  // namespace rvmc
