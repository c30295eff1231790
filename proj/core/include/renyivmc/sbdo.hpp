#pragma once

#include "renyivmc/ansatz.hpp"
#include "renyivmc/transfer_chain.hpp"

namespace rvmc {

/// String-bond density operator: a product of locally purified chains along
/// site strings that share physical indices through copy tensors,
///   rho_{s s'} = prod_i tr( prod_{j in string i} M^[i,j]_{s_j s_j'} ).
/// A single string visiting every site in order is exactly an MPDO.
class SbdoAnsatz : public DensityAnsatz {
 public:
  SbdoAnsatz(int num_sites, std::vector<std::vector<int>> strings, int bond_dim, int kraus_dim);

  std::string kind() const override { return "sbdo"; }
  int num_sites() const override { return n_; }
  int bond_dim() const { return d_; }
  int kraus_dim() const { return chi_; }
  int num_strings() const { return static_cast<int>(strings_.size()); }
  const std::vector<std::vector<int>>& strings() const { return strings_; }
  std::size_t parameter_count() const override { return layout_.total_size(); }
  const ParameterLayout& layout() const override { return layout_; }

  ParameterVector init(std::uint64_t seed, double scale) const override;
  EvalResult eval(const ParameterVector& params, const SpinConfiguration& s,
                  const SpinConfiguration& sp, bool want_gradient) const override;
  std::unique_ptr<PairCache> make_cache(const ParameterVector& params, SpinConfiguration s,
                                        SpinConfiguration sp) const override;
  EnergyGradientSample energy_gradient_sample(const ParameterVector& params,
                                              const std::vector<ConnectedTerm>& connected,
                                              const SpinConfiguration& s) const override;
  ParameterVector grow_from(const DensityAnsatz& small, const ParameterVector& params_small,
                            std::uint64_t seed, double noise) const override;
  std::string spec_string() const override;

  /// Tensor view of string i inside a parameter vector.
  ChainTensorView string_view(const ParameterVector& params, int i) const {
    return {params.data() + layout_.blocks()[i].offset, static_cast<int>(strings_[i].size()), d_,
            chi_};
  }

  /// Position of a site within string i, or -1 when the string skips it.
  int position_in_string(int i, int site) const { return positions_[i][site]; }

 private:
  int n_;
  std::vector<std::vector<int>> strings_;
  int d_;
  int chi_;
  std::vector<std::vector<int>> positions_;
  ParameterLayout layout_;
};

/// Boustrophedon strings across an lx x ly lattice. n_s = 1: one horizontal
/// snake; n_s = 2: horizontal + vertical; n_s = 4: additionally the
/// horizontal and vertical snakes with reversed row/column traversal order.
std::vector<std::vector<int>> snake_strings(int lx, int ly, int n_s);

}  // namespace rvmc
