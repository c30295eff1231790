#pragma once

#include "renyivmc/ansatz.hpp"

namespace rvmc {

/// Entangled plaquette density operator: overlapping plaquettes sharing
/// physical indices through copy tensors, each carrying its own traced
/// ancilla,
///   rho_{s s'} = prod_p sum_a phi^[p](s_p, a) phi^[p](s'_p, a)
/// with real plaquette tensors phi^[p] of shape 2^{n_p} x chi_a.
class EpdoAnsatz : public DensityAnsatz {
 public:
  EpdoAnsatz(int num_sites, std::vector<std::vector<int>> plaquettes, int kraus_dim);

  std::string kind() const override { return "epdo"; }
  int num_sites() const override { return n_; }
  int kraus_dim() const { return chi_; }
  const std::vector<std::vector<int>>& plaquettes() const { return plaquettes_; }
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

  /// Row of phi^[p] selected by a configuration: plaquette-local bits,
  /// little-endian in the plaquette's site order.
  int row_of(int p, const SpinConfiguration& s) const;

  /// Pointer to phi^[p](row, 0); entries for Kraus index a follow contiguously.
  const double* row_data(const ParameterVector& params, int p, int row) const {
    return params.data() + layout_.blocks()[p].offset + static_cast<std::size_t>(row) * chi_;
  }

  const std::vector<int>& plaquettes_of_site(int site) const { return plaquettes_of_site_[site]; }

 private:
  int n_;
  std::vector<std::vector<int>> plaquettes_;
  int chi_;
  std::vector<std::vector<int>> plaquettes_of_site_;
  ParameterLayout layout_;
};

/// Overlapping windows of `width` consecutive sites on a chain, or width x
/// width blocks on a square lattice (stride one in each direction).
std::vector<std::vector<int>> default_plaquettes(const Geometry& geometry, int width);

}  // namespace rvmc
