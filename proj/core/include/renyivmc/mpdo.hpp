#pragma once

#include "renyivmc/ansatz.hpp"
#include "renyivmc/transfer_chain.hpp"

namespace rvmc {

/// Matrix product density operator: the ancilla-traced form of a locally
/// purified MPS in trace gauge,
///   rho_{s s'} = tr(M^[1]_{s1 s1'} ... M^[N]_{sN sN'}),
///   M^[j]_{s s'} = sum_a A^[j]_{s,a} (x) A^[j]_{s',a},
/// with real site tensors A^[j] of shape D x D x 2 x chi.
class MpdoAnsatz : public DensityAnsatz {
 public:
  MpdoAnsatz(int num_sites, int bond_dim, int kraus_dim);

  std::string kind() const override { return "mpdo"; }
  int num_sites() const override { return n_; }
  int bond_dim() const { return d_; }
  int kraus_dim() const { return chi_; }
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

  ChainTensorView tensor_view(const ParameterVector& params) const {
    check_params(params);
    return {params.data(), n_, d_, chi_};
  }

 private:
  int n_;
  int d_;
  int chi_;
  ParameterLayout layout_;
};

/// Identity-plus-noise initialization of one purified chain tensor block
/// (shared by MPDO and SBDO): A_{s,a} = delta_{a, min(s, chi-1)} I_D plus
/// i.i.d. noise. For chi >= 2, zero noise gives the maximally mixed state.
void init_chain_tensors(double* data, int length, int bond_dim, int kraus_dim, class Rng& rng,
                        double scale);

/// Block-embeds one chain's tensors into a larger chain (bond and/or Kraus
/// dimension); freshly exposed entries get noise of the given width.
void grow_chain_tensors(const ChainTensorView& small, double* large, int bond_dim_large,
                        int kraus_dim_large, class Rng& rng, double noise);

}  // namespace rvmc
