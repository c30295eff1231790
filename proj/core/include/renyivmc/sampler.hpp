#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "renyivmc/ansatz.hpp"
#include "renyivmc/rng.hpp"

namespace rvmc {

enum class TargetKind {
  diagonal,     ///< p(s)      proportional to rho_ss
  offdiagonal,  ///< q(s, s')  proportional to |rho_ss'|^2
};

struct SamplerConfig {
  int chains = 8;
  int burn_in_sweeps = 100;
  int sweeps_per_sample = 1;  ///< thinning; one sweep = N proposal attempts
  int samples_per_chain = 64;
  std::uint64_t seed = 0;
  /// Proposal site order. `random` draws the site uniformly per attempt
  /// (the rule the stationarity checks assemble); `sequential` visits sites
  /// in order within a sweep, which keeps chain-cache repairs local and is
  /// the practical choice for large tensor-network runs.
  enum class SiteOrder { random, sequential } site_order = SiteOrder::random;

  void validate() const;
};

/// One Metropolis-Hastings chain. The cache tracks the current
/// configuration (pair) and its log density; the stored value always equals
/// re-evaluation at the current configuration.
struct ChainState {
  TargetKind kind = TargetKind::diagonal;
  std::unique_ptr<PairCache> cache;
  Rng rng{0};
  long accepted = 0;
  long proposed = 0;
  bool burned_in = false;
  int sweep_position = 0;

  /// log of the (unnormalized) target density at the current configuration.
  double log_density() const;
  double acceptance_rate() const {
    return proposed > 0 ? static_cast<double>(accepted) / proposed : 0.0;
  }
};

/// Starts a chain at a random nonzero-density configuration (diagonal pairs
/// s = s' for both kinds; off-diagonal chains open from the diagonal).
ChainState start_chain(TargetKind kind, const DensityAnsatz& ansatz,
                       const ParameterVector& params, std::uint64_t seed);

/// One proposal targeting p(s) ~ rho_ss: a uniformly chosen single-site
/// flip, accepted with min(1, rho_new / rho_cur).
void step_diagonal(ChainState& chain);

/// One proposal targeting q(s,s') ~ |rho_ss'|^2: with probability 1/2 flips
/// one uniformly chosen index on a uniformly chosen side, otherwise flips
/// the same uniformly chosen index on both sides.
void step_offdiagonal(ChainState& chain);

/// Same moves with the flip site fixed by the caller (sequential sweeps).
void attempt_diagonal(ChainState& chain, int site);
void attempt_offdiagonal(ChainState& chain, int site);

/// One sweep = N proposal attempts (site choice per SiteOrder).
void sweep_chain(ChainState& chain, SamplerConfig::SiteOrder order);

struct DiagonalSamples {
  std::vector<std::vector<SpinConfiguration>> chains;
  std::vector<double> acceptance;

  long total() const {
    long t = 0;
    for (const auto& c : chains) t += static_cast<long>(c.size());
    return t;
  }
};

struct OffdiagSamples {
  std::vector<std::vector<std::pair<SpinConfiguration, SpinConfiguration>>> chains;
  std::vector<double> acceptance;

  long total() const {
    long t = 0;
    for (const auto& c : chains) t += static_cast<long>(c.size());
    return t;
  }
};

/// Chains are independent; with threads > 1 they run concurrently over the
/// shared read-only parameters. Output slots are indexed by chain, so the
/// result is identical for any thread count.
DiagonalSamples run_chains_diagonal(const SamplerConfig& config, const DensityAnsatz& ansatz,
                                    const ParameterVector& params, int threads = 1);
OffdiagSamples run_chains_offdiagonal(const SamplerConfig& config, const DensityAnsatz& ansatz,
                                      const ParameterVector& params, int threads = 1);

/// Persistent chain ensemble for iterative optimization: configurations and
/// RNG streams survive parameter updates, caches are rebuilt per epoch.
class SamplerPool {
 public:
  SamplerPool(TargetKind kind, int chains, std::uint64_t seed);

  /// Advances all chains under the given parameters and returns thinned
  /// samples; the first epoch additionally runs the burn-in.
  DiagonalSamples sample_diagonal(const SamplerConfig& config, const DensityAnsatz& ansatz,
                                  const ParameterVector& params, int threads = 1);
  OffdiagSamples sample_offdiagonal(const SamplerConfig& config, const DensityAnsatz& ansatz,
                                    const ParameterVector& params, int threads = 1);

 private:
  struct Slot {
    SpinConfiguration ket;
    SpinConfiguration bra;
    Rng rng{0};
    bool started = false;
  };
  TargetKind kind_;
  std::vector<Slot> slots_;
  std::uint64_t seed_;
};

/// I.i.d. draws from the exactly enumerated target distribution (inverse
/// CDF). Test/diagnostic support; N capped.
DiagonalSamples exact_diagonal_samples(const DensityAnsatz& ansatz, const ParameterVector& params,
                                       std::uint64_t seed, long total_draws, int groups,
                                       int max_sites = 10);
OffdiagSamples exact_offdiagonal_samples(const DensityAnsatz& ansatz,
                                         const ParameterVector& params, std::uint64_t seed,
                                         long total_draws, int groups, int max_sites = 10);

/// Explicit Metropolis transition kernels over the full basis, assembled
/// from the same proposal and acceptance rules as the step functions.
/// Stationarity oracles; N capped.
Eigen::MatrixXd diagonal_kernel(const DensityAnsatz& ansatz, const ParameterVector& params,
                                int max_sites = 5);
Eigen::MatrixXd offdiagonal_kernel(const DensityAnsatz& ansatz, const ParameterVector& params,
                                   int max_sites = 4);

}  // namespace rvmc
