#include "renyivmc/sampler.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace rvmc {

namespace {

/// Runs fn(c) for every chain index; each call owns its output slot, so the
/// result does not depend on the thread count.
void for_each_chain(int chains, int threads, const std::function<void(int)>& fn) {
  threads = std::max(1, std::min(threads, chains));
  if (threads == 1) {
    for (int c = 0; c < chains; ++c) fn(c);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int c = next.fetch_add(1); c < chains; c = next.fetch_add(1)) fn(c);
    });
  }
  for (auto& th : pool) th.join();
}

SpinConfiguration random_configuration(Rng& rng, int n) {
  SpinConfiguration s(n);
  for (int i = 0; i < n; ++i) s[i] = rng.bernoulli(0.5) ? Spin{+1} : Spin{-1};
  return s;
}

bool accept(Rng& rng, double log_ratio) {
  if (log_ratio >= 0.0) return true;
  return rng.uniform() < std::exp(log_ratio);
}

/// Target log-density change for a move, from the element log-ratio.
double target_log_ratio(TargetKind kind, const CLog& elem_ratio) {
  return kind == TargetKind::diagonal ? elem_ratio.real() : 2.0 * elem_ratio.real();
}

void do_attempt(ChainState& chain, Side side, int site) {
  ++chain.proposed;
  const CLog ratio = chain.cache->flip_log_ratio(side, site);
  if (accept(chain.rng, target_log_ratio(chain.kind, ratio))) {
    chain.cache->commit_flip(side, site);
    ++chain.accepted;
  }
}

}  // namespace

void SamplerConfig::validate() const {
  if (chains < 1 || burn_in_sweeps < 0 || sweeps_per_sample < 1 || samples_per_chain < 1) {
    throw std::invalid_argument("sampler config fields must be positive");
  }
}

double ChainState::log_density() const {
  const double l = cache->log_value().real();
  return kind == TargetKind::diagonal ? l : 2.0 * l;
}

ChainState start_chain(TargetKind kind, const DensityAnsatz& ansatz,
                       const ParameterVector& params, std::uint64_t seed) {
  ChainState chain;
  chain.kind = kind;
  chain.rng = Rng(seed);
  const int n = ansatz.num_sites();
  for (int attempt = 0; attempt < 1024; ++attempt) {
    SpinConfiguration s = random_configuration(chain.rng, n);
    auto cache = ansatz.make_cache(params, s, s);
    if (!cache->is_zero()) {
      chain.cache = std::move(cache);
      return chain;
    }
  }
  throw std::runtime_error("could not find a configuration with rho_ss > 0");
}

void attempt_diagonal(ChainState& chain, int site) { do_attempt(chain, Side::both, site); }

void attempt_offdiagonal(ChainState& chain, int site) {
  if (chain.rng.bernoulli(0.5)) {
    do_attempt(chain, Side::both, site);
  } else {
    do_attempt(chain, chain.rng.bernoulli(0.5) ? Side::ket : Side::bra, site);
  }
}

void step_diagonal(ChainState& chain) {
  const int n = static_cast<int>(chain.cache->ket().size());
  attempt_diagonal(chain, static_cast<int>(chain.rng.uniform_index(n)));
}

void step_offdiagonal(ChainState& chain) {
  const int n = static_cast<int>(chain.cache->ket().size());
  attempt_offdiagonal(chain, static_cast<int>(chain.rng.uniform_index(n)));
}

void sweep_chain(ChainState& chain, SamplerConfig::SiteOrder order) {
  const int n = static_cast<int>(chain.cache->ket().size());
  for (int k = 0; k < n; ++k) {
    int site;
    if (order == SamplerConfig::SiteOrder::random) {
      site = static_cast<int>(chain.rng.uniform_index(n));
    } else {
      site = chain.sweep_position;
      chain.sweep_position = (chain.sweep_position + 1) % n;
    }
    if (chain.kind == TargetKind::diagonal) {
      attempt_diagonal(chain, site);
    } else {
      attempt_offdiagonal(chain, site);
    }
  }
}

namespace {

template <typename TakeSample>
void drive_chain(ChainState& chain, const SamplerConfig& config, TakeSample&& take) {
  if (!chain.burned_in) {
    for (int b = 0; b < config.burn_in_sweeps; ++b) sweep_chain(chain, config.site_order);
    chain.burned_in = true;
  }
  for (int k = 0; k < config.samples_per_chain; ++k) {
    for (int t = 0; t < config.sweeps_per_sample; ++t) sweep_chain(chain, config.site_order);
    take(chain);
  }
}

}  // namespace

DiagonalSamples run_chains_diagonal(const SamplerConfig& config, const DensityAnsatz& ansatz,
                                    const ParameterVector& params, int threads) {
  config.validate();
  DiagonalSamples out;
  out.chains.resize(config.chains);
  out.acceptance.resize(config.chains);
  for_each_chain(config.chains, threads, [&](int c) {
    ChainState chain =
        start_chain(TargetKind::diagonal, ansatz, params, derive_seed(config.seed, c));
    out.chains[c].reserve(config.samples_per_chain);
    drive_chain(chain, config,
                [&](const ChainState& ch) { out.chains[c].push_back(ch.cache->ket()); });
    out.acceptance[c] = chain.acceptance_rate();
  });
  return out;
}

OffdiagSamples run_chains_offdiagonal(const SamplerConfig& config, const DensityAnsatz& ansatz,
                                      const ParameterVector& params, int threads) {
  config.validate();
  OffdiagSamples out;
  out.chains.resize(config.chains);
  out.acceptance.resize(config.chains);
  for_each_chain(config.chains, threads, [&](int c) {
    ChainState chain =
        start_chain(TargetKind::offdiagonal, ansatz, params, derive_seed(config.seed, c ^ 0x0ffd));
    out.chains[c].reserve(config.samples_per_chain);
    drive_chain(chain, config, [&](const ChainState& ch) {
      out.chains[c].emplace_back(ch.cache->ket(), ch.cache->bra());
    });
    out.acceptance[c] = chain.acceptance_rate();
  });
  return out;
}

SamplerPool::SamplerPool(TargetKind kind, int chains, std::uint64_t seed)
    : kind_(kind), slots_(chains), seed_(seed) {}

DiagonalSamples SamplerPool::sample_diagonal(const SamplerConfig& config,
                                             const DensityAnsatz& ansatz,
                                             const ParameterVector& params, int threads) {
  if (kind_ != TargetKind::diagonal) throw std::logic_error("pool targets the off-diagonal");
  DiagonalSamples out;
  out.chains.resize(slots_.size());
  out.acceptance.resize(slots_.size());
  for_each_chain(static_cast<int>(slots_.size()), threads, [&](int c) {
    Slot& slot = slots_[c];
    ChainState chain;
    chain.kind = kind_;
    if (!slot.started) {
      chain = start_chain(kind_, ansatz, params, derive_seed(seed_, c));
    } else {
      chain.rng = slot.rng;
      chain.cache = ansatz.make_cache(params, slot.ket, slot.ket);
      chain.burned_in = true;
      if (chain.cache->is_zero()) {
        chain = start_chain(kind_, ansatz, params, slot.rng.raw());
      }
    }
    drive_chain(chain, config,
                [&](const ChainState& ch) { out.chains[c].push_back(ch.cache->ket()); });
    out.acceptance[c] = chain.acceptance_rate();
    slot.ket = chain.cache->ket();
    slot.rng = chain.rng;
    slot.started = true;
  });
  return out;
}

OffdiagSamples SamplerPool::sample_offdiagonal(const SamplerConfig& config,
                                               const DensityAnsatz& ansatz,
                                               const ParameterVector& params, int threads) {
  if (kind_ != TargetKind::offdiagonal) throw std::logic_error("pool targets the diagonal");
  OffdiagSamples out;
  out.chains.resize(slots_.size());
  out.acceptance.resize(slots_.size());
  for_each_chain(static_cast<int>(slots_.size()), threads, [&](int c) {
    Slot& slot = slots_[c];
    ChainState chain;
    chain.kind = kind_;
    if (!slot.started) {
      chain = start_chain(kind_, ansatz, params, derive_seed(seed_, c ^ 0x0ffd));
    } else {
      chain.rng = slot.rng;
      chain.cache = ansatz.make_cache(params, slot.ket, slot.bra);
      chain.burned_in = true;
      if (chain.cache->is_zero()) {
        chain = start_chain(kind_, ansatz, params, slot.rng.raw());
      }
    }
    drive_chain(chain, config, [&](const ChainState& ch) {
      out.chains[c].emplace_back(ch.cache->ket(), ch.cache->bra());
    });
    out.acceptance[c] = chain.acceptance_rate();
    slot.ket = chain.cache->ket();
    slot.bra = chain.cache->bra();
    slot.rng = chain.rng;
    slot.started = true;
  }
  return out;
}

namespace {

struct EnumeratedTarget {
  std::vector<double> cumulative;  ///< normalized CDF
};

EnumeratedTarget enumerate_target(const DensityAnsatz& ansatz, const ParameterVector& params,
                                  TargetKind kind, int max_sites) {
  const int n = ansatz.num_sites();
  if (n > max_sites) throw std::invalid_argument("exact sampler above the site cap");
  const std::size_t dim = std::size_t{1} << n;
  const std::size_t total = kind == TargetKind::diagonal ? dim : dim * dim;
  std::vector<double> logs(total, neg_infinity());
  double max_log = neg_infinity();
  for (std::size_t i = 0; i < total; ++i) {
    const SpinConfiguration s = configuration_from_index(i % dim, n);
    const SpinConfiguration sp =
        kind == TargetKind::diagonal ? s : configuration_from_index(i / dim, n);
    const CLog l = ansatz.eval(params, s, sp, false).log_value;
    if (clog_is_zero(l)) continue;
    logs[i] = kind == TargetKind::diagonal ? l.real() : 2.0 * l.real();
    max_log = std::max(max_log, logs[i]);
  }
  if (!std::isfinite(max_log)) throw std::runtime_error("target distribution is identically zero");
  EnumeratedTarget t;
  t.cumulative.resize(total);
  double acc = 0.0;
  for (std::size_t i = 0; i < total; ++i) {
    if (std::isfinite(logs[i])) acc += std::exp(logs[i] - max_log);
    t.cumulative[i] = acc;
  }
  for (auto& c : t.cumulative) c /= acc;
  return t;
}

std::size_t draw_index(const EnumeratedTarget& t, Rng& rng) {
  const double u = rng.uniform();
  return std::lower_bound(t.cumulative.begin(), t.cumulative.end(), u) - t.cumulative.begin();
}

}  // namespace

DiagonalSamples exact_diagonal_samples(const DensityAnsatz& ansatz, const ParameterVector& params,
                                       std::uint64_t seed, long total_draws, int groups,
                                       int max_sites) {
  if (groups < 1 || total_draws < groups) throw std::invalid_argument("bad draw partition");
  const EnumeratedTarget t = enumerate_target(ansatz, params, TargetKind::diagonal, max_sites);
  const int n = ansatz.num_sites();
  DiagonalSamples out;
  out.chains.resize(groups);
  out.acceptance.assign(groups, 1.0);
  Rng rng(derive_seed(seed, 0xe5ac7));
  for (long k = 0; k < total_draws; ++k) {
    out.chains[k % groups].push_back(configuration_from_index(draw_index(t, rng), n));
  }
  return out;
}

OffdiagSamples exact_offdiagonal_samples(const DensityAnsatz& ansatz,
                                         const ParameterVector& params, std::uint64_t seed,
                                         long total_draws, int groups, int max_sites) {
  if (groups < 1 || total_draws < groups) throw std::invalid_argument("bad draw partition");
  const EnumeratedTarget t = enumerate_target(ansatz, params, TargetKind::offdiagonal, max_sites);
  const int n = ansatz.num_sites();
  const std::size_t dim = std::size_t{1} << n;
  OffdiagSamples out;
  out.chains.resize(groups);
  out.acceptance.assign(groups, 1.0);
  Rng rng(derive_seed(seed, 0xe5ac8));
  for (long k = 0; k < total_draws; ++k) {
    const std::size_t idx = draw_index(t, rng);
    out.chains[k % groups].emplace_back(configuration_from_index(idx % dim, n),
                                        configuration_from_index(idx / dim, n));
  }
  return out;
}

namespace {

double element_log(const DensityAnsatz& ansatz, const ParameterVector& params,
                   const SpinConfiguration& s, const SpinConfiguration& sp, TargetKind kind) {
  const CLog l = ansatz.eval(params, s, sp, false).log_value;
  if (clog_is_zero(l)) return neg_infinity();
  return kind == TargetKind::diagonal ? l.real() : 2.0 * l.real();
}

}  // namespace

Eigen::MatrixXd diagonal_kernel(const DensityAnsatz& ansatz, const ParameterVector& params,
                                int max_sites) {
  const int n = ansatz.num_sites();
  if (n > max_sites) throw std::invalid_argument("kernel assembly above the site cap");
  const std::size_t dim = std::size_t{1} << n;
  Eigen::MatrixXd kernel = Eigen::MatrixXd::Zero(dim, dim);
  for (std::size_t from = 0; from < dim; ++from) {
    const SpinConfiguration s = configuration_from_index(from, n);
    const double l_from = element_log(ansatz, params, s, s, TargetKind::diagonal);
    double stay = 1.0;
    for (int site = 0; site < n; ++site) {
      const SpinConfiguration sf = flipped(s, site);
      const double l_to = element_log(ansatz, params, sf, sf, TargetKind::diagonal);
      const double a = std::isfinite(l_to) ? std::min(1.0, std::exp(l_to - l_from)) : 0.0;
      const double p = a / n;  // site choice uniform
      kernel(basis_index(sf), from) += p;
      stay -= p;
    }
    kernel(from, from) += stay;
  }
  return kernel;
}

Eigen::MatrixXd offdiagonal_kernel(const DensityAnsatz& ansatz, const ParameterVector& params,
                                   int max_sites) {
  const int n = ansatz.num_sites();
  if (n > max_sites) throw std::invalid_argument("kernel assembly above the site cap");
  const std::size_t dim = std::size_t{1} << n;
  const std::size_t pairs = dim * dim;
  Eigen::MatrixXd kernel = Eigen::MatrixXd::Zero(pairs, pairs);
  for (std::size_t from = 0; from < pairs; ++from) {
    const SpinConfiguration s = configuration_from_index(from % dim, n);
    const SpinConfiguration sp = configuration_from_index(from / dim, n);
    const double l_from = element_log(ansatz, params, s, sp, TargetKind::offdiagonal);
    double stay = 1.0;
    auto add_move = [&](const SpinConfiguration& ns, const SpinConfiguration& nsp,
                        double proposal_prob) {
      const double l_to = element_log(ansatz, params, ns, nsp, TargetKind::offdiagonal);
      const double a = std::isfinite(l_to) ? std::min(1.0, std::exp(l_to - l_from)) : 0.0;
      const double p = proposal_prob * a;
      kernel(basis_index(ns) + dim * basis_index(nsp), from) += p;
      stay -= p;
    };
    for (int site = 0; site < n; ++site) {
      // joint flip: probability 1/2 * 1/n
      add_move(flipped(s, site), flipped(sp, site), 0.5 / n);
      // single-side flips: probability 1/2 * 1/2 * 1/n each
      add_move(flipped(s, site), sp, 0.25 / n);
      add_move(s, flipped(sp, site), 0.25 / n);
    }
    kernel(from, from) += stay;
  }
  return kernel;
}

}  // namespace rvmc
