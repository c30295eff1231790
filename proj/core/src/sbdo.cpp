#include "renyivmc/sbdo.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

#include "renyivmc/rng.hpp"

namespace rvmc {

namespace {

constexpr double kPi = 3.141592653589793238462643383280;

class SbdoPairCache final : public PairCache {
 public:
  SbdoPairCache(const SbdoAnsatz& ansatz, const ParameterVector& params, SpinConfiguration s,
                SpinConfiguration sp)
      : ansatz_(ansatz), ket_(std::move(s)), bra_(std::move(sp)) {
    for (int i = 0; i < ansatz_.num_strings(); ++i) {
      const auto& string = ansatz_.strings()[i];
      std::vector<int> ket_idx(string.size()), bra_idx(string.size());
      for (std::size_t k = 0; k < string.size(); ++k) {
        ket_idx[k] = spin_index(ket_[string[k]]);
        bra_idx[k] = spin_index(bra_[string[k]]);
      }
      chains_.emplace_back(ansatz_.string_view(params, i), std::move(ket_idx),
                           std::move(bra_idx));
    }
  }

  CLog log_value() const override {
    CLog acc{0.0, 0.0};
    for (const auto& c : chains_) acc += c.log_value();
    return acc;
  }

  CLog flip_log_ratio(Side side, int site) override {
    double log_mod = 0.0;
    double phase = 0.0;
    for (int i = 0; i < ansatz_.num_strings(); ++i) {
      const int pos = ansatz_.position_in_string(i, site);
      if (pos < 0) continue;
      const auto [k, b] = flipped_indices(i, pos, side);
      const double r = chains_[i].ratio(pos, k, b);
      if (r == 0.0) return {neg_infinity(), 0.0};
      log_mod += std::log(std::abs(r));
      if (r < 0.0) phase += kPi;
    }
    return {log_mod, phase};
  }

  void commit_flip(Side side, int site) override {
    for (int i = 0; i < ansatz_.num_strings(); ++i) {
      const int pos = ansatz_.position_in_string(i, site);
      if (pos < 0) continue;
      const auto [k, b] = flipped_indices(i, pos, side);
      chains_[i].commit(pos, k, b);
    }
    if (side != Side::bra) flip(ket_, site);
    if (side != Side::ket) flip(bra_, site);
  }

  const SpinConfiguration& ket() const override { return ket_; }
  const SpinConfiguration& bra() const override { return bra_; }

 private:
  std::pair<int, int> flipped_indices(int string, int pos, Side side) const {
    int k = chains_[string].ket_index(pos);
    int b = chains_[string].bra_index(pos);
    if (side != Side::bra) k = 1 - k;
    if (side != Side::ket) b = 1 - b;
    return {k, b};
  }

  const SbdoAnsatz& ansatz_;
  SpinConfiguration ket_;
  SpinConfiguration bra_;
  std::vector<ChainPairCache> chains_;
};

}  // namespace

SbdoAnsatz::SbdoAnsatz(int num_sites, std::vector<std::vector<int>> strings, int bond_dim,
                       int kraus_dim)
    : n_(num_sites), strings_(std::move(strings)), d_(bond_dim), chi_(kraus_dim) {
  if (n_ < 1) throw std::invalid_argument("sbdo needs at least one site");
  if (d_ < 1 || chi_ < 1) throw std::invalid_argument("sbdo dimensions must be positive");
  if (chi_ > d_ * d_) throw std::invalid_argument("kraus dimension exceeds bond_dim^2");
  if (strings_.empty()) throw std::invalid_argument("sbdo needs at least one string");
  std::vector<bool> covered(n_, false);
  for (const auto& string : strings_) {
    if (string.empty()) throw std::invalid_argument("empty string");
    std::set<int> uniq(string.begin(), string.end());
    if (uniq.size() != string.size()) throw std::invalid_argument("string revisits a site");
    for (int s : string) {
      if (s < 0 || s >= n_) throw std::invalid_argument("string site out of range");
      covered[s] = true;
    }
  }
  for (bool c : covered) {
    if (!c) throw std::invalid_argument("strings must cover every site");
  }
  positions_.assign(strings_.size(), std::vector<int>(n_, -1));
  for (std::size_t i = 0; i < strings_.size(); ++i) {
    layout_.add("string_" + std::to_string(i),
                strings_[i].size() * std::size_t{2} * chi_ * d_ * d_);
    for (std::size_t k = 0; k < strings_[i].size(); ++k) positions_[i][strings_[i][k]] = k;
  }
}

ParameterVector SbdoAnsatz::init(std::uint64_t seed, double scale) const {
  if (scale < 0.0) throw std::invalid_argument("init scale must be >= 0");
  ParameterVector p(parameter_count());
  for (int i = 0; i < num_strings(); ++i) {
    Rng rng(derive_seed(seed, i));
    init_chain_tensors(p.data() + layout_.blocks()[i].offset,
                       static_cast<int>(strings_[i].size()), d_, chi_, rng, scale);
  }
  return p;
}

EvalResult SbdoAnsatz::eval(const ParameterVector& params, const SpinConfiguration& s,
                            const SpinConfiguration& sp, bool want_gradient) const {
  check_configuration(s, n_);
  check_configuration(sp, n_);
  check_params(params);
  EvalResult out;
  out.log_value = {0.0, 0.0};
  std::vector<double> grad;
  if (want_gradient) grad.assign(parameter_count(), 0.0);
  for (int i = 0; i < num_strings(); ++i) {
    const auto& string = strings_[i];
    std::vector<int> ket_idx(string.size()), bra_idx(string.size());
    for (std::size_t k = 0; k < string.size(); ++k) {
      ket_idx[k] = spin_index(s[string[k]]);
      bra_idx[k] = spin_index(sp[string[k]]);
    }
    const CLog l = chain_eval(string_view(params, i), ket_idx.data(), bra_idx.data(),
                              want_gradient ? grad.data() + layout_.blocks()[i].offset : nullptr);
    if (clog_is_zero(l)) {
      out.log_value = {neg_infinity(), 0.0};
      return out;
    }
    out.log_value += l;
  }
  if (want_gradient) {
    out.gradient = Eigen::VectorXd::Map(grad.data(), grad.size()).cast<std::complex<double>>();
  }
  return out;
}

std::unique_ptr<PairCache> SbdoAnsatz::make_cache(const ParameterVector& params,
                                                  SpinConfiguration s,
                                                  SpinConfiguration sp) const {
  check_configuration(s, n_);
  check_configuration(sp, n_);
  check_params(params);
  return std::make_unique<SbdoPairCache>(*this, params, std::move(s), std::move(sp));
}

EnergyGradientSample SbdoAnsatz::energy_gradient_sample(
    const ParameterVector& params, const std::vector<ConnectedTerm>& connected,
    const SpinConfiguration& s) const {
  for (const auto& term : connected) {
    if (term.flips.size() > 1) {
      return energy_gradient_sample_by_eval(*this, params, connected, s);
    }
  }
  check_configuration(s, n_);
  check_params(params);
  const int ns = num_strings();

  // Pass 1: per-string diagonal environments and per-site flip ratios.
  std::vector<ChainDiagEnvironments> envs(ns);
  std::vector<std::vector<int>> s_idx(ns);
  for (int i = 0; i < ns; ++i) {
    const auto& string = strings_[i];
    s_idx[i].resize(string.size());
    for (std::size_t k = 0; k < string.size(); ++k) s_idx[i][k] = spin_index(s[string[k]]);
    envs[i] = chain_diag_environments(string_view(params, i), s_idx[i].data());
    if (envs[i].zero()) throw std::runtime_error("local energy at a configuration with rho_ss = 0");
  }

  double w_diag = 0.0;
  double e_loc = 0.0;
  // ratios[i][site]: element ratio of string i under a bra flip at site
  std::vector<std::vector<double>> ratios(ns, std::vector<double>(n_, 1.0));
  std::vector<double> total_ratio(n_, 0.0);
  std::vector<bool> touched(n_, false);
  for (const auto& term : connected) {
    if (term.flips.empty()) {
      w_diag += term.value;
      continue;
    }
    const int site = term.flips.front();
    if (!touched[site]) {
      double prod = 1.0;
      for (int i = 0; i < ns; ++i) {
        const int pos = position_in_string(i, site);
        if (pos < 0) continue;
        ratios[i][site] = chain_flip_ratio(string_view(params, i), envs[i], s_idx[i].data(), pos);
        prod *= ratios[i][site];
      }
      total_ratio[site] = prod;
      touched[site] = true;
    }
    e_loc += term.value * total_ratio[site];
  }
  e_loc += w_diag;

  // Pass 2: per-string insertion-chain gradients with cross-string weights.
  std::vector<double> delta(parameter_count(), 0.0);
  std::vector<double> weighted(parameter_count(), 0.0);
  for (int i = 0; i < ns; ++i) {
    const auto& string = strings_[i];
    std::vector<double> v(string.size(), 0.0);
    for (const auto& term : connected) {
      if (term.flips.empty()) continue;
      const int site = term.flips.front();
      const int pos = position_in_string(i, site);
      if (pos < 0 || total_ratio[site] == 0.0) continue;
      double cross = 1.0;
      for (int j = 0; j < ns; ++j) {
        if (j != i && position_in_string(j, site) >= 0) cross *= ratios[j][site];
      }
      v[pos] += term.value * cross;
    }
    chain_weighted_gradient(string_view(params, i), s_idx[i].data(), v,
                            delta.data() + layout_.blocks()[i].offset,
                            weighted.data() + layout_.blocks()[i].offset);
  }

  EnergyGradientSample out;
  out.local_energy = e_loc;
  out.delta_diag = Eigen::VectorXd::Map(delta.data(), delta.size()).cast<std::complex<double>>();
  out.h_weighted =
      Eigen::VectorXd::Map(weighted.data(), weighted.size()).cast<std::complex<double>>();
  out.h_weighted += w_diag * out.delta_diag;
  return out;
}

ParameterVector SbdoAnsatz::grow_from(const DensityAnsatz& small,
                                      const ParameterVector& params_small, std::uint64_t seed,
                                      double noise) const {
  const auto* src = dynamic_cast<const SbdoAnsatz*>(&small);
  if (src == nullptr || src->n_ != n_ || src->strings_ != strings_) {
    throw std::invalid_argument("grow source must be an sbdo with the same strings");
  }
  src->check_params(params_small);
  ParameterVector p(parameter_count());
  Rng rng(derive_seed(seed, 1));
  for (int i = 0; i < num_strings(); ++i) {
    grow_chain_tensors(src->string_view(params_small, i), p.data() + layout_.blocks()[i].offset,
                       d_, chi_, rng, noise);
  }
  return p;
}

std::string SbdoAnsatz::spec_string() const {
  return "sbdo(sites=" + std::to_string(n_) + ",strings=" + std::to_string(strings_.size()) +
         ",bond_dim=" + std::to_string(d_) + ",kraus_dim=" + std::to_string(chi_) + ")";
}

std::vector<std::vector<int>> snake_strings(int lx, int ly, int n_s) {
  if (lx < 1 || ly < 1) throw std::invalid_argument("snake strings need positive extents");
  if (n_s != 1 && n_s != 2 && n_s != 4) {
    throw std::invalid_argument("snake string count must be 1, 2, or 4");
  }
  auto horizontal = [&](bool reversed_rows) {
    std::vector<int> string;
    string.reserve(lx * ly);
    for (int step = 0; step < ly; ++step) {
      const int y = reversed_rows ? ly - 1 - step : step;
      for (int k = 0; k < lx; ++k) {
        const int x = (step % 2 == 0) ? k : lx - 1 - k;
        string.push_back(x + lx * y);
      }
    }
    return string;
  };
  auto vertical = [&](bool reversed_cols) {
    std::vector<int> string;
    string.reserve(lx * ly);
    for (int step = 0; step < lx; ++step) {
      const int x = reversed_cols ? lx - 1 - step : step;
      for (int k = 0; k < ly; ++k) {
        const int y = (step % 2 == 0) ? k : ly - 1 - k;
        string.push_back(x + lx * y);
      }
    }
    return string;
  };
  std::vector<std::vector<int>> strings;
  strings.push_back(horizontal(false));
  if (n_s >= 2) strings.push_back(vertical(false));
  if (n_s == 4) {
    strings.push_back(horizontal(true));
    strings.push_back(vertical(true));
  }
  return strings;
}

}  // namespace rvmc
