#include "renyivmc/mpdo.hpp"

#include <stdexcept>

#include "renyivmc/rng.hpp"

namespace rvmc {

namespace {

std::vector<int> spin_indices(const SpinConfiguration& s) {
  std::vector<int> idx(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) idx[i] = spin_index(s[i]);
  return idx;
}

/// PairCache over a single full chain in site order.
class MpdoPairCache final : public PairCache {
 public:
  MpdoPairCache(const ChainTensorView& view, SpinConfiguration s, SpinConfiguration sp)
      : ket_(std::move(s)),
        bra_(std::move(sp)),
        chain_(view, spin_indices(ket_), spin_indices(bra_)) {}

  CLog log_value() const override { return chain_.log_value(); }

  CLog flip_log_ratio(Side side, int site) override {
    const auto [k, b] = flipped_indices(side, site);
    const double r = chain_.ratio(site, k, b);
    if (r == 0.0) return {neg_infinity(), 0.0};
    return {std::log(std::abs(r)), r < 0.0 ? 3.141592653589793238462643383280 : 0.0};
  }

  void commit_flip(Side side, int site) override {
    const auto [k, b] = flipped_indices(side, site);
    chain_.commit(site, k, b);
    if (side != Side::bra) flip(ket_, site);
    if (side != Side::ket) flip(bra_, site);
  }

  const SpinConfiguration& ket() const override { return ket_; }
  const SpinConfiguration& bra() const override { return bra_; }

 private:
  std::pair<int, int> flipped_indices(Side side, int site) const {
    int k = chain_.ket_index(site);
    int b = chain_.bra_index(site);
    if (side != Side::bra) k = 1 - k;
    if (side != Side::ket) b = 1 - b;
    return {k, b};
  }

  SpinConfiguration ket_;
  SpinConfiguration bra_;
  ChainPairCache chain_;
};

}  // namespace

void init_chain_tensors(double* data, int length, int bond_dim, int kraus_dim, Rng& rng,
                        double scale) {
  const int dd = bond_dim * bond_dim;
  const int stride = 2 * kraus_dim * dd;
  for (int j = 0; j < length; ++j) {
    for (int s = 0; s < 2; ++s) {
      for (int a = 0; a < kraus_dim; ++a) {
        double* m = data + j * stride + (s * kraus_dim + a) * dd;
        for (int e = 0; e < dd; ++e) m[e] = scale * rng.normal();
        if (a == std::min(s, kraus_dim - 1)) {
          for (int i = 0; i < bond_dim; ++i) m[i * bond_dim + i] += 1.0;
        }
      }
    }
  }
}

void grow_chain_tensors(const ChainTensorView& small, double* large, int bond_dim_large,
                        int kraus_dim_large, Rng& rng, double noise) {
  const int d_s = small.bond_dim();
  const int chi_s = small.kraus_dim();
  if (bond_dim_large < d_s || kraus_dim_large < chi_s) {
    throw std::invalid_argument("grow target must dominate the source dimensions");
  }
  const int dd_l = bond_dim_large * bond_dim_large;
  const int stride_l = 2 * kraus_dim_large * dd_l;
  for (int j = 0; j < small.length(); ++j) {
    for (int s = 0; s < 2; ++s) {
      for (int a = 0; a < kraus_dim_large; ++a) {
        double* m = large + j * stride_l + (s * kraus_dim_large + a) * dd_l;
        for (int c = 0; c < bond_dim_large; ++c) {
          for (int r = 0; r < bond_dim_large; ++r) {
            const bool embedded = a < chi_s && r < d_s && c < d_s;
            m[c * bond_dim_large + r] =
                embedded ? small.slice(j, s, a)(r, c) : noise * rng.normal();
          }
        }
      }
    }
  }
}

MpdoAnsatz::MpdoAnsatz(int num_sites, int bond_dim, int kraus_dim)
    : n_(num_sites), d_(bond_dim), chi_(kraus_dim) {
  if (n_ < 1) throw std::invalid_argument("mpdo needs at least one site");
  if (d_ < 1 || chi_ < 1) throw std::invalid_argument("mpdo dimensions must be positive");
  if (chi_ > d_ * d_) throw std::invalid_argument("kraus dimension exceeds bond_dim^2");
  for (int j = 0; j < n_; ++j) {
    layout_.add("site_" + std::to_string(j), std::size_t{2} * chi_ * d_ * d_);
  }
}

ParameterVector MpdoAnsatz::init(std::uint64_t seed, double scale) const {
  if (scale < 0.0) throw std::invalid_argument("init scale must be >= 0");
  ParameterVector p(parameter_count());
  Rng rng(derive_seed(seed, 0));
  init_chain_tensors(p.data(), n_, d_, chi_, rng, scale);
  return p;
}

EvalResult MpdoAnsatz::eval(const ParameterVector& params, const SpinConfiguration& s,
                            const SpinConfiguration& sp, bool want_gradient) const {
  check_configuration(s, n_);
  check_configuration(sp, n_);
  const ChainTensorView view = tensor_view(params);
  const auto ket = spin_indices(s);
  const auto bra = spin_indices(sp);
  EvalResult out;
  if (!want_gradient) {
    out.log_value = chain_eval(view, ket.data(), bra.data(), nullptr);
    return out;
  }
  std::vector<double> grad(parameter_count(), 0.0);
  out.log_value = chain_eval(view, ket.data(), bra.data(), grad.data());
  if (!out.is_zero()) {
    out.gradient = Eigen::VectorXd::Map(grad.data(), grad.size()).cast<std::complex<double>>();
  }
  return out;
}

std::unique_ptr<PairCache> MpdoAnsatz::make_cache(const ParameterVector& params,
                                                  SpinConfiguration s,
                                                  SpinConfiguration sp) const {
  check_configuration(s, n_);
  check_configuration(sp, n_);
  return std::make_unique<MpdoPairCache>(tensor_view(params), std::move(s), std::move(sp));
}

EnergyGradientSample MpdoAnsatz::energy_gradient_sample(
    const ParameterVector& params, const std::vector<ConnectedTerm>& connected,
    const SpinConfiguration& s) const {
  for (const auto& term : connected) {
    if (term.flips.size() > 1) {
      return energy_gradient_sample_by_eval(*this, params, connected, s);
    }
  }
  check_configuration(s, n_);
  const ChainTensorView view = tensor_view(params);
  const auto idx = spin_indices(s);
  const ChainDiagEnvironments env = chain_diag_environments(view, idx.data());
  if (env.zero()) throw std::runtime_error("local energy at a configuration with rho_ss = 0");

  double w_diag = 0.0;
  std::vector<double> v(n_, 0.0);
  double e_loc = 0.0;
  for (const auto& term : connected) {
    if (term.flips.empty()) {
      w_diag += term.value;
      continue;
    }
    const int site = term.flips.front();
    const double ratio = chain_flip_ratio(view, env, idx.data(), site);
    e_loc += term.value * ratio;
    if (ratio != 0.0) v[site] += term.value;
  }
  e_loc += w_diag;

  std::vector<double> delta(parameter_count(), 0.0);
  std::vector<double> weighted(parameter_count(), 0.0);
  chain_weighted_gradient(view, idx.data(), v, delta.data(), weighted.data());

  EnergyGradientSample out;
  out.local_energy = e_loc;
  out.delta_diag = Eigen::VectorXd::Map(delta.data(), delta.size()).cast<std::complex<double>>();
  out.h_weighted =
      Eigen::VectorXd::Map(weighted.data(), weighted.size()).cast<std::complex<double>>();
  out.h_weighted += w_diag * out.delta_diag;
  return out;
}

ParameterVector MpdoAnsatz::grow_from(const DensityAnsatz& small,
                                      const ParameterVector& params_small, std::uint64_t seed,
                                      double noise) const {
  const auto* src = dynamic_cast<const MpdoAnsatz*>(&small);
  if (src == nullptr || src->n_ != n_) {
    throw std::invalid_argument("grow source must be an mpdo on the same lattice");
  }
  src->check_params(params_small);
  ParameterVector p(parameter_count());
  Rng rng(derive_seed(seed, 1));
  grow_chain_tensors(src->tensor_view(params_small), p.data(), d_, chi_, rng, noise);
  return p;
}

std::string MpdoAnsatz::spec_string() const {
  return "mpdo(sites=" + std::to_string(n_) + ",bond_dim=" + std::to_string(d_) +
         ",kraus_dim=" + std::to_string(chi_) + ")";
}

}  // namespace rvmc
