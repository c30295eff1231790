#include "renyivmc/rbm.hpp"

#include <cmath>
#include <stdexcept>

#include "renyivmc/rng.hpp"

namespace rvmc {

namespace {

using cplx = std::complex<double>;
constexpr cplx kI{0.0, 1.0};
constexpr double kLog2 = 0.69314718055994530941723212145818;

/// Complex parameter blocks of one RBM parameter vector.
struct RbmView {
  const double* p;
  int n, nh, na;

  cplx at(std::size_t complex_index) const {
    return {p[2 * complex_index], p[2 * complex_index + 1]};
  }
  cplx visible_bias(int j) const { return at(j); }
  cplx hidden_bias(int i) const { return at(n + i); }
  cplx hidden_weight(int i, int j) const { return at(n + nh + static_cast<std::size_t>(i) * n + j); }
  cplx ancilla_bias(int k) const { return at(n + nh + static_cast<std::size_t>(nh) * n + k); }
  cplx ancilla_weight(int k, int j) const {
    return at(n + nh + static_cast<std::size_t>(nh) * n + na + static_cast<std::size_t>(k) * n + j);
  }

  std::size_t visible_bias_index(int j) const { return j; }
  std::size_t hidden_bias_index(int i) const { return n + i; }
  std::size_t hidden_weight_index(int i, int j) const {
    return n + nh + static_cast<std::size_t>(i) * n + j;
  }
  std::size_t ancilla_bias_index(int k) const {
    return n + nh + static_cast<std::size_t>(nh) * n + k;
  }
  std::size_t ancilla_weight_index(int k, int j) const {
    return n + nh + static_cast<std::size_t>(nh) * n + na + static_cast<std::size_t>(k) * n + j;
  }
};

std::vector<cplx> hidden_angles(const RbmView& v, const SpinConfiguration& s) {
  std::vector<cplx> th(v.nh);
  for (int i = 0; i < v.nh; ++i) {
    cplx acc = v.hidden_bias(i);
    for (int j = 0; j < v.n; ++j) acc += v.hidden_weight(i, j) * double(s[j]);
    th[i] = acc;
  }
  return th;
}

std::vector<cplx> ancilla_angles(const RbmView& v, const SpinConfiguration& s) {
  std::vector<cplx> ta(v.na);
  for (int k = 0; k < v.na; ++k) {
    cplx acc = v.ancilla_bias(k);
    for (int j = 0; j < v.n; ++j) acc += v.ancilla_weight(k, j) * double(s[j]);
    ta[k] = acc;
  }
  return ta;
}

class RbmPairCache final : public PairCache {
 public:
  RbmPairCache(const RbmAnsatz& ansatz, const ParameterVector& params, SpinConfiguration s,
               SpinConfiguration sp)
      : view_{params.data(), ansatz.num_sites(), ansatz.num_hidden(), ansatz.num_ancilla()},
        ket_(std::move(s)),
        bra_(std::move(sp)) {
    refresh();
  }

  CLog log_value() const override { return log_; }

  CLog flip_log_ratio(Side side, int site) override {
    CLog delta{0.0, 0.0};
    const double dk = (side != Side::bra) ? -2.0 * ket_[site] : 0.0;
    const double db = (side != Side::ket) ? -2.0 * bra_[site] : 0.0;
    delta += view_.visible_bias(site) * dk + std::conj(view_.visible_bias(site)) * db;
    for (int i = 0; i < view_.nh; ++i) {
      const cplx w = view_.hidden_weight(i, site);
      if (dk != 0.0) delta += log2cosh(th_ket_[i] + w * dk) - log2cosh(th_ket_[i]);
      if (db != 0.0) {
        delta += std::conj(log2cosh(th_bra_[i] + w * db) - log2cosh(th_bra_[i]));
      }
    }
    for (int k = 0; k < view_.na; ++k) {
      const cplx w = view_.ancilla_weight(k, site);
      const cplx za_new = za_[k] + w * dk + std::conj(w) * db;
      delta += log2cosh(za_new) - log2cosh(za_[k]);
    }
    return delta;
  }

  void commit_flip(Side side, int site) override {
    const double dk = (side != Side::bra) ? -2.0 * ket_[site] : 0.0;
    const double db = (side != Side::ket) ? -2.0 * bra_[site] : 0.0;
    log_ += flip_log_ratio(side, site);
    for (int i = 0; i < view_.nh; ++i) {
      const cplx w = view_.hidden_weight(i, site);
      if (dk != 0.0) th_ket_[i] += w * dk;
      if (db != 0.0) th_bra_[i] += w * db;
    }
    for (int k = 0; k < view_.na; ++k) {
      const cplx w = view_.ancilla_weight(k, site);
      za_[k] += w * dk + std::conj(w) * db;
    }
    if (side != Side::bra) flip(ket_, site);
    if (side != Side::ket) flip(bra_, site);
    if (++commits_ >= 65536) refresh();
  }

  const SpinConfiguration& ket() const override { return ket_; }
  const SpinConfiguration& bra() const override { return bra_; }

 private:
  void refresh() {
    th_ket_ = hidden_angles(view_, ket_);
    th_bra_ = hidden_angles(view_, bra_);
    const auto ta_ket = ancilla_angles(view_, ket_);
    const auto ta_bra = ancilla_angles(view_, bra_);
    za_.resize(view_.na);
    cplx acc{0.0, 0.0};
    for (int j = 0; j < view_.n; ++j) {
      acc += view_.visible_bias(j) * double(ket_[j]) +
             std::conj(view_.visible_bias(j)) * double(bra_[j]);
    }
    for (int i = 0; i < view_.nh; ++i) {
      acc += log2cosh(th_ket_[i]) + std::conj(log2cosh(th_bra_[i]));
    }
    for (int k = 0; k < view_.na; ++k) {
      za_[k] = ta_ket[k] + std::conj(ta_bra[k]);
      acc += log2cosh(za_[k]);
    }
    log_ = acc;
    commits_ = 0;
  }

  RbmView view_;
  SpinConfiguration ket_;
  SpinConfiguration bra_;
  std::vector<cplx> th_ket_;
  std::vector<cplx> th_bra_;
  std::vector<cplx> za_;
  CLog log_{0.0, 0.0};
  long commits_ = 0;
};

}  // namespace

std::complex<double> log2cosh(std::complex<double> z) {
  // log(e^z + e^-z) anchored at the dominant exponential
  if (z.real() >= 0.0) {
    return z + std::log(1.0 + std::exp(-2.0 * z));
  }
  return -z + std::log(1.0 + std::exp(2.0 * z));
}

std::complex<double> stable_tanh(std::complex<double> z) {
  if (std::abs(z.real()) <= 20.0) return std::tanh(z);
  const cplx e = std::exp(z.real() >= 0.0 ? -2.0 * z : 2.0 * z);
  const cplx t = (1.0 - e) / (1.0 + e);
  return z.real() >= 0.0 ? t : -t;
}

RbmAnsatz::RbmAnsatz(int num_sites, double hidden_density, double ancilla_density)
    : n_(num_sites), alpha_(hidden_density), beta_(ancilla_density) {
  if (n_ < 1) throw std::invalid_argument("rbm needs at least one site");
  if (alpha_ <= 0.0 || beta_ <= 0.0) throw std::invalid_argument("rbm densities must be positive");
  n_hidden_ = static_cast<int>(std::lround(alpha_ * n_));
  n_ancilla_ = static_cast<int>(std::lround(beta_ * n_));
  if (n_hidden_ < 1 || n_ancilla_ < 1) {
    throw std::invalid_argument("rbm densities give an empty layer");
  }
  layout_.add("visible_bias", std::size_t{2} * n_, true);
  layout_.add("hidden_bias", std::size_t{2} * n_hidden_, true);
  layout_.add("hidden_weights", std::size_t{2} * n_hidden_ * n_, true);
  layout_.add("ancilla_bias", std::size_t{2} * n_ancilla_, true);
  layout_.add("ancilla_weights", std::size_t{2} * n_ancilla_ * n_, true);
}

ParameterVector RbmAnsatz::init(std::uint64_t seed, double scale) const {
  ParameterVector p(parameter_count());
  Rng rng(derive_seed(seed, 0));
  for (auto& x : p) x = scale * rng.normal();
  return p;
}

EvalResult RbmAnsatz::eval(const ParameterVector& params, const SpinConfiguration& s,
                           const SpinConfiguration& sp, bool want_gradient) const {
  check_configuration(s, n_);
  check_configuration(sp, n_);
  check_params(params);
  const RbmView v{params.data(), n_, n_hidden_, n_ancilla_};

  const auto th_ket = hidden_angles(v, s);
  const auto th_bra = hidden_angles(v, sp);
  const auto ta_ket = ancilla_angles(v, s);
  const auto ta_bra = ancilla_angles(v, sp);

  cplx acc{0.0, 0.0};
  for (int j = 0; j < n_; ++j) {
    acc += v.visible_bias(j) * double(s[j]) + std::conj(v.visible_bias(j)) * double(sp[j]);
  }
  for (int i = 0; i < n_hidden_; ++i) {
    acc += log2cosh(th_ket[i]) + std::conj(log2cosh(th_bra[i]));
  }
  std::vector<cplx> za(n_ancilla_);
  for (int k = 0; k < n_ancilla_; ++k) {
    za[k] = ta_ket[k] + std::conj(ta_bra[k]);
    acc += log2cosh(za[k]);
  }

  EvalResult out;
  out.log_value = acc;
  if (!std::isfinite(acc.real())) {
    out.log_value = {neg_infinity(), 0.0};
    return out;
  }
  if (!want_gradient) return out;

  // d log rho / d(re, im) of each complex parameter
  out.gradient = Eigen::VectorXcd::Zero(parameter_count());
  auto set = [&](std::size_t cidx, cplx d_re, cplx d_im) {
    out.gradient(2 * cidx) = d_re;
    out.gradient(2 * cidx + 1) = d_im;
  };
  for (int j = 0; j < n_; ++j) {
    const double sj = s[j];
    const double spj = sp[j];
    set(v.visible_bias_index(j), sj + spj, kI * (sj - spj));
  }
  for (int i = 0; i < n_hidden_; ++i) {
    const cplx t = stable_tanh(th_ket[i]);
    const cplx tc = std::conj(stable_tanh(th_bra[i]));
    set(v.hidden_bias_index(i), t + tc, kI * (t - tc));
    for (int j = 0; j < n_; ++j) {
      set(v.hidden_weight_index(i, j), t * double(s[j]) + tc * double(sp[j]),
          kI * (t * double(s[j]) - tc * double(sp[j])));
    }
  }
  for (int k = 0; k < n_ancilla_; ++k) {
    const cplx u = stable_tanh(za[k]);
    set(v.ancilla_bias_index(k), 2.0 * u, {0.0, 0.0});
    for (int j = 0; j < n_; ++j) {
      set(v.ancilla_weight_index(k, j), u * double(s[j] + sp[j]), kI * u * double(s[j] - sp[j]));
    }
  }
  return out;
}

std::unique_ptr<PairCache> RbmAnsatz::make_cache(const ParameterVector& params,
                                                 SpinConfiguration s, SpinConfiguration sp) const {
  check_configuration(s, n_);
  check_configuration(sp, n_);
  check_params(params);
  return std::make_unique<RbmPairCache>(*this, params, std::move(s), std::move(sp));
}

ParameterVector RbmAnsatz::grow_from(const DensityAnsatz& small,
                                     const ParameterVector& params_small, std::uint64_t seed,
                                     double noise) const {
  const auto* src = dynamic_cast<const RbmAnsatz*>(&small);
  if (src == nullptr || src->n_ != n_ || src->n_hidden_ > n_hidden_ ||
      src->n_ancilla_ > n_ancilla_) {
    throw std::invalid_argument("grow source must be a dominated rbm on the same lattice");
  }
  src->check_params(params_small);
  ParameterVector p(parameter_count());
  Rng rng(derive_seed(seed, 1));
  for (auto& x : p) x = noise * rng.normal();
  const RbmView dst{p.data(), n_, n_hidden_, n_ancilla_};
  const RbmView sv{params_small.data(), src->n_, src->n_hidden_, src->n_ancilla_};
  auto copy = [&](std::size_t to, std::size_t from) {
    p[2 * to] = params_small[2 * from];
    p[2 * to + 1] = params_small[2 * from + 1];
  };
  for (int j = 0; j < n_; ++j) copy(dst.visible_bias_index(j), sv.visible_bias_index(j));
  for (int i = 0; i < src->n_hidden_; ++i) {
    copy(dst.hidden_bias_index(i), sv.hidden_bias_index(i));
    for (int j = 0; j < n_; ++j) copy(dst.hidden_weight_index(i, j), sv.hidden_weight_index(i, j));
  }
  for (int k = 0; k < src->n_ancilla_; ++k) {
    copy(dst.ancilla_bias_index(k), sv.ancilla_bias_index(k));
    for (int j = 0; j < n_; ++j) {
      copy(dst.ancilla_weight_index(k, j), sv.ancilla_weight_index(k, j));
    }
  }
  return p;
}

std::string RbmAnsatz::spec_string() const {
  return "rbm(sites=" + std::to_string(n_) + ",hidden=" + std::to_string(n_hidden_) +
         ",ancilla=" + std::to_string(n_ancilla_) + ")";
}

std::array<std::complex<double>, 2> DiagonalMatrixString::site_matrix(int j, Spin s) const {
  const std::size_t n = weights.size();
  const cplx e = weights[j] * double(s) + bias / double(n);
  return {std::exp(e), std::exp(-e)};
}

std::complex<double> DiagonalMatrixString::trace_product(const SpinConfiguration& s) const {
  cplx up{1.0, 0.0};
  cplx down{1.0, 0.0};
  for (std::size_t j = 0; j < weights.size(); ++j) {
    const auto m = site_matrix(static_cast<int>(j), s[j]);
    up *= m[0];
    down *= m[1];
  }
  return up + down;
}

DiagonalMatrixString rbm_cosh_as_string(std::complex<double> hidden_bias,
                                        std::vector<std::complex<double>> weights) {
  if (weights.empty()) throw std::invalid_argument("cosh string needs at least one site");
  return DiagonalMatrixString{hidden_bias, std::move(weights)};
}

}  // namespace rvmc
