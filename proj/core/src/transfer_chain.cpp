#include "renyivmc/transfer_chain.hpp"

#include <cmath>
#include <stdexcept>

namespace rvmc {

namespace {

constexpr double kPi = 3.141592653589793238462643383280;

/// Rescales m in place by its max-abs coefficient; returns log of the scale,
/// or -infinity for an exactly zero matrix (m left untouched).
double normalize_matrix(Eigen::MatrixXd& m) {
  const double scale = m.cwiseAbs().maxCoeff();
  if (scale == 0.0) return neg_infinity();
  m /= scale;
  return std::log(scale);
}

double contract_trace(const Eigen::MatrixXd& env, const Eigen::MatrixXd& m) {
  // tr(env * m) without forming the product
  return env.transpose().cwiseProduct(m).sum();
}

/// Accumulates coeff * W-contraction into the gradient of site tensors,
/// where W(p,q) = d(objective)/dM(p,q) and M = sum_a A_ket,a (x) A_bra,a.
void accumulate_chain_rule(const Eigen::MatrixXd& w, const ChainTensorView& view, int site,
                           int ket_idx, int bra_idx, double coeff, double* grad_site) {
  const int d = view.bond_dim();
  const int dd = d * d;
  for (int a = 0; a < view.kraus_dim(); ++a) {
    const auto a_ket = view.slice(site, ket_idx, a);
    const auto a_bra = view.slice(site, bra_idx, a);
    Eigen::Map<Eigen::MatrixXd> g_ket(grad_site + (ket_idx * view.kraus_dim() + a) * dd, d, d);
    Eigen::Map<Eigen::MatrixXd> g_bra(grad_site + (bra_idx * view.kraus_dim() + a) * dd, d, d);
    for (int beta = 0; beta < d; ++beta) {
      for (int alpha = 0; alpha < d; ++alpha) {
        const auto blk = w.block(alpha * d, beta * d, d, d);
        g_ket(alpha, beta) += coeff * blk.cwiseProduct(a_bra).sum();
        g_bra.noalias() += (coeff * a_ket(alpha, beta)) * blk;
      }
    }
  }
}

}  // namespace

Eigen::MatrixXd ChainTensorView::transfer(int site, int ket_idx, int bra_idx) const {
  const int m = d_ * d_;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m, m);
  for (int a = 0; a < chi_; ++a) {
    const auto k = slice(site, ket_idx, a);
    const auto b = slice(site, bra_idx, a);
    for (int beta = 0; beta < d_; ++beta) {
      for (int alpha = 0; alpha < d_; ++alpha) {
        out.block(alpha * d_, beta * d_, d_, d_) += k(alpha, beta) * b;
      }
    }
  }
  return out;
}

CLog chain_log_trace(const std::vector<Eigen::MatrixXd>& ms) {
  Eigen::MatrixXd p = ms.front();
  double log_acc = normalize_matrix(p);
  if (!std::isfinite(log_acc)) return {neg_infinity(), 0.0};
  for (std::size_t j = 1; j < ms.size(); ++j) {
    p = (p * ms[j]).eval();
    const double l = normalize_matrix(p);
    if (!std::isfinite(l)) return {neg_infinity(), 0.0};
    log_acc += l;
  }
  const double t = p.trace();
  if (t == 0.0) return {neg_infinity(), 0.0};
  return {log_acc + std::log(std::abs(t)), t < 0.0 ? kPi : 0.0};
}

CLog chain_eval(const ChainTensorView& view, const int* ket_idx, const int* bra_idx,
                double* grad_out) {
  const int length = view.length();
  const int m = view.bond_dim() * view.bond_dim();

  std::vector<Eigen::MatrixXd> ms(length);
  for (int j = 0; j < length; ++j) ms[j] = view.transfer(j, ket_idx[j], bra_idx[j]);

  if (grad_out == nullptr) return chain_log_trace(ms);

  // prefix[j] = normalized product of the first j matrices
  std::vector<Eigen::MatrixXd> prefix(length + 1);
  prefix[0] = Eigen::MatrixXd::Identity(m, m);
  double log_acc = 0.0;
  bool zero = false;
  for (int j = 0; j < length; ++j) {
    prefix[j + 1] = prefix[j] * ms[j];
    const double l = normalize_matrix(prefix[j + 1]);
    if (!std::isfinite(l)) {
      zero = true;
      break;
    }
    log_acc += l;
  }
  if (zero || prefix[length].trace() == 0.0) return {neg_infinity(), 0.0};

  std::vector<Eigen::MatrixXd> suffix(length + 1);
  suffix[length] = Eigen::MatrixXd::Identity(m, m);
  for (int j = length - 1; j > 0; --j) {
    suffix[j] = ms[j] * suffix[j + 1];
    normalize_matrix(suffix[j]);
  }

  const double trace = prefix[length].trace();
  for (int j = 0; j < length; ++j) {
    // environment of site j; any normalization cancels in W / tr(E M_j)
    Eigen::MatrixXd env = suffix[j + 1] * prefix[j];
    const double t = contract_trace(env, ms[j]);
    if (t == 0.0) continue;  // unreachable when the total trace is nonzero
    const Eigen::MatrixXd w = env.transpose() / t;
    accumulate_chain_rule(w, view, j, ket_idx[j], bra_idx[j], 1.0,
                          grad_out + j * view.site_stride());
  }
  return {log_acc + std::log(std::abs(trace)), trace < 0.0 ? kPi : 0.0};
}

ChainDiagEnvironments chain_diag_environments(const ChainTensorView& view, const int* s_idx) {
  const int length = view.length();
  const int m = view.bond_dim() * view.bond_dim();
  ChainDiagEnvironments env;
  env.transfer.resize(length);
  for (int j = 0; j < length; ++j) env.transfer[j] = view.transfer(j, s_idx[j], s_idx[j]);

  env.prefix.resize(length + 1);
  env.prefix[0] = Eigen::MatrixXd::Identity(m, m);
  for (int j = 0; j < length; ++j) {
    env.prefix[j + 1] = env.prefix[j] * env.transfer[j];
    if (!std::isfinite(normalize_matrix(env.prefix[j + 1]))) {
      env.trace = 0.0;
      return env;
    }
  }
  env.suffix.resize(length + 1);
  env.suffix[length] = Eigen::MatrixXd::Identity(m, m);
  for (int j = length - 1; j > 0; --j) {
    env.suffix[j] = env.transfer[j] * env.suffix[j + 1];
    normalize_matrix(env.suffix[j]);
  }
  env.trace = env.prefix[length].trace();
  return env;
}

double chain_flip_ratio(const ChainTensorView& view, const ChainDiagEnvironments& env,
                        const int* s_idx, int position) {
  const Eigen::MatrixXd flipped = view.transfer(position, s_idx[position], 1 - s_idx[position]);
  const Eigen::MatrixXd e = env.suffix[position + 1] * env.prefix[position];
  const double denom = contract_trace(e, env.transfer[position]);
  if (denom == 0.0) throw std::runtime_error("flip ratio at a zero-density configuration");
  return contract_trace(e, flipped) / denom;
}

void chain_weighted_gradient(const ChainTensorView& view, const int* s_idx,
                             const std::vector<double>& v, double* delta_out,
                             double* weighted_out) {
  const int length = view.length();
  const int m = view.bond_dim() * view.bond_dim();
  if (static_cast<int>(v.size()) != length) {
    throw std::invalid_argument("weight vector length mismatch");
  }

  // Insertion matrices C_j = v_j * M_j(s, flipped bra). The forward pair
  // (F, G) and backward pair (R, Q) track the plain product and the sum of
  // all single-insertion products; joint rescaling keeps their ratio.
  std::vector<Eigen::MatrixXd> insert(length);
  for (int j = 0; j < length; ++j) {
    if (v[j] != 0.0) insert[j] = v[j] * view.transfer(j, s_idx[j], 1 - s_idx[j]);
  }

  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(m, m);
  std::vector<Eigen::MatrixXd> f(length + 1), g(length + 1), r(length + 1), q(length + 1);
  f[0] = id;
  g[0] = Eigen::MatrixXd::Zero(m, m);
  std::vector<Eigen::MatrixXd> ms(length);
  for (int j = 0; j < length; ++j) ms[j] = view.transfer(j, s_idx[j], s_idx[j]);

  for (int j = 0; j < length; ++j) {
    f[j + 1] = f[j] * ms[j];
    g[j + 1] = g[j] * ms[j];
    if (v[j] != 0.0) g[j + 1] += f[j] * insert[j];
    const double scale = std::max(f[j + 1].cwiseAbs().maxCoeff(), g[j + 1].cwiseAbs().maxCoeff());
    if (scale == 0.0) throw std::runtime_error("weighted gradient on a zero chain");
    f[j + 1] /= scale;
    g[j + 1] /= scale;
  }
  r[length] = id;
  q[length] = Eigen::MatrixXd::Zero(m, m);
  for (int j = length - 1; j >= 0; --j) {
    r[j] = ms[j] * r[j + 1];
    q[j] = ms[j] * q[j + 1];
    if (v[j] != 0.0) q[j] += insert[j] * r[j + 1];
    const double scale = std::max(r[j].cwiseAbs().maxCoeff(), q[j].cwiseAbs().maxCoeff());
    if (scale == 0.0) throw std::runtime_error("weighted gradient on a zero chain");
    r[j] /= scale;
    q[j] /= scale;
  }

  for (int j = 0; j < length; ++j) {
    const Eigen::MatrixXd env = r[j + 1] * f[j];
    const double t = contract_trace(env, ms[j]);
    if (t == 0.0) throw std::runtime_error("weighted gradient at a zero-density configuration");
    double* site_delta = delta_out + j * view.site_stride();
    double* site_weighted = weighted_out + j * view.site_stride();

    Eigen::MatrixXd w = env.transpose() / t;
    accumulate_chain_rule(w, view, j, s_idx[j], s_idx[j], 1.0, site_delta);

    // d u / d M_j through chains whose insertion sits elsewhere
    Eigen::MatrixXd x = r[j + 1] * g[j];
    x.noalias() += q[j + 1] * f[j];
    w = x.transpose() / t;
    accumulate_chain_rule(w, view, j, s_idx[j], s_idx[j], 1.0, site_weighted);

    // d u / d M~_j at the insertion site itself
    if (v[j] != 0.0) {
      w = (v[j] / t) * env.transpose();
      accumulate_chain_rule(w, view, j, s_idx[j], 1 - s_idx[j], 1.0, site_weighted);
    }
  }
}

ChainPairCache::ChainPairCache(const ChainTensorView& view, std::vector<int> ket_idx,
                               std::vector<int> bra_idx)
    : view_(view), ket_idx_(std::move(ket_idx)), bra_idx_(std::move(bra_idx)) {
  const int length = view_.length();
  const int m = view_.bond_dim() * view_.bond_dim();
  ms_.resize(length);
  prefix_.assign(length + 1, Eigen::MatrixXd());
  suffix_.assign(length + 1, Eigen::MatrixXd());
  prefix_[0] = Eigen::MatrixXd::Identity(m, m);
  suffix_[length] = Eigen::MatrixXd::Identity(m, m);
  refresh();
}

void ChainPairCache::refresh() {
  const int length = view_.length();
  for (int j = 0; j < length; ++j) ms_[j] = view_.transfer(j, ket_idx_[j], bra_idx_[j]);
  valid_prefix_ = 0;
  valid_suffix_ = length;
  log_value_ = chain_log_trace(ms_);
  commits_since_refresh_ = 0;
}

void ChainPairCache::ensure_prefix(int j) {
  while (valid_prefix_ < j) {
    const int i = valid_prefix_;
    prefix_[i + 1] = prefix_[i] * ms_[i];
    const double scale = prefix_[i + 1].cwiseAbs().maxCoeff();
    if (scale > 0.0) prefix_[i + 1] /= scale;
    ++valid_prefix_;
  }
}

void ChainPairCache::ensure_suffix(int j) {
  while (valid_suffix_ > j) {
    const int i = valid_suffix_ - 1;
    suffix_[i] = ms_[i] * suffix_[i + 1];
    const double scale = suffix_[i].cwiseAbs().maxCoeff();
    if (scale > 0.0) suffix_[i] /= scale;
    --valid_suffix_;
  }
}

double ChainPairCache::ratio(int position, int new_ket, int new_bra) {
  ensure_prefix(position);
  ensure_suffix(position + 1);
  const Eigen::MatrixXd env = suffix_[position + 1] * prefix_[position];
  const double t_old = contract_trace(env, ms_[position]);
  if (t_old == 0.0) throw std::runtime_error("chain cache at a zero-valued element");
  last_.position = position;
  last_.ket = new_ket;
  last_.bra = new_bra;
  last_.transfer = view_.transfer(position, new_ket, new_bra);
  last_.ratio = contract_trace(env, last_.transfer) / t_old;
  return last_.ratio;
}

void ChainPairCache::commit(int position, int new_ket, int new_bra) {
  if (last_.position != position || last_.ket != new_ket || last_.bra != new_bra) {
    (void)ratio(position, new_ket, new_bra);
  }
  if (last_.ratio == 0.0) throw std::runtime_error("committing a zero-density move");
  ket_idx_[position] = new_ket;
  bra_idx_[position] = new_bra;
  ms_[position] = std::move(last_.transfer);
  valid_prefix_ = std::min(valid_prefix_, position);
  valid_suffix_ = std::max(valid_suffix_, position + 1);
  log_value_ += CLog{std::log(std::abs(last_.ratio)), last_.ratio < 0.0 ? kPi : 0.0};
  last_.position = -1;
  if (++commits_since_refresh_ >= 65536) refresh();
}

}  // namespace rvmc
