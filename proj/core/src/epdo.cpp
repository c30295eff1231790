#include "renyivmc/epdo.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

#include "renyivmc/rng.hpp"

namespace rvmc {

namespace {

constexpr double kPi = 3.141592653589793238462643383280;

CLog log_of_real(double x) {
  if (x == 0.0) return {neg_infinity(), 0.0};
  return {std::log(std::abs(x)), x < 0.0 ? kPi : 0.0};
}

class EpdoPairCache final : public PairCache {
 public:
  EpdoPairCache(const EpdoAnsatz& ansatz, const ParameterVector& params, SpinConfiguration s,
                SpinConfiguration sp)
      : ansatz_(ansatz), params_(params), ket_(std::move(s)), bra_(std::move(sp)) {
    const int np = static_cast<int>(ansatz_.plaquettes().size());
    rows_ket_.resize(np);
    rows_bra_.resize(np);
    factors_.resize(np);
    log_value_ = {0.0, 0.0};
    for (int p = 0; p < np; ++p) {
      rows_ket_[p] = ansatz_.row_of(p, ket_);
      rows_bra_[p] = ansatz_.row_of(p, bra_);
      factors_[p] = factor(p, rows_ket_[p], rows_bra_[p]);
      log_value_ += log_of_real(factors_[p]);
    }
  }

  CLog log_value() const override { return log_value_; }

  CLog flip_log_ratio(Side side, int site) override {
    CLog delta{0.0, 0.0};
    for_affected(side, site, [&](int p, int rk, int rb) {
      const double f_new = factor(p, rk, rb);
      if (f_new == 0.0) {
        delta = {neg_infinity(), 0.0};
        return false;
      }
      delta += log_of_real(f_new) - log_of_real(factors_[p]);
      return true;
    });
    return delta;
  }

  void commit_flip(Side side, int site) override {
    for_affected(side, site, [&](int p, int rk, int rb) {
      const double f_new = factor(p, rk, rb);
      log_value_ += log_of_real(f_new) - log_of_real(factors_[p]);
      rows_ket_[p] = rk;
      rows_bra_[p] = rb;
      factors_[p] = f_new;
      return true;
    });
    if (side != Side::bra) flip(ket_, site);
    if (side != Side::ket) flip(bra_, site);
  }

  const SpinConfiguration& ket() const override { return ket_; }
  const SpinConfiguration& bra() const override { return bra_; }

 private:
  double factor(int p, int row_ket, int row_bra) const {
    const double* a = ansatz_.row_data(params_, p, row_ket);
    const double* b = ansatz_.row_data(params_, p, row_bra);
    double acc = 0.0;
    for (int k = 0; k < ansatz_.kraus_dim(); ++k) acc += a[k] * b[k];
    return acc;
  }

  /// Visits each plaquette containing `site` with its candidate rows.
  template <typename Fn>
  void for_affected(Side side, int site, Fn&& fn) {
    const auto& plaqs = ansatz_.plaquettes();
    for (int p : ansatz_.plaquettes_of_site(site)) {
      int rk = rows_ket_[p];
      int rb = rows_bra_[p];
      int bit = 0;
      for (std::size_t k = 0; k < plaqs[p].size(); ++k) {
        if (plaqs[p][k] == site) bit = static_cast<int>(k);
      }
      if (side != Side::bra) rk ^= (1 << bit);
      if (side != Side::ket) rb ^= (1 << bit);
      if (!fn(p, rk, rb)) return;
    }
  }

  const EpdoAnsatz& ansatz_;
  const ParameterVector& params_;
  SpinConfiguration ket_;
  SpinConfiguration bra_;
  std::vector<int> rows_ket_;
  std::vector<int> rows_bra_;
  std::vector<double> factors_;
  CLog log_value_;
};

}  // namespace

EpdoAnsatz::EpdoAnsatz(int num_sites, std::vector<std::vector<int>> plaquettes, int kraus_dim)
    : n_(num_sites), plaquettes_(std::move(plaquettes)), chi_(kraus_dim) {
  if (n_ < 1) throw std::invalid_argument("epdo needs at least one site");
  if (chi_ < 1) throw std::invalid_argument("epdo kraus dimension must be positive");
  if (plaquettes_.empty()) throw std::invalid_argument("epdo needs at least one plaquette");
  std::vector<bool> covered(n_, false);
  for (const auto& plaq : plaquettes_) {
    if (plaq.empty() || plaq.size() > 20) throw std::invalid_argument("bad plaquette size");
    std::set<int> uniq(plaq.begin(), plaq.end());
    if (uniq.size() != plaq.size()) throw std::invalid_argument("plaquette repeats a site");
    for (int s : plaq) {
      if (s < 0 || s >= n_) throw std::invalid_argument("plaquette site out of range");
      covered[s] = true;
    }
  }
  for (bool c : covered) {
    if (!c) throw std::invalid_argument("plaquettes must cover every site");
  }
  plaquettes_of_site_.resize(n_);
  for (int p = 0; p < static_cast<int>(plaquettes_.size()); ++p) {
    layout_.add("plaquette_" + std::to_string(p),
                (std::size_t{1} << plaquettes_[p].size()) * chi_);
    for (int s : plaquettes_[p]) plaquettes_of_site_[s].push_back(p);
  }
}

int EpdoAnsatz::row_of(int p, const SpinConfiguration& s) const {
  int row = 0;
  const auto& sites = plaquettes_[p];
  for (std::size_t k = 0; k < sites.size(); ++k) {
    if (s[sites[k]] < 0) row |= (1 << k);
  }
  return row;
}

ParameterVector EpdoAnsatz::init(std::uint64_t seed, double scale) const {
  ParameterVector p(parameter_count());
  Rng rng(derive_seed(seed, 0));
  for (auto& x : p) x = scale * rng.normal();
  return p;
}

EvalResult EpdoAnsatz::eval(const ParameterVector& params, const SpinConfiguration& s,
                            const SpinConfiguration& sp, bool want_gradient) const {
  check_configuration(s, n_);
  check_configuration(sp, n_);
  check_params(params);
  EvalResult out;
  out.log_value = {0.0, 0.0};
  const int np = static_cast<int>(plaquettes_.size());
  std::vector<int> rows_ket(np), rows_bra(np);
  std::vector<double> factors(np);
  for (int p = 0; p < np; ++p) {
    rows_ket[p] = row_of(p, s);
    rows_bra[p] = row_of(p, sp);
    const double* a = row_data(params, p, rows_ket[p]);
    const double* b = row_data(params, p, rows_bra[p]);
    double acc = 0.0;
    for (int k = 0; k < chi_; ++k) acc += a[k] * b[k];
    factors[p] = acc;
    if (acc == 0.0) {
      out.log_value = {neg_infinity(), 0.0};
      return out;
    }
    out.log_value += log_of_real(acc);
  }
  if (want_gradient) {
    out.gradient = Eigen::VectorXcd::Zero(parameter_count());
    for (int p = 0; p < np; ++p) {
      const std::size_t base = layout_.blocks()[p].offset;
      const double* a = row_data(params, p, rows_ket[p]);
      const double* b = row_data(params, p, rows_bra[p]);
      const double inv = 1.0 / factors[p];
      for (int k = 0; k < chi_; ++k) {
        out.gradient(base + static_cast<std::size_t>(rows_ket[p]) * chi_ + k) += b[k] * inv;
        out.gradient(base + static_cast<std::size_t>(rows_bra[p]) * chi_ + k) += a[k] * inv;
      }
    }
  }
  return out;
}

std::unique_ptr<PairCache> EpdoAnsatz::make_cache(const ParameterVector& params,
                                                  SpinConfiguration s,
                                                  SpinConfiguration sp) const {
  check_configuration(s, n_);
  check_configuration(sp, n_);
  check_params(params);
  return std::make_unique<EpdoPairCache>(*this, params, std::move(s), std::move(sp));
}

ParameterVector EpdoAnsatz::grow_from(const DensityAnsatz& small,
                                      const ParameterVector& params_small, std::uint64_t seed,
                                      double noise) const {
  const auto* src = dynamic_cast<const EpdoAnsatz*>(&small);
  if (src == nullptr || src->n_ != n_ || src->plaquettes_ != plaquettes_ || src->chi_ > chi_) {
    throw std::invalid_argument("grow source must be an epdo with the same plaquettes");
  }
  src->check_params(params_small);
  ParameterVector p(parameter_count());
  Rng rng(derive_seed(seed, 1));
  for (int plaq = 0; plaq < static_cast<int>(plaquettes_.size()); ++plaq) {
    const int rows = 1 << plaquettes_[plaq].size();
    const std::size_t base = layout_.blocks()[plaq].offset;
    const std::size_t base_s = src->layout_.blocks()[plaq].offset;
    for (int r = 0; r < rows; ++r) {
      for (int a = 0; a < chi_; ++a) {
        p[base + static_cast<std::size_t>(r) * chi_ + a] =
            a < src->chi_ ? params_small[base_s + static_cast<std::size_t>(r) * src->chi_ + a]
                          : noise * rng.normal();
      }
    }
  }
  return p;
}

std::string EpdoAnsatz::spec_string() const {
  return "epdo(sites=" + std::to_string(n_) +
         ",plaquettes=" + std::to_string(plaquettes_.size()) +
         ",kraus_dim=" + std::to_string(chi_) + ")";
}

std::vector<std::vector<int>> default_plaquettes(const Geometry& geometry, int width) {
  if (width < 1) throw std::invalid_argument("plaquette width must be positive");
  std::vector<std::vector<int>> plaqs;
  if (geometry.kind == Geometry::Kind::chain) {
    const int n = geometry.num_sites();
    if (width > n) throw std::invalid_argument("plaquette width exceeds chain length");
    for (int i = 0; i + width <= n; ++i) {
      std::vector<int> p(width);
      for (int k = 0; k < width; ++k) p[k] = i + k;
      plaqs.push_back(std::move(p));
    }
  } else {
    if (width > geometry.lx || width > geometry.ly) {
      throw std::invalid_argument("plaquette width exceeds lattice extent");
    }
    for (int y = 0; y + width <= geometry.ly; ++y) {
      for (int x = 0; x + width <= geometry.lx; ++x) {
        std::vector<int> p;
        for (int dy = 0; dy < width; ++dy) {
          for (int dx = 0; dx < width; ++dx) p.push_back((x + dx) + geometry.lx * (y + dy));
        }
        plaqs.push_back(std::move(p));
      }
    }
  }
  return plaqs;
}

}  // namespace rvmc
