#include "renyivmc/lattice.hpp"

#include <set>
#include <stdexcept>

namespace rvmc {

Geometry Geometry::chain(int n) {
  if (n < 2) throw std::invalid_argument("chain needs at least 2 sites");
  Geometry g;
  g.kind = Kind::chain;
  g.lx = n;
  g.ly = 1;
  g.bonds.reserve(n - 1);
  for (int i = 0; i + 1 < n; ++i) g.bonds.emplace_back(i, i + 1);
  return g;
}

Geometry Geometry::square(int lx, int ly) {
  if (lx < 2 || ly < 2) throw std::invalid_argument("square lattice needs lx, ly >= 2");
  Geometry g;
  g.kind = Kind::square;
  g.lx = lx;
  g.ly = ly;
  for (int y = 0; y < ly; ++y) {
    for (int x = 0; x < lx; ++x) {
      const int site = x + lx * y;
      if (x + 1 < lx) g.bonds.emplace_back(site, site + 1);
      if (y + 1 < ly) g.bonds.emplace_back(site, site + lx);
    }
  }
  return g;
}

double IsingHamiltonian::diagonal(const SpinConfiguration& s) const {
  double e = 0.0;
  for (const auto& [a, b] : geometry.bonds) e += j * s[a] * s[b];
  for (int i = 0; i < num_sites(); ++i) e += h_z * s[i];
  return e;
}

std::vector<ConnectedTerm> IsingHamiltonian::connected_elements(const SpinConfiguration& s) const {
  check_configuration(s, num_sites());
  std::vector<ConnectedTerm> terms;
  terms.reserve(h_x != 0.0 ? num_sites() + 1 : 1);
  terms.push_back({{}, diagonal(s)});
  if (h_x != 0.0) {
    for (int i = 0; i < num_sites(); ++i) terms.push_back({{i}, -h_x});
  }
  return terms;
}

std::vector<ConnectedTerm> Observable::connected_elements(const SpinConfiguration& s) const {
  const int n = geometry.num_sites();
  check_configuration(s, n);
  const double norm = 1.0 / n;
  std::vector<ConnectedTerm> terms;
  switch (kind) {
    case Kind::transverse_magnetization:
      for (int i = 0; i < n; ++i) terms.push_back({{i}, norm});
      break;
    case Kind::bond_xx:
      for (const auto& [a, b] : geometry.bonds) terms.push_back({{a, b}, norm});
      break;
    case Kind::bond_zz: {
      double e = 0.0;
      for (const auto& [a, b] : geometry.bonds) e += s[a] * s[b];
      terms.push_back({{}, e * norm});
      break;
    }
  }
  return terms;
}

IsingHamiltonian build_hamiltonian(const Geometry& geometry, double j, double h_z, double h_x) {
  if (geometry.num_sites() < 2) throw std::invalid_argument("Hamiltonian needs at least 2 sites");
  if (!std::isfinite(j) || !std::isfinite(h_z) || !std::isfinite(h_x)) {
    throw std::invalid_argument("Hamiltonian couplings must be finite");
  }
  std::set<std::pair<int, int>> seen(geometry.bonds.begin(), geometry.bonds.end());
  if (seen.size() != geometry.bonds.size()) {
    throw std::invalid_argument("duplicate bonds in geometry");
  }
  for (const auto& [a, b] : geometry.bonds) {
    if (a == b || a < 0 || b < 0 || a >= geometry.num_sites() || b >= geometry.num_sites()) {
      throw std::invalid_argument("bond endpoints out of range");
    }
  }
  return IsingHamiltonian{geometry, j, h_z, h_x};
}

std::vector<Observable> standard_observables(const Geometry& geometry) {
  std::vector<Observable> obs;
  obs.push_back({"m_x", Observable::Kind::transverse_magnetization, geometry});
  if (geometry.kind == Geometry::Kind::chain) {
    obs.push_back({"c_xx", Observable::Kind::bond_xx, geometry});
  } else {
    obs.push_back({"c_zz", Observable::Kind::bond_zz, geometry});
  }
  return obs;
}

namespace {

template <typename Op>
Eigen::MatrixXd dense_from_connected(const Op& op, int n, int max_sites) {
  if (n > max_sites) throw std::invalid_argument("dense matrix requested above the site cap");
  const std::size_t dim = std::size_t{1} << n;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
  for (std::size_t col = 0; col < dim; ++col) {
    const SpinConfiguration s = configuration_from_index(col, n);
    for (const auto& term : op.connected_elements(s)) {
      SpinConfiguration sp = s;
      for (int site : term.flips) flip(sp, site);
      m(basis_index(sp), col) += term.value;
    }
  }
  return m;
}

}  // namespace

Eigen::MatrixXd dense_matrix(const IsingHamiltonian& h, int max_sites) {
  return dense_from_connected(h, h.num_sites(), max_sites);
}

Eigen::MatrixXd dense_matrix(const Observable& obs, int max_sites) {
  return dense_from_connected(obs, obs.geometry.num_sites(), max_sites);
}

}  // namespace rvmc
