#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "renyivmc/spin.hpp"

namespace rvmc {

/// Finite lattice with open boundaries: a 1D chain or an Lx x Ly square.
/// Sites on the square are indexed row-major, site = x + Lx * y.
struct Geometry {
  enum class Kind { chain, square };

  Kind kind = Kind::chain;
  int lx = 0;  ///< chain length for Kind::chain
  int ly = 1;
  std::vector<std::pair<int, int>> bonds;  ///< nearest-neighbor pairs, i < j

  int num_sites() const { return lx * ly; }

  static Geometry chain(int n);
  static Geometry square(int lx, int ly);
};

/// One nonzero column entry of a local operator: the connected configuration
/// s' is `s` with the listed sites flipped (empty = diagonal), and `value`
/// is the matrix element <s'|O|s>. Diagonal-only rules set value via the
/// diagonal callback instead.
struct ConnectedTerm {
  std::vector<int> flips;
  double value = 0.0;
};

/// Transverse-field Ising Hamiltonian on a Geometry:
///   H = J sum_<ij> sz_i sz_j + h_z sum_i sz_i - h_x sum_i sx_i
struct IsingHamiltonian {
  Geometry geometry;
  double j = 0.0;
  double h_z = 0.0;
  double h_x = 0.0;

  int num_sites() const { return geometry.num_sites(); }

  /// Classical (diagonal) energy J sum s_i s_j + h_z sum s_i.
  double diagonal(const SpinConfiguration& s) const;

  /// All s' with <s'|H|s> != 0: the diagonal first, then single-site flips
  /// by ascending site index (present only when h_x != 0).
  std::vector<ConnectedTerm> connected_elements(const SpinConfiguration& s) const;
};

/// Hermitian local observable exposed through the same connected-elements
/// interface as the Hamiltonian.
struct Observable {
  std::string name;
  /// per-site sums are normalized by 1/N
  enum class Kind { transverse_magnetization, bond_xx, bond_zz } kind =
      Kind::transverse_magnetization;
  Geometry geometry;

  std::vector<ConnectedTerm> connected_elements(const SpinConfiguration& s) const;
};

IsingHamiltonian build_hamiltonian(const Geometry& geometry, double j, double h_z, double h_x);

/// M_x plus the geometry's two-point correlation (C_xx on chains, C_zz on
/// squares).
std::vector<Observable> standard_observables(const Geometry& geometry);

/// Dense matrix of H or an observable over the full 2^N basis
/// (basis_index convention). Test/oracle support; N capped.
Eigen::MatrixXd dense_matrix(const IsingHamiltonian& h, int max_sites = 14);
Eigen::MatrixXd dense_matrix(const Observable& obs, int max_sites = 14);

}  // namespace rvmc
