#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace rvmc {

/// Single spin-1/2 value in the computational z-basis, stored as the
/// sigma^z eigenvalue (+1 or -1).
using Spin = std::int8_t;

/// A basis configuration |s> = |s_1,...,s_N>, entries in {-1,+1}.
using SpinConfiguration = std::vector<Spin>;

inline void flip(SpinConfiguration& s, int site) { s[site] = static_cast<Spin>(-s[site]); }

inline SpinConfiguration flipped(SpinConfiguration s, int site) {
  flip(s, site);
  return s;
}

/// Basis index of a configuration: spin +1 -> bit 0, -1 -> bit 1,
/// little-endian in the site index. Fixed convention for all dense
/// materializations.
inline std::size_t basis_index(const SpinConfiguration& s) {
  std::size_t idx = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] < 0) idx |= (std::size_t{1} << i);
  }
  return idx;
}

/// Inverse of basis_index.
inline SpinConfiguration configuration_from_index(std::size_t idx, int num_sites) {
  SpinConfiguration s(num_sites);
  for (int i = 0; i < num_sites; ++i) {
    s[i] = (idx >> i) & 1 ? Spin{-1} : Spin{+1};
  }
  return s;
}

inline void check_configuration(const SpinConfiguration& s, int num_sites) {
  if (static_cast<int>(s.size()) != num_sites) {
    throw std::invalid_argument("configuration length mismatch");
  }
  for (Spin v : s) {
    if (v != 1 && v != -1) throw std::invalid_argument("spin entries must be +1 or -1");
  }
}

}  // namespace rvmc
