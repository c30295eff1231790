#pragma once

#include <memory>

#include <json.hpp>

#include "renyivmc/ansatz.hpp"

namespace rvmc {

/// Builds an ansatz from a self-contained structural description:
///   {"kind":"mpdo","sites":8,"bond_dim":8,"kraus_dim":2}
///   {"kind":"epdo","sites":4,"plaquettes":[[0,1],[1,2],[2,3]],"kraus_dim":4}
///   {"kind":"sbdo","sites":4,"strings":[[0,1,3,2],[0,2,3,1]],"bond_dim":2,"kraus_dim":2}
///   {"kind":"rbm","sites":4,"hidden_density":1.0,"ancilla_density":1.0}
std::unique_ptr<DensityAnsatz> make_ansatz(const nlohmann::json& spec);

/// Inverse of make_ansatz: structural description of an existing instance.
nlohmann::json ansatz_to_json(const DensityAnsatz& ansatz);

}  // namespace rvmc
