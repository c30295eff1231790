#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "renyivmc/lattice.hpp"
#include "renyivmc/optimizer.hpp"
#include "renyivmc/sampler.hpp"

namespace rvmc {

/// Config validation failure carrying every problem found, not just the
/// first.
struct ConfigError : std::runtime_error {
  explicit ConfigError(std::vector<std::string> problems);
  std::vector<std::string> problems;
};

/// One experiment: model, ansatz, objective, sampler, optimizer, run
/// settings. Parsed strictly: unknown or inapplicable keys are rejected.
struct RunConfig {
  Geometry geometry;
  double j = 1.0;
  double h_z = 0.0;
  double h_x = 1.0;

  nlohmann::json ansatz_section;  ///< as written in the config
  double init_scale = 0.01;

  std::vector<double> beta_r;

  SamplerConfig sampler;
  OptimizerConfig optimizer;
  int checkpoint_every = 100;

  std::uint64_t seed = 1;
  std::string output_dir = "runs/out";
  int threads = 0;

  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig from_file(const std::string& path);
  nlohmann::json to_json() const;

  /// FNV-1a hash of the canonical serialization, 16 hex digits.
  std::string config_hash() const;

  IsingHamiltonian hamiltonian() const { return build_hamiltonian(geometry, j, h_z, h_x); }

  /// Self-contained factory spec resolved against the geometry (snake
  /// strings, default plaquettes).
  nlohmann::json resolved_ansatz_spec() const;
};

}  // namespace rvmc
