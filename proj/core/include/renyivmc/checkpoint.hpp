#pragma once

#include <filesystem>
#include <memory>

#include <json.hpp>

#include "renyivmc/ansatz.hpp"

namespace rvmc {

/// Checkpoint file layout: magic "RVMCCKPT", u32 format version, u32 header
/// length, JSON header (ansatz description, parameter count, seed lineage),
/// then the flat parameters as little-endian IEEE-754 doubles. Round-trips
/// exactly.
void save_checkpoint(const std::filesystem::path& path, const DensityAnsatz& ansatz,
                     const ParameterVector& params, const nlohmann::json& seed_lineage);

struct Checkpoint {
  std::unique_ptr<DensityAnsatz> ansatz;
  ParameterVector params;
  nlohmann::json seed_lineage;
};

Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace rvmc
