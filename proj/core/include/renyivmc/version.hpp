#pragma once

namespace rvmc {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace rvmc
