#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace rvmc {

/// All variational parameters of one ansatz, flattened to real doubles.
/// Complex parameters are stored as adjacent (real, imag) pairs.
using ParameterVector = std::vector<double>;

/// Maps named tensors/weight blocks to contiguous slices of a
/// ParameterVector.
class ParameterLayout {
 public:
  struct Block {
    std::string name;
    std::size_t offset = 0;
    std::size_t size = 0;     ///< in real doubles
    bool complex_pairs = false;  ///< entries are (re, im) pairs
  };

  std::size_t add(const std::string& name, std::size_t size, bool complex_pairs = false) {
    const std::size_t offset = total_;
    blocks_.push_back({name, offset, size, complex_pairs});
    total_ += size;
    return offset;
  }

  const Block& block(const std::string& name) const {
    for (const auto& b : blocks_) {
      if (b.name == name) return b;
    }
    throw std::invalid_argument("unknown parameter block: " + name);
  }

  const std::vector<Block>& blocks() const { return blocks_; }
  std::size_t total_size() const { return total_; }

 private:
  std::vector<Block> blocks_;
  std::size_t total_ = 0;
};

}  // namespace rvmc
