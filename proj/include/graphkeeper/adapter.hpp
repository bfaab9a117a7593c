#pragma once

#include <array>

#include "graphkeeper/numerics.hpp"

namespace gk {

// Per-domain low-rank pair for each of the two graph-convolution layers.
// Layer l contributes down[l] * up[l] to that layer's weight.
struct LoraAdapter {
  int domain_id = 0;
  Index rank = 0;
  std::array<Matrix, 2> down;  // d_{l-1} x r
  std::array<Matrix, 2> up;    // r x d_l
  bool frozen = false;

  Matrix delta(int layer) const { return down[layer] * up[layer]; }

  Index parameter_count() const {
    Index n = 0;
    for (int l = 0; l < 2; ++l) n += down[l].size() + up[l].size();
    return n;
  }
};

struct AdapterGrads {
  std::array<Matrix, 2> down;
  std::array<Matrix, 2> up;
};

}  // namespace gk
