#pragma once

#include <span>
#include <vector>

#include "graphkeeper/graph.hpp"

namespace gk {

struct DomainBlock {
  int domain_id = 0;
  ClassBlock classes;  // global class range; W columns follow arrival order
  friend bool operator==(const DomainBlock&, const DomainBlock&) = default;
};

// Analytic ridge classifier carried across domains without stored data.
// Invariant: M = (sum_i X_i^T X_i + lambda I)^{-1} and W = M sum_i X_i^T Y_i
// over every processed domain, with Y_i zero-padded to all columns so far.
struct RidgeState {
  Matrix W;  // h x C
  Matrix M;  // h x h
  double lambda = 1.0;
  std::vector<DomainBlock> blocks;

  Index feature_dim() const { return M.rows(); }
  Index num_columns() const { return W.cols(); }
  // Global class index of column j.
  int column_class(Index j) const;
};

// Which inverse the update uses; kAuto picks the smaller system.
enum class UpdatePath { kAuto, kCapacitance, kGram };

// Local one-hot targets: row i has a 1 in column labels[i].
Matrix one_hot(std::span<const int> labels, int num_classes);

RidgeState init_state(const Matrix& x, const Matrix& y, double lambda, DomainBlock block);

RidgeState update_state(const RidgeState& state, const Matrix& x, const Matrix& y,
                        DomainBlock block, UpdatePath path = UpdatePath::kAuto);

struct Prediction {
  Matrix probabilities;     // n x C, rows sum to one
  std::vector<int> classes;  // global class index per row
};

Prediction predict(const RidgeState& state, const Matrix& x);

// Batch ridge solve over all domains at once; reference for the recursion.
// ys holds each domain's local one-hot block; they are placed block-diagonally
// in arrival order, zero elsewhere.
Matrix batch_oracle(const std::vector<Matrix>& xs, const std::vector<Matrix>& ys, double lambda);

}  // namespace gk
