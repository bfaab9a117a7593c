#pragma once

#include <cstdint>
#include <vector>

#include "graphkeeper/graph.hpp"

namespace gk {

// Frozen random two-layer graph projection into a wide space. Weights are a
// pure function of (seed, dims), so only those need persisting.
struct ProjectionParams {
  std::uint64_t seed = 0;
  Matrix r1;  // in x p
  Matrix r2;  // p x p

  Index input_dim() const { return r1.rows(); }
  Index output_dim() const { return r1.cols(); }
};

// Gaussian weights with variance 2 / fan_in.
ProjectionParams make_projection(Index input_dim, Index projection_dim, std::uint64_t seed);

// A relu(A F R1) R2.
Matrix random_projection(const Graph& g, const ProjectionParams& params);
Matrix random_projection(const SparseMatrix& adj, const Matrix& features, const ProjectionParams& params);

struct DomainPrototype {
  int domain_id = 0;
  Vector vector;
};

// Column-wise mean.
Vector domain_prototype(const Matrix& projected);

struct Discrimination {
  int domain_id = 0;
  std::vector<double> correlations;  // exp(-|D_test - D_k|^2), prototype order
  std::vector<double> sq_distances;
};

// Nearest prototype in Euclidean distance (equivalently the largest
// exp(-d^2)); ties resolve to the lowest domain id.
Discrimination discriminate(const Vector& test_proto, const std::vector<DomainPrototype>& prototypes);

}  // namespace gk
