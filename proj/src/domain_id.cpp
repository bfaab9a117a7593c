#include "graphkeeper/domain_id.hpp"

#include <cmath>
#include <limits>

namespace gk {

ProjectionParams make_projection(Index input_dim, Index projection_dim, std::uint64_t seed) {
  if (input_dim < 1 || projection_dim < 1) throw ValidationError("make_projection: dimensions must be >= 1");
  ProjectionParams p;
  p.seed = seed;
  const Rng root = Rng(seed).split("domain-projection");
  Rng r1 = root.split("r1");
  Rng r2 = root.split("r2");
  p.r1 = gaussian_matrix(input_dim, projection_dim, r1, std::sqrt(2.0 / static_cast<double>(input_dim)));
  p.r2 = gaussian_matrix(projection_dim, projection_dim, r2, std::sqrt(2.0 / static_cast<double>(projection_dim)));
  return p;
}

Matrix random_projection(const SparseMatrix& adj, const Matrix& features, const ProjectionParams& params) {
  if (features.cols() != params.input_dim()) {
    throw ValidationError("random_projection: feature width " + std::to_string(features.cols()) +
                          " != projection input width " + std::to_string(params.input_dim()));
  }
  if (adj.rows() != features.rows()) throw ValidationError("random_projection: adjacency/features mismatch");
  const Matrix h = (adj * (features * params.r1)).cwiseMax(0.0);
  return adj * (h * params.r2);
}

Matrix random_projection(const Graph& g, const ProjectionParams& params) {
  return random_projection(normalized_adjacency(g), g.features, params);
}

Vector domain_prototype(const Matrix& projected) {
  if (projected.rows() < 1) throw ValidationError("domain_prototype: empty graph");
  return projected.colwise().mean().transpose();
}

Discrimination discriminate(const Vector& test_proto, const std::vector<DomainPrototype>& prototypes) {
  if (prototypes.empty()) throw ValidationError("discriminate: no domain prototypes registered");
  Discrimination out;
  double best = std::numeric_limits<double>::infinity();
  int best_id = 0;
  for (const auto& p : prototypes) {
    if (p.vector.size() != test_proto.size()) throw ValidationError("discriminate: prototype width mismatch");
    const double d2 = (test_proto - p.vector).squaredNorm();
    out.sq_distances.push_back(d2);
    out.correlations.push_back(std::exp(-d2));
    if (d2 < best || (d2 == best && p.domain_id < best_id)) {
      best = d2;
      best_id = p.domain_id;
    }
  }
  out.domain_id = best_id;
  return out;
}

}  // namespace gk
