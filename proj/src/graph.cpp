#include "graphkeeper/graph.hpp"

#include <algorithm>
#include <cmath>

namespace gk {

const char* split_name(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "?";
}

Split parse_split(const std::string& s) {
  if (s == "train") return Split::kTrain;
  if (s == "val") return Split::kVal;
  if (s == "test") return Split::kTest;
  throw ValidationError("unknown split tag '" + s + "'");
}

void Graph::validate() const {
  if (num_nodes < 0) throw ValidationError("graph: negative node count");
  if (features.rows() != num_nodes) {
    throw ValidationError("graph: feature rows (" + std::to_string(features.rows()) +
                          ") != num_nodes (" + std::to_string(num_nodes) + ")");
  }
  if (static_cast<Index>(labels.size()) != num_nodes ||
      static_cast<Index>(split.size()) != num_nodes) {
    throw ValidationError("graph: labels/split length != num_nodes");
  }
  require_finite(features, "graph features");
  for (const auto& [u, v] : edges) {
    if (u < 0 || v < 0 || u >= num_nodes || v >= num_nodes) {
      throw BoundsError("graph: edge (" + std::to_string(u) + "," + std::to_string(v) +
                        ") outside node range");
    }
    if (u >= v) throw ValidationError("graph: edge endpoints not ordered or self-loop");
  }
  if (!std::is_sorted(edges.begin(), edges.end()) ||
      std::adjacent_find(edges.begin(), edges.end()) != edges.end()) {
    throw ValidationError("graph: edges not sorted and unique");
  }
  for (int y : labels) {
    if (y != kNoLabel && (y < 0 || y >= num_classes)) {
      throw BoundsError("graph: label " + std::to_string(y) + " outside [0, " +
                        std::to_string(num_classes) + ")");
    }
  }
}

std::vector<Index> Graph::nodes_in(Split s) const {
  std::vector<Index> out;
  for (Index i = 0; i < num_nodes; ++i)
    if (split[static_cast<std::size_t>(i)] == s) out.push_back(i);
  return out;
}

bool operator==(const Graph& a, const Graph& b) {
  if (a.name != b.name || a.num_nodes != b.num_nodes || a.num_classes != b.num_classes ||
      a.edges != b.edges || a.labels != b.labels || a.split != b.split) {
    return false;
  }
  if (a.features.rows() != b.features.rows() || a.features.cols() != b.features.cols()) {
    return false;
  }
  return (a.features.array() == b.features.array()).all();
}

std::vector<Edge> canonical_edges(std::vector<Edge> edges) {
  std::vector<Edge> out;
  out.reserve(edges.size());
  for (auto [u, v] : edges) {
    if (u == v) continue;
    out.emplace_back(std::min(u, v), std::max(u, v));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Graph induced_subgraph(const Graph& g, const std::vector<Index>& nodes) {
  std::vector<Index> remap(static_cast<std::size_t>(g.num_nodes), -1);
  Graph sub;
  sub.name = g.name;
  sub.num_classes = g.num_classes;
  sub.num_nodes = static_cast<Index>(nodes.size());
  sub.features.resize(sub.num_nodes, g.feature_dim());
  for (Index i = 0; i < sub.num_nodes; ++i) {
    const Index src = nodes[static_cast<std::size_t>(i)];
    if (src < 0 || src >= g.num_nodes) throw BoundsError("induced_subgraph: node out of range");
    remap[static_cast<std::size_t>(src)] = i;
    sub.features.row(i) = g.features.row(src);
    sub.labels.push_back(g.labels[static_cast<std::size_t>(src)]);
    sub.split.push_back(g.split[static_cast<std::size_t>(src)]);
  }
  std::vector<Edge> kept;
  for (const auto& [u, v] : g.edges) {
    const Index a = remap[static_cast<std::size_t>(u)];
    const Index b = remap[static_cast<std::size_t>(v)];
    if (a >= 0 && b >= 0) kept.emplace_back(a, b);
  }
  sub.edges = canonical_edges(std::move(kept));
  return sub;
}

SparseMatrix normalized_adjacency(const Graph& g) {
  const Index n = g.num_nodes;
  Vector degree = Vector::Ones(n);
  for (const auto& [u, v] : g.edges) {
    degree(u) += 1.0;
    degree(v) += 1.0;
  }
  const Vector inv_sqrt = degree.array().rsqrt();

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(n) + 2 * g.edges.size());
  for (Index i = 0; i < n; ++i) triplets.emplace_back(i, i, inv_sqrt(i) * inv_sqrt(i));
  for (const auto& [u, v] : g.edges) {
    const double w = inv_sqrt(u) * inv_sqrt(v);
    triplets.emplace_back(u, v, w);
    triplets.emplace_back(v, u, w);
  }
  SparseMatrix a(n, n);
  a.setFromTriplets(triplets.begin(), triplets.end());
  return a;
}

Matrix FeatureAlignment::apply(const Matrix& features) const {
  if (features.cols() != projection.rows()) {
    throw ValidationError("feature alignment: input width " + std::to_string(features.cols()) +
                          " does not match fitted width " + std::to_string(projection.rows()));
  }
  return features * projection;
}

FeatureAlignment fit_alignment(const Matrix& features, Index target_dim) {
  if (target_dim < 1) throw ValidationError("align_features: target dimension must be >= 1");
  if (features.rows() < 1) throw ValidationError("align_features: empty feature matrix");
  const Index d0 = features.cols();
  FeatureAlignment out;
  if (d0 < target_dim) {
    out.projection = Matrix::Zero(d0, target_dim);
    out.projection.leftCols(d0).setIdentity();
    return out;
  }
  // A k-truncated SVD needs k <= min(n, d0); with fewer nodes than target
  // columns the trailing directions are zero.
  const Index k = std::min(target_dim, features.rows());
  const auto svd = truncated_svd(features, k);
  out.projection = Matrix::Zero(d0, target_dim);
  out.projection.leftCols(k) = svd.V;
  return out;
}

Matrix align_features(const Matrix& features, Index target_dim) {
  return fit_alignment(features, target_dim).apply(features);
}

Graph augment(const Graph& g, double mask_rate, double drop_rate, Rng rng) {
  if (!(mask_rate >= 0.0 && mask_rate <= 1.0) || !(drop_rate >= 0.0 && drop_rate <= 1.0)) {
    throw ValidationError("augment: rates must lie in [0, 1]");
  }
  Graph out = g;
  Rng mask_rng = rng.split("mask");
  Rng drop_rng = rng.split("drop");
  if (mask_rate > 0.0) {
    for (Index i = 0; i < out.features.rows(); ++i)
      for (Index j = 0; j < out.features.cols(); ++j)
        if (mask_rng.bernoulli(mask_rate)) out.features(i, j) = 0.0;
  }
  if (drop_rate > 0.0) {
    std::vector<Edge> kept;
    kept.reserve(g.edges.size());
    for (const auto& e : g.edges)
      if (!drop_rng.bernoulli(drop_rate)) kept.push_back(e);
    out.edges = std::move(kept);
  }
  return out;
}

}  // namespace gk
