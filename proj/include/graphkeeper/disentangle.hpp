#pragma once

#include <optional>
#include <span>
#include <vector>

#include "graphkeeper/numerics.hpp"

namespace gk {

struct TaggedPrototype {
  int domain_id = 0;
  int cluster_id = 0;
  Vector vector;
};

// Append-only collection of embedding prototypes across the domain sequence.
class PrototypeSet {
 public:
  void append(TaggedPrototype p);
  void append(const std::vector<TaggedPrototype>& ps) {
    for (const auto& p : ps) append(p);
  }

  const std::vector<TaggedPrototype>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  // One prototype per row; 0 x dim when empty.
  Matrix as_matrix(Index dim) const;

 private:
  std::vector<TaggedPrototype> entries_;
};

struct IntraLoss {
  double value = 0.0;
  Matrix grad_x;
  Matrix grad_xaug;
};

struct InterLoss {
  double value = 0.0;
  Matrix grad_x;
};

struct LossReport {
  double intra = 0.0;
  double inter = 0.0;
  double total = 0.0;
  Matrix grad_x;
  Matrix grad_xaug;
};

// Supervised cross-view contrastive loss with cosine similarity and unit
// temperature. Positives of node j are every node of its class in the
// augmented view (including j itself); the denominator runs over all nodes.
IntraLoss intra_loss(const Matrix& x, const Matrix& x_aug, std::span<const int> labels);

// (1/n) sum_j sum_k 1 / (|x_j - P_k|^2 + eps); prototypes one per row.
InterLoss inter_loss(const Matrix& x, const Matrix& prototypes, double epsilon);

LossReport total_loss(const Matrix& x, const Matrix& x_aug, std::span<const int> labels,
                      const Matrix& prototypes, double gamma1, double gamma2, double epsilon);

inline constexpr int kNoise = -1;

// Density clustering under Euclidean distance. A point is core when at
// least min_pts points (itself included) lie within distance <= eps.
// Clusters are grown breadth-first from cores visited in index order.
std::vector<int> dbscan(const Matrix& points, double eps, int min_pts);

// Median distance to the k-th nearest other point.
double median_knn_distance(const Matrix& points, int k = 4);

struct PrototypeOptions {
  std::optional<double> eps;  // median 4-NN distance when empty
  int min_pts = 4;
};

// Cluster centroids of X; per-class centroids when clustering finds nothing.
// labels may contain kNoLabel (-1) entries, which the fallback ignores.
std::vector<TaggedPrototype> extract_prototypes(const Matrix& x, std::span<const int> labels,
                                                const PrototypeOptions& opts, int domain_id);

}  // namespace gk
