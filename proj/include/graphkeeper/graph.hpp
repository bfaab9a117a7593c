#pragma once

#include <Eigen/SparseCore>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "graphkeeper/numerics.hpp"

namespace gk {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

enum class Split : std::uint8_t { kTrain, kVal, kTest };

const char* split_name(Split s);
Split parse_split(const std::string& s);  // throws ValidationError

inline constexpr int kNoLabel = -1;

// Undirected edge stored with first < second.
using Edge = std::pair<Index, Index>;

struct Graph {
  std::string name;
  Index num_nodes = 0;
  int num_classes = 0;
  std::vector<Edge> edges;     // sorted, unique, no self-loops
  Matrix features;             // num_nodes x d
  std::vector<int> labels;     // per node, kNoLabel when unlabeled
  std::vector<Split> split;    // per node

  Index feature_dim() const { return features.cols(); }

  // Throws ValidationError describing the first violated invariant.
  void validate() const;

  std::vector<Index> nodes_in(Split s) const;

};

// Exact equality, features compared bitwise-by-value.
bool operator==(const Graph& a, const Graph& b);

// Canonicalises an edge list: orders endpoints, drops self-loops and
// duplicates, sorts lexicographically.
std::vector<Edge> canonical_edges(std::vector<Edge> edges);

// Induced subgraph on `nodes` (kept in the given order, reindexed densely).
Graph induced_subgraph(const Graph& g, const std::vector<Index>& nodes);

// Half-open range of global class indices owned by one domain.
struct ClassBlock {
  int begin = 0;
  int end = 0;
  int width() const { return end - begin; }
  bool contains(int c) const { return c >= begin && c < end; }
  bool overlaps(const ClassBlock& o) const { return begin < o.end && o.begin < end; }
  friend bool operator==(const ClassBlock&, const ClassBlock&) = default;
};

// Graph labels are local to the domain; global class = block.begin + label.
struct DomainTask {
  int domain_id = 0;
  Graph graph;
  ClassBlock class_block;
};

// D^{-1/2} (A + I) D^{-1/2}, with D the degree matrix of A + I.
SparseMatrix normalized_adjacency(const Graph& g);

// Linear map taking a domain's raw features to the shared width. Either the
// top right-singular vectors of the domain's feature matrix (d0 >= target)
// or a zero-padding selector [I | 0] (d0 < target).
struct FeatureAlignment {
  Matrix projection;  // d0 x target

  Matrix apply(const Matrix& features) const;
  Index input_dim() const { return projection.rows(); }
  Index output_dim() const { return projection.cols(); }
};

FeatureAlignment fit_alignment(const Matrix& features, Index target_dim);

// F V_k when d0 >= target_dim, F zero-padded on the right otherwise.
Matrix align_features(const Matrix& features, Index target_dim);

// Masks each feature entry with probability mask_rate and drops each edge
// with probability drop_rate. Pure function of (g, rates, rng state).
Graph augment(const Graph& g, double mask_rate, double drop_rate, Rng rng);

struct SyntheticSuiteSpec {
  int num_domains = 4;
  int classes_per_domain = 3;
  int nodes_per_class = 60;
  double p_in = 0.1;
  double p_out = 0.01;
  int feature_dim = 32;
  double mean_separation = 5.0;
  std::uint64_t seed = 0;
};

// Stochastic block model per domain with Gaussian class-conditional
// features; class blocks are assigned contiguously in domain order.
std::vector<DomainTask> synth_domain_suite(const SyntheticSuiteSpec& spec);

// Text dataset directory: meta.json, nodes.tsv, edges.tsv.
Graph load_dataset(const std::string& dir);
void save_dataset(const Graph& g, const std::string& dir);

}  // namespace gk
