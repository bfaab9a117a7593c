#include <algorithm>
#include <cmath>

#include "graphkeeper/graph.hpp"

namespace gk {

namespace {

// Fisher-Yates under the counter-based generator.
void shuffle(std::vector<Index>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(v[i - 1], v[j]);
  }
}

Matrix class_means(const SyntheticSuiteSpec& spec, Rng rng) {
  const int total = spec.num_domains * spec.classes_per_domain;
  Matrix means = Matrix::Zero(total, spec.feature_dim);
  if (spec.feature_dim >= total) {
    // One coordinate axis per (domain, class).
    for (int c = 0; c < total; ++c) means(c, c) = spec.mean_separation;
    return means;
  }
  for (int c = 0; c < total; ++c) {
    Vector dir(spec.feature_dim);
    for (Index j = 0; j < dir.size(); ++j) dir(j) = rng.normal();
    means.row(c) = spec.mean_separation * dir.normalized().transpose();
  }
  return means;
}

}  // namespace

std::vector<DomainTask> synth_domain_suite(const SyntheticSuiteSpec& spec) {
  if (spec.num_domains < 1 || spec.classes_per_domain < 1 || spec.nodes_per_class < 1 ||
      spec.feature_dim < 1) {
    throw ValidationError("synth_domain_suite: all counts must be >= 1");
  }
  if (!(spec.p_in >= 0 && spec.p_in <= 1) || !(spec.p_out >= 0 && spec.p_out <= 1)) {
    throw ValidationError("synth_domain_suite: edge probabilities must lie in [0, 1]");
  }
  const Rng root(spec.seed);
  const Matrix means = class_means(spec, root.split("class-means"));
  const int C = spec.classes_per_domain;
  const Index n = static_cast<Index>(C) * spec.nodes_per_class;

  std::vector<DomainTask> suite;
  suite.reserve(static_cast<std::size_t>(spec.num_domains));
  for (int d = 0; d < spec.num_domains; ++d) {
    const Rng dom = root.split("domain").split(static_cast<std::uint64_t>(d));
    DomainTask task;
    task.domain_id = d;
    task.class_block = {d * C, (d + 1) * C};

    Graph& g = task.graph;
    g.name = "synthetic-" + std::to_string(d);
    g.num_nodes = n;
    g.num_classes = C;
    g.labels.resize(static_cast<std::size_t>(n));
    g.split.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) g.labels[static_cast<std::size_t>(i)] = static_cast<int>(i / spec.nodes_per_class);

    Rng feat_rng = dom.split("features");
    g.features.resize(n, spec.feature_dim);
    for (Index i = 0; i < n; ++i) {
      const int global = d * C + g.labels[static_cast<std::size_t>(i)];
      for (Index j = 0; j < spec.feature_dim; ++j) {
        g.features(i, j) = means(global, j) + feat_rng.normal();
      }
    }

    Rng edge_rng = dom.split("edges");
    for (Index u = 0; u < n; ++u) {
      for (Index v = u + 1; v < n; ++v) {
        const bool same = g.labels[static_cast<std::size_t>(u)] == g.labels[static_cast<std::size_t>(v)];
        if (edge_rng.bernoulli(same ? spec.p_in : spec.p_out)) g.edges.emplace_back(u, v);
      }
    }

    // Stratified 60/20/20 split.
    Rng split_rng = dom.split("split");
    for (int c = 0; c < C; ++c) {
      std::vector<Index> members;
      for (Index i = 0; i < spec.nodes_per_class; ++i) members.push_back(c * spec.nodes_per_class + i);
      shuffle(members, split_rng);
      const auto m = members.size();
      const auto n_train = static_cast<std::size_t>(std::llround(0.6 * static_cast<double>(m)));
      const auto n_val = static_cast<std::size_t>(std::llround(0.2 * static_cast<double>(m)));
      for (std::size_t k = 0; k < m; ++k) {
        Split s = k < n_train ? Split::kTrain : (k < n_train + n_val ? Split::kVal : Split::kTest);
        g.split[static_cast<std::size_t>(members[k])] = s;
      }
    }
    suite.push_back(std::move(task));
  }
  return suite;
}

}  // namespace gk
