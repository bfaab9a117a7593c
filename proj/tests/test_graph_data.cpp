#include <doctest.h>

#include <cmath>
#include <fstream>
#include <set>

#include "graphkeeper/graph.hpp"
#include "scratch_dir.hpp"
#include "test_util.hpp"

using namespace gk;

namespace {

Graph path_graph(Index n, Index d = 2) {
  Graph g;
  g.name = "path";
  g.num_nodes = n;
  g.num_classes = 2;
  for (Index i = 0; i + 1 < n; ++i) g.edges.emplace_back(i, i + 1);
  g.features = test::random_matrix(n, d, 3);
  for (Index i = 0; i < n; ++i) {
    g.labels.push_back(static_cast<int>(i % 2));
    g.split.push_back(i % 3 == 0 ? Split::kTest : Split::kTrain);
  }
  return g;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

const std::string kFixtures = GK_FIXTURE_DIR;

}  // namespace

TEST_CASE("normalized_adjacency: small graphs") {
  Graph one = path_graph(1);
  CHECK(Matrix(normalized_adjacency(one)) == Matrix::Ones(1, 1));

  Graph two = path_graph(2);
  CHECK((Matrix(normalized_adjacency(two)) - Matrix::Constant(2, 2, 0.5)).cwiseAbs().maxCoeff() < 1e-15);

  Graph tri = path_graph(3);
  tri.edges = {{0, 1}, {0, 2}, {1, 2}};
  CHECK((Matrix(normalized_adjacency(tri)) - Matrix::Constant(3, 3, 1.0 / 3)).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("normalized_adjacency: symmetric, isolated rows are basis vectors") {
  Graph g = path_graph(8);
  g.edges = {{0, 1}, {1, 2}, {2, 5}, {0, 5}};  // 3, 4, 6, 7 isolated
  const Matrix a = normalized_adjacency(g);
  CHECK((a - a.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
  for (Index i : {3, 4, 6, 7}) {
    Matrix e = Matrix::Zero(1, 8);
    e(0, i) = 1.0;
    CHECK(a.row(i) == e);
  }
  // Spectrum of the symmetric normalisation lies in (-1, 1].
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  CHECK(es.eigenvalues().maxCoeff() <= 1.0 + 1e-12);
  CHECK(es.eigenvalues().minCoeff() > -1.0);
}

TEST_CASE("align_features: examples") {
  Matrix f(2, 2);
  f << 2, 0, 0, 1;
  const Matrix a = align_features(f, 1);
  REQUIRE(a.rows() == 2);
  REQUIRE(a.cols() == 1);
  CHECK(a(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(std::abs(a(1, 0)) < 1e-14);

  const Matrix full = test::random_matrix(10, 6, 2);
  CHECK(std::abs(align_features(full, 6).norm() - full.norm()) <= 1e-8);

  const Matrix narrow = test::random_matrix(5, 2, 4);
  const Matrix padded = align_features(narrow, 4);
  CHECK(padded.leftCols(2) == narrow);
  CHECK(padded.rightCols(2) == Matrix::Zero(5, 2));
}

TEST_CASE("align_features: retained energy equals top singular values") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Matrix f = test::random_matrix(30, 12, 50 + seed);
    for (Index k : {1, 4, 12}) {
      const auto svd = truncated_svd(f, 12);
      const double expected = svd.S.head(k).squaredNorm();
      CHECK(std::abs(align_features(f, k).squaredNorm() - expected) <= 1e-8);
    }
  }
}

TEST_CASE("fit_alignment reproduces align_features") {
  const Matrix f = test::random_matrix(20, 9, 7);
  const FeatureAlignment al = fit_alignment(f, 5);
  CHECK(al.input_dim() == 9);
  CHECK(al.output_dim() == 5);
  CHECK((al.apply(f) - align_features(f, 5)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(al.apply(test::random_matrix(3, 4, 1)), ValidationError);
}

TEST_CASE("augment: rates and purity") {
  Graph g = path_graph(100, 10);
  CHECK(augment(g, 0.0, 0.0, Rng(1)) == g);
  CHECK(augment(g, 0.0, 1.0, Rng(1)).edges.empty());

  const Graph a = augment(g, 0.5, 0.3, Rng(9));
  const Graph b = augment(g, 0.5, 0.3, Rng(9));
  CHECK(a == b);
  CHECK(a.num_nodes == g.num_nodes);
  CHECK(a.labels == g.labels);
  CHECK(a.split == g.split);

  const auto zeroed = (a.features.array() == 0.0).count();
  // Binomial(1000, 0.5): mean 500, sigma ~ 15.8.
  CHECK(std::abs(static_cast<double>(zeroed) - 500.0) <= 3 * std::sqrt(250.0));
  for (const auto& e : a.edges) CHECK(std::find(g.edges.begin(), g.edges.end(), e) != g.edges.end());
  CHECK_THROWS_AS(augment(g, 1.5, 0.0, Rng(1)), ValidationError);
}

TEST_CASE("augment: self-loops survive full edge drop") {
  Graph g = path_graph(4);
  const Matrix a = normalized_adjacency(augment(g, 0.0, 1.0, Rng(2)));
  CHECK(a == Matrix::Identity(4, 4));
}

TEST_CASE("synth_domain_suite: blocks, determinism, homophily") {
  SyntheticSuiteSpec spec;
  const auto suite = synth_domain_suite(spec);
  REQUIRE(suite.size() == 4);
  for (int d = 0; d < 4; ++d) {
    CHECK(suite[d].domain_id == d);
    CHECK(suite[d].class_block == ClassBlock{3 * d, 3 * d + 3});
    CHECK(suite[d].graph.num_nodes == 180);
    CHECK(suite[d].graph.feature_dim() == 32);
    suite[d].graph.validate();
    for (int e = 0; e < d; ++e) CHECK_FALSE(suite[d].class_block.overlaps(suite[e].class_block));
  }

  const auto again = synth_domain_suite(spec);
  for (int d = 0; d < 4; ++d) CHECK(suite[d].graph == again[d].graph);

  SyntheticSuiteSpec other = spec;
  other.seed = 1;
  CHECK_FALSE(synth_domain_suite(other)[0].graph == suite[0].graph);

  spec.p_in = 0.2;
  spec.p_out = 0.02;
  spec.num_domains = 1;
  const Graph g = synth_domain_suite(spec)[0].graph;
  std::size_t intra = 0;
  for (const auto& [u, v] : g.edges) intra += g.labels[u] == g.labels[v];
  const double intra_pairs = 3.0 * 60 * 59 / 2, inter_pairs = 3.0 * 60 * 60;
  CHECK(intra / intra_pairs > (g.edges.size() - intra) / inter_pairs);
}

TEST_CASE("synth_domain_suite: split is stratified 60/20/20") {
  const Graph g = synth_domain_suite({})[0].graph;
  for (int c = 0; c < 3; ++c) {
    int counts[3] = {0, 0, 0};
    for (Index i = 0; i < g.num_nodes; ++i)
      if (g.labels[i] == c) ++counts[static_cast<int>(g.split[i])];
    CHECK(counts[0] == 36);
    CHECK(counts[1] == 12);
    CHECK(counts[2] == 12);
  }
}

TEST_CASE("dataset round trip is exact") {
  test::ScratchDir dir;
  SyntheticSuiteSpec spec;
  spec.nodes_per_class = 10;
  for (const auto& task : synth_domain_suite(spec)) {
    const std::string path = dir.str("d" + std::to_string(task.domain_id));
    save_dataset(task.graph, path);
    CHECK(load_dataset(path) == task.graph);
  }
  Graph g = path_graph(5);
  g.labels[2] = kNoLabel;
  g.split[1] = Split::kVal;
  g.features(0, 0) = 1e-300;
  g.features(1, 1) = -0.1;
  save_dataset(g, dir.str("unlabeled"));
  CHECK(load_dataset(dir.str("unlabeled")) == g);
}

TEST_CASE("bundled fixture parses with the declared counts") {
  const Graph g = load_dataset(kFixtures + "/tiny6");
  CHECK(g.num_nodes == 6);
  CHECK(g.edges.size() == 7);
  CHECK(g.num_classes == 3);
  CHECK(g.feature_dim() == 3);
  CHECK(g.labels[5] == kNoLabel);
  CHECK(g.nodes_in(Split::kTrain) == std::vector<Index>{0, 2, 4});
}

TEST_CASE("load_dataset: descriptive errors") {
  test::ScratchDir dir;
  save_dataset(path_graph(10), dir.str("g"));
  const std::string edges = dir.str("g/edges.tsv");

  write_file(edges, "0\t1\n3\t999\n");
  try {
    load_dataset(dir.str("g"));
    FAIL("expected DataError");
  } catch (const DataError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("edges.tsv:2") != std::string::npos);
    CHECK(msg.find("999") != std::string::npos);
  }

  write_file(edges, "1\t0\n");
  CHECK_THROWS_AS(load_dataset(dir.str("g")), DataError);
  write_file(edges, "0\t2\n0\t1\n");
  CHECK_THROWS_AS(load_dataset(dir.str("g")), DataError);
  write_file(edges, "0\tx\n");
  CHECK_THROWS_AS(load_dataset(dir.str("g")), DataError);

  save_dataset(path_graph(10), dir.str("h"));
  const std::string nodes = dir.str("h/nodes.tsv");
  write_file(nodes, "0\t7\ttrain\t0\t0\n");
  try {
    load_dataset(dir.str("h"));
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("nodes.tsv:1") != std::string::npos);
  }

  CHECK_THROWS_AS(load_dataset(dir.str("missing")), DataError);
}

TEST_CASE("Graph::validate and induced_subgraph") {
  Graph g = path_graph(6);
  g.validate();
  Graph bad = g;
  bad.edges.emplace_back(2, 9);
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = g;
  bad.labels[0] = 5;
  CHECK_THROWS_AS(bad.validate(), ValidationError);

  const Graph sub = induced_subgraph(g, {4, 3, 0});
  CHECK(sub.num_nodes == 3);
  CHECK(sub.edges == std::vector<Edge>{{0, 1}});
  CHECK(sub.features.row(0) == g.features.row(4));
  CHECK(sub.labels == std::vector<int>{0, 1, 0});

  CHECK(canonical_edges({{3, 1}, {1, 3}, {2, 2}, {0, 4}}) == std::vector<Edge>{{0, 4}, {1, 3}});
  CHECK(parse_split("val") == Split::kVal);
  CHECK_THROWS_AS(parse_split("dev"), ValidationError);
}
