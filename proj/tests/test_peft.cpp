#include <doctest.h>

#include "graphkeeper/peft.hpp"
#include "test_util.hpp"

using namespace gk;

namespace {

DomainTask small_task(int domain_id, int classes, int per_class, Index dim, std::uint64_t seed) {
  SyntheticSuiteSpec spec;
  spec.num_domains = 1;
  spec.classes_per_domain = classes;
  spec.nodes_per_class = per_class;
  spec.feature_dim = static_cast<int>(dim);
  spec.mean_separation = 3.0;
  spec.p_in = 0.2;
  spec.p_out = 0.02;
  spec.seed = seed;
  DomainTask t = synth_domain_suite(spec)[0];
  t.domain_id = domain_id;
  return t;
}

BackboneParams frozen_backbone(Index in, Index hidden, std::uint64_t seed) {
  BackboneParams p = init_backbone(in, hidden, Rng(seed));
  p.frozen = true;
  return p;
}

DisentangleConfig quick_config(int epochs) {
  DisentangleConfig cfg;
  cfg.rank = 4;
  cfg.epochs = epochs;
  return cfg;
}

}  // namespace

TEST_CASE("init_adapter: zero-init identity, shapes, determinism") {
  const BackboneParams p = init_backbone(64, 32, Rng(1));
  const LoraAdapter a = init_adapter(p, 8, 3, Rng(2));
  CHECK(a.domain_id == 3);
  CHECK(a.rank == 8);
  CHECK(a.down[0].rows() == 64);
  CHECK(a.down[0].cols() == 8);
  CHECK(a.up[0].rows() == 8);
  CHECK(a.up[0].cols() == 32);
  CHECK(a.down[1].rows() == 32);
  CHECK(a.up[1].cols() == 32);
  CHECK(a.up[0].isZero(0.0));
  CHECK(a.up[1].isZero(0.0));
  CHECK_FALSE(a.frozen);
  CHECK(test::bit_equal(a.down[0], init_adapter(p, 8, 3, Rng(2)).down[0]));
  CHECK(a.parameter_count() == 8 * (64 + 32) + 8 * (32 + 32));
  CHECK(a.parameter_count() < p.parameter_count());

  // Empirical scale of W_down is 1/sqrt(r).
  const double var = a.down[0].squaredNorm() / static_cast<double>(a.down[0].size());
  CHECK(var == doctest::Approx(1.0 / 8).epsilon(0.15));

  const DomainTask t = small_task(0, 2, 10, 64, 4);
  const SparseMatrix adj = normalized_adjacency(t.graph);
  CHECK(test::bit_equal(embed(adj, t.graph.features, p), embed(adj, t.graph.features, p, &a)));

  CHECK_THROWS_AS(init_adapter(p, 0, 0, Rng(1)), ValidationError);
  CHECK_THROWS_AS(init_adapter(p, 32, 0, Rng(1)), ValidationError);
}

TEST_CASE("default configuration trains fewer parameters than the backbone") {
  const BackboneParams p = init_backbone(64, 64, Rng(0));
  const LoraAdapter a = init_adapter(p, DisentangleConfig{}.rank, 0, Rng(0));
  CHECK(a.parameter_count() == 16 * (64 + 64) * 2);
  CHECK(a.parameter_count() < p.parameter_count());
}

TEST_CASE("registry: lifecycle contract") {
  const BackboneParams p = init_backbone(8, 6, Rng(1));
  AdapterRegistry reg;
  reg.begin_training(0);
  CHECK(reg.training() == 0);
  CHECK_THROWS_AS(reg.begin_training(1), ContractError);

  LoraAdapter a = init_adapter(p, 2, 0, Rng(1));
  CHECK_THROWS_AS(reg.commit(a), ContractError);  // not frozen
  a.frozen = true;
  LoraAdapter wrong = a;
  wrong.domain_id = 5;
  CHECK_THROWS_AS(reg.commit(wrong), ContractError);
  reg.commit(a);
  CHECK_FALSE(reg.training().has_value());
  CHECK(reg.contains(0));
  CHECK_THROWS_AS(reg.begin_training(0), ValidationError);
  CHECK_THROWS_AS(reg.at(7), ValidationError);
  CHECK_THROWS_AS(reg.insert_frozen(a), ValidationError);
}

TEST_CASE("train_adapter: zero epochs returns the frozen initialisation") {
  const DomainTask t = small_task(2, 2, 10, 8, 1);
  const BackboneParams p = frozen_backbone(8, 6, 2);
  const DisentangleConfig cfg = quick_config(0);
  const AdapterTraining r = train_adapter(t, p, {}, cfg);
  CHECK(r.adapter.frozen);
  CHECK(r.losses.empty());
  const LoraAdapter init = init_adapter(p, 4, 2, Rng(cfg.seed).split("adapter").split(2).split("init"));
  for (int l = 0; l < 2; ++l) {
    CHECK(test::bit_equal(r.adapter.down[l], init.down[l]));
    CHECK(test::bit_equal(r.adapter.up[l], init.up[l]));
  }
}

TEST_CASE("train_adapter: contract checks") {
  const DomainTask t = small_task(0, 2, 10, 8, 1);
  BackboneParams p = frozen_backbone(8, 6, 2);
  p.frozen = false;
  CHECK_THROWS_AS(train_adapter(t, p, {}, quick_config(1)), ContractError);
  CHECK_THROWS_AS(train_adapter(t, frozen_backbone(9, 6, 2), {}, quick_config(1)), ValidationError);
}

TEST_CASE("train_adapter: loss decreases, backbone untouched") {
  const DomainTask t = small_task(0, 2, 20, 16, 3);
  const BackboneParams p = frozen_backbone(16, 12, 4);
  const BackboneParams before = p;
  DisentangleConfig cfg = quick_config(60);
  cfg.gamma2 = 0.0;
  const AdapterTraining r = train_adapter(t, p, {}, cfg);
  REQUIRE(r.losses.size() == 60);
  CHECK(r.losses.back() < r.losses.front());
  CHECK(test::bit_equal(p.w1, before.w1));
  CHECK(test::bit_equal(p.w2, before.w2));
  CHECK(r.adapter.up[0].norm() > 0.0);

  // Reproducible for a fixed seed.
  const AdapterTraining again = train_adapter(t, p, {}, cfg);
  CHECK(again.losses == r.losses);
  CHECK(test::bit_equal(again.adapter.up[1], r.adapter.up[1]));
}

TEST_CASE("evaluate_objective: adapter gradients match finite differences") {
  const DomainTask t = small_task(0, 2, 4, 5, 6);
  const BackboneParams p = frozen_backbone(5, 8, 7);
  DisentangleConfig cfg = quick_config(1);
  cfg.rank = 2;
  LoraAdapter a = init_adapter(p, 2, 0, Rng(8));
  Rng fill(9);
  a.up[0] = gaussian_matrix(2, 8, fill, 0.3);
  a.up[1] = gaussian_matrix(2, 8, fill, 0.3);

  const GraphView orig = make_view(t.graph);
  const GraphView aug = make_view(augment(t.graph, 0.2, 0.2, Rng(10)));
  std::vector<Index> nodes;
  std::vector<int> labels;
  for (Index i : t.graph.nodes_in(Split::kTrain)) {
    nodes.push_back(i);
    labels.push_back(t.graph.labels[i]);
  }
  const Matrix protos = test::random_matrix(3, 8, 11);
  const auto loss = [&] { return evaluate_objective(orig, aug, nodes, labels, p, &a, protos, cfg).loss.total; };
  const ObjectiveEval e = evaluate_objective(orig, aug, nodes, labels, p, &a, protos, cfg);
  CHECK(e.loss.total == doctest::Approx(cfg.gamma1 * e.loss.intra + cfg.gamma2 * e.loss.inter).epsilon(1e-12));
  for (int l = 0; l < 2; ++l) {
    CHECK(test::check_gradient(a.down[l], e.grads.adapter->down[l], loss).ok());
    CHECK(test::check_gradient(a.up[l], e.grads.adapter->up[l], loss).ok());
  }
  BackboneParams q = p;
  const auto bloss = [&] { return evaluate_objective(orig, aug, nodes, labels, q, &a, protos, cfg).loss.total; };
  CHECK(test::check_gradient(q.w1, e.grads.w1, bloss).ok());
  CHECK(test::check_gradient(q.w2, e.grads.w2, bloss).ok());
}

TEST_CASE("parameter isolation across domains") {
  const BackboneParams p = frozen_backbone(8, 16, 1);
  const DomainTask d0 = small_task(0, 2, 10, 8, 20);
  const DomainTask d1 = small_task(1, 2, 10, 8, 21);
  AdapterRegistry reg;
  reg.begin_training(0);
  reg.commit(train_adapter(d0, p, {}, quick_config(10)).adapter);

  const SparseMatrix adj0 = normalized_adjacency(d0.graph);
  const Matrix x0 = embed(adj0, d0.graph.features, p, &reg.at(0));
  const LoraAdapter a0 = reg.at(0);

  reg.begin_training(1);
  reg.commit(train_adapter(d1, p, {}, quick_config(10)).adapter);
  for (int l = 0; l < 2; ++l) {
    CHECK(test::bit_equal(reg.at(0).down[l], a0.down[l]));
    CHECK(test::bit_equal(reg.at(0).up[l], a0.up[l]));
  }
  CHECK(test::bit_equal(embed(adj0, d0.graph.features, p, &reg.at(0)), x0));
  CHECK(reg.adapters().size() == 2);
}

TEST_CASE("finetune_backbone changes the shared weights") {
  const DomainTask t = small_task(0, 2, 10, 8, 1);
  const BackboneParams p = frozen_backbone(8, 16, 2);
  const BackboneTraining r = finetune_backbone(t, p, {}, quick_config(5));
  CHECK_FALSE(r.backbone.frozen);
  CHECK(r.losses.size() == 5);
  CHECK((r.backbone.w1 - p.w1).norm() > 0.0);
}
