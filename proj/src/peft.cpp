#include "graphkeeper/peft.hpp"

#include <cmath>

#include "graphkeeper/optim.hpp"

namespace gk {

LoraAdapter init_adapter(const BackboneParams& backbone, Index rank, int domain_id, Rng rng) {
  const Index limit = std::min({backbone.w1.rows(), backbone.w1.cols(), backbone.w2.rows(), backbone.w2.cols()});
  if (rank < 1 || rank >= limit) {
    throw ValidationError("init_adapter: rank " + std::to_string(rank) + " must lie in [1, " +
                          std::to_string(limit) + ")");
  }
  LoraAdapter a;
  a.domain_id = domain_id;
  a.rank = rank;
  const double scale = 1.0 / std::sqrt(static_cast<double>(rank));
  const Matrix* w[2] = {&backbone.w1, &backbone.w2};
  for (int l = 0; l < 2; ++l) {
    Rng r = rng.split(static_cast<std::uint64_t>(l));
    a.down[l] = gaussian_matrix(w[l]->rows(), rank, r, scale);
    a.up[l] = Matrix::Zero(rank, w[l]->cols());
  }
  return a;
}

void AdapterRegistry::begin_training(int domain_id) {
  if (training_) {
    throw ContractError("adapter registry: domain " + std::to_string(*training_) +
                        " is still training; one adapter trains at a time");
  }
  if (contains(domain_id)) throw ValidationError("adapter registry: domain " + std::to_string(domain_id) + " exists");
  training_ = domain_id;
}

void AdapterRegistry::commit(LoraAdapter adapter) {
  if (!training_ || *training_ != adapter.domain_id) {
    throw ContractError("adapter registry: no open training slot for domain " + std::to_string(adapter.domain_id));
  }
  if (!adapter.frozen) throw ContractError("adapter registry: committed adapter must be frozen");
  adapters_.emplace(adapter.domain_id, std::move(adapter));
  training_.reset();
}

void AdapterRegistry::insert_frozen(LoraAdapter adapter) {
  if (!adapter.frozen) throw ContractError("adapter registry: inserted adapter must be frozen");
  if (contains(adapter.domain_id)) {
    throw ValidationError("adapter registry: domain " + std::to_string(adapter.domain_id) + " exists");
  }
  adapters_.emplace(adapter.domain_id, std::move(adapter));
}

const LoraAdapter& AdapterRegistry::at(int domain_id) const {
  auto it = adapters_.find(domain_id);
  if (it == adapters_.end()) throw ValidationError("adapter registry: no adapter for domain " + std::to_string(domain_id));
  return it->second;
}

GraphView make_view(const Graph& g) { return {normalized_adjacency(g), g.features}; }

namespace {

Matrix gather_rows(const Matrix& m, const std::vector<Index>& rows) {
  Matrix out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = m.row(rows[i]);
  return out;
}

Matrix scatter_rows(const Matrix& part, const std::vector<Index>& rows, Index n) {
  Matrix out = Matrix::Zero(n, part.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(rows[i]) = part.row(static_cast<Index>(i));
  return out;
}

struct TrainingData {
  GraphView original;
  std::vector<Index> train_nodes;
  std::vector<int> train_labels;
};

TrainingData prepare(const DomainTask& task, const BackboneParams& backbone) {
  const Graph& g = task.graph;
  g.validate();
  if (g.feature_dim() != backbone.input_dim()) {
    throw ValidationError("domain " + std::to_string(task.domain_id) + ": feature width " +
                          std::to_string(g.feature_dim()) + " != backbone input width " +
                          std::to_string(backbone.input_dim()));
  }
  TrainingData d{make_view(g), {}, {}};
  for (Index i : g.nodes_in(Split::kTrain)) {
    const int y = g.labels[static_cast<std::size_t>(i)];
    if (y == kNoLabel) continue;
    d.train_nodes.push_back(i);
    d.train_labels.push_back(y);
  }
  if (d.train_nodes.empty()) {
    throw ValidationError("domain " + std::to_string(task.domain_id) + ": no labeled training nodes");
  }
  return d;
}

void check_config(const DisentangleConfig& cfg) {
  if (cfg.epochs < 0) throw ValidationError("disentangle config: negative epoch count");
  if (cfg.gamma1 < 0 || cfg.gamma2 < 0) throw ValidationError("disentangle config: negative loss weight");
  if (!(cfg.epsilon > 0)) throw ValidationError("disentangle config: epsilon must be positive");
}

}  // namespace

ObjectiveEval evaluate_objective(const GraphView& original, const GraphView& augmented,
                                 const std::vector<Index>& train_nodes, const std::vector<int>& train_labels,
                                 const BackboneParams& backbone, const LoraAdapter* adapter,
                                 const Matrix& prototypes, const DisentangleConfig& cfg) {
  auto fx = forward(original.adj, original.features, backbone, adapter);
  auto fa = forward(augmented.adj, augmented.features, backbone, adapter);
  const Index n = fx.embeddings.rows();

  ObjectiveEval out;
  out.loss = total_loss(gather_rows(fx.embeddings, train_nodes), gather_rows(fa.embeddings, train_nodes),
                        train_labels, prototypes, cfg.gamma1, cfg.gamma2, cfg.epsilon);
  BackboneGrads gx = backward(fx.tape, scatter_rows(out.loss.grad_x, train_nodes, n));
  const BackboneGrads ga = backward(fa.tape, scatter_rows(out.loss.grad_xaug, train_nodes, n));
  gx.w1 += ga.w1;
  gx.w2 += ga.w2;
  if (gx.adapter) {
    for (int l = 0; l < 2; ++l) {
      gx.adapter->down[l] += ga.adapter->down[l];
      gx.adapter->up[l] += ga.adapter->up[l];
    }
  }
  out.grads = std::move(gx);
  return out;
}

AdapterTraining train_adapter(const DomainTask& task, const BackboneParams& backbone,
                              const PrototypeSet& prototypes, const DisentangleConfig& cfg) {
  if (!backbone.frozen) throw ContractError("train_adapter: backbone must be frozen");
  check_config(cfg);
  const TrainingData data = prepare(task, backbone);
  const Rng root = Rng(cfg.seed).split("adapter").split(static_cast<std::uint64_t>(task.domain_id));

  AdapterTraining out;
  out.adapter = init_adapter(backbone, cfg.rank, task.domain_id, root.split("init"));
  const Matrix protos = prototypes.as_matrix(backbone.hidden_dim());
  Adam adam({.learning_rate = cfg.learning_rate, .weight_decay = cfg.weight_decay});
  const Rng aug_root = root.split("augment");

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const Graph aug = augment(task.graph, cfg.mask_rate, cfg.drop_rate, aug_root.split(static_cast<std::uint64_t>(epoch)));
    const ObjectiveEval eval = evaluate_objective(data.original, make_view(aug), data.train_nodes, data.train_labels,
                                                  backbone, &out.adapter, protos, cfg);
    out.losses.push_back(eval.loss.total);
    const AdapterGrads& g = *eval.grads.adapter;
    LoraAdapter& a = out.adapter;
    adam.step({&a.down[0], &a.up[0], &a.down[1], &a.up[1]}, {&g.down[0], &g.up[0], &g.down[1], &g.up[1]});
  }
  out.adapter.frozen = true;
  return out;
}

BackboneTraining finetune_backbone(const DomainTask& task, const BackboneParams& backbone,
                                   const PrototypeSet& prototypes, const DisentangleConfig& cfg) {
  check_config(cfg);
  const TrainingData data = prepare(task, backbone);
  const Rng root = Rng(cfg.seed).split("shared-backbone").split(static_cast<std::uint64_t>(task.domain_id));

  BackboneTraining out{backbone, {}};
  out.backbone.frozen = false;
  const Matrix protos = prototypes.as_matrix(backbone.hidden_dim());
  Adam adam({.learning_rate = cfg.learning_rate, .weight_decay = cfg.weight_decay});
  const Rng aug_root = root.split("augment");
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const Graph aug = augment(task.graph, cfg.mask_rate, cfg.drop_rate, aug_root.split(static_cast<std::uint64_t>(epoch)));
    const ObjectiveEval eval = evaluate_objective(data.original, make_view(aug), data.train_nodes, data.train_labels,
                                                  out.backbone, nullptr, protos, cfg);
    out.losses.push_back(eval.loss.total);
    adam.step({&out.backbone.w1, &out.backbone.w2}, {&eval.grads.w1, &eval.grads.w2});
  }
  return out;
}

}  // namespace gk
