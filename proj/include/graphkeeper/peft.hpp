#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "graphkeeper/adapter.hpp"
#include "graphkeeper/backbone.hpp"
#include "graphkeeper/disentangle.hpp"
#include "graphkeeper/graph.hpp"

namespace gk {

// W_down entries ~ N(0, 1/r), W_up = 0, so the adapted
// model starts exactly at the backbone.
LoraAdapter init_adapter(const BackboneParams& backbone, Index rank, int domain_id, Rng rng);

// Single-writer map domain_id -> frozen adapter.
class AdapterRegistry {
 public:
  // Opens the training slot for a new domain; only one may be open.
  void begin_training(int domain_id);
  // Closes the open slot with its trained, frozen adapter.
  void commit(LoraAdapter adapter);
  // Restores a frozen adapter (checkpoint loading).
  void insert_frozen(LoraAdapter adapter);

  bool contains(int domain_id) const { return adapters_.count(domain_id) > 0; }
  const LoraAdapter& at(int domain_id) const;
  const std::map<int, LoraAdapter>& adapters() const { return adapters_; }
  std::optional<int> training() const { return training_; }

 private:
  std::map<int, LoraAdapter> adapters_;
  std::optional<int> training_;
};

struct DisentangleConfig {
  Index rank = 16;
  int epochs = 200;
  double learning_rate = 5e-2;
  double weight_decay = 5e-4;
  double gamma1 = 1.0;
  double gamma2 = 0.1;
  double epsilon = 1e-8;
  double mask_rate = 0.2;
  double drop_rate = 0.2;
  std::uint64_t seed = 0;
};

// One view of a graph ready for propagation.
struct GraphView {
  SparseMatrix adj;
  Matrix features;
};

GraphView make_view(const Graph& g);

struct ObjectiveEval {
  LossReport loss;        // on the training rows
  BackboneGrads grads;    // summed over both views
};

// Weighted intra/inter objective on the train-split rows of both views and
// its gradient w.r.t. backbone and (when given) adapter parameters.
ObjectiveEval evaluate_objective(const GraphView& original, const GraphView& augmented,
                                 const std::vector<Index>& train_nodes, const std::vector<int>& train_labels,
                                 const BackboneParams& backbone, const LoraAdapter* adapter,
                                 const Matrix& prototypes, const DisentangleConfig& cfg);

struct AdapterTraining {
  LoraAdapter adapter;         // frozen
  std::vector<double> losses;  // objective per epoch, before the update
};

// Trains a fresh adapter for task against the frozen backbone.
AdapterTraining train_adapter(const DomainTask& task, const BackboneParams& backbone,
                              const PrototypeSet& prototypes, const DisentangleConfig& cfg);

// Ablation without adapters: trains the shared backbone weights themselves
// with the same objective. Returns the updated (unfrozen) backbone.
struct BackboneTraining {
  BackboneParams backbone;
  std::vector<double> losses;
};
BackboneTraining finetune_backbone(const DomainTask& task, const BackboneParams& backbone,
                                   const PrototypeSet& prototypes, const DisentangleConfig& cfg);

}  // namespace gk
