#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "graphkeeper/adapter.hpp"
#include "graphkeeper/graph.hpp"

namespace gk {

// Two-layer graph convolution: X = A relu(A F W1) W2.
struct BackboneParams {
  Matrix w1;  // in x hidden
  Matrix w2;  // hidden x hidden
  bool frozen = false;

  Index input_dim() const { return w1.rows(); }
  Index hidden_dim() const { return w1.cols(); }
  Index parameter_count() const { return w1.size() + w2.size(); }
};

// Glorot-uniform initialisation of both layers.
BackboneParams init_backbone(Index input_dim, Index hidden_dim, Rng rng);

// Intermediates cached by forward() for exactly one backward() call.
class Tape {
 public:
  bool consumed() const { return consumed_; }

 private:
  friend struct TapeAccess;
  SparseMatrix adj_;
  Matrix af_;       // A F
  Matrix z1_;       // A F W1eff
  Matrix h1_;       // relu(z1)
  Matrix ah1_;      // A h1
  Matrix w2_eff_;
  std::optional<LoraAdapter> adapter_;
  bool consumed_ = false;
};

struct ForwardResult {
  Matrix embeddings;  // n x hidden
  Tape tape;
};

struct BackboneGrads {
  Matrix w1;
  Matrix w2;
  std::optional<AdapterGrads> adapter;
};

// Adapted forward pass. With an adapter each layer uses W + down*up before
// the (single) nonlinearity; without one the adapter branch is absent.
ForwardResult forward(const SparseMatrix& adj, const Matrix& features,
                      const BackboneParams& params, const LoraAdapter* adapter = nullptr);

// Embeddings only, no tape.
Matrix embed(const SparseMatrix& adj, const Matrix& features, const BackboneParams& params,
             const LoraAdapter* adapter = nullptr);

// Reverse pass for dL/dX. Throws ContractError when the tape was already used.
BackboneGrads backward(Tape& tape, const Matrix& grad_embeddings);

struct PretrainConfig {
  Index hidden_dim = 64;
  int epochs = 200;
  double learning_rate = 5e-2;
  double weight_decay = 5e-4;
  std::uint64_t seed = 0;
};

struct PretrainResult {
  BackboneParams params;       // frozen
  std::vector<double> losses;  // one entry per epoch, before that epoch's update
};

// Link-prediction pretraining: BCE on sigmoid(x_u . x_v) over every edge and
// one uniformly drawn node pair per edge, resampled each epoch.
PretrainResult pretrain_link_prediction(const Graph& g, const PretrainConfig& cfg);

// Mean BCE of the link objective for fixed pairs; exposed for tests.
double link_prediction_loss(const Matrix& embeddings, const std::vector<Edge>& positives,
                            const std::vector<Edge>& negatives, Matrix* grad = nullptr);

}  // namespace gk
