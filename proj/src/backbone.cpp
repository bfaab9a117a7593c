#include "graphkeeper/backbone.hpp"

#include <cmath>

#include "graphkeeper/optim.hpp"

namespace gk {

struct TapeAccess {
  static SparseMatrix& adj(Tape& t) { return t.adj_; }
  static Matrix& af(Tape& t) { return t.af_; }
  static Matrix& z1(Tape& t) { return t.z1_; }
  static Matrix& h1(Tape& t) { return t.h1_; }
  static Matrix& ah1(Tape& t) { return t.ah1_; }
  static Matrix& w2_eff(Tape& t) { return t.w2_eff_; }
  static std::optional<LoraAdapter>& adapter(Tape& t) { return t.adapter_; }
  static bool& consumed(Tape& t) { return t.consumed_; }
};

namespace {

void check_shapes(const SparseMatrix& adj, const Matrix& features, const BackboneParams& params,
                  const LoraAdapter* adapter) {
  if (adj.rows() != adj.cols() || adj.rows() != features.rows()) {
    throw ValidationError("forward: adjacency is " + std::to_string(adj.rows()) + "x" +
                          std::to_string(adj.cols()) + " but features have " +
                          std::to_string(features.rows()) + " rows");
  }
  if (features.cols() != params.w1.rows()) {
    throw ValidationError("forward: feature width " + std::to_string(features.cols()) +
                          " != backbone input width " + std::to_string(params.w1.rows()));
  }
  if (params.w2.rows() != params.w1.cols()) throw ValidationError("forward: W1/W2 shapes disagree");
  if (adapter) {
    for (int l = 0; l < 2; ++l) {
      const Matrix& w = l == 0 ? params.w1 : params.w2;
      if (adapter->down[l].rows() != w.rows() || adapter->up[l].cols() != w.cols() ||
          adapter->down[l].cols() != adapter->up[l].rows()) {
        throw ValidationError("forward: adapter layer " + std::to_string(l + 1) +
                              " does not match backbone shape");
      }
    }
  }
}

Matrix effective(const Matrix& w, const LoraAdapter* adapter, int layer) {
  if (!adapter) return w;
  return w + adapter->down[layer] * adapter->up[layer];
}

double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

BackboneParams init_backbone(Index input_dim, Index hidden_dim, Rng rng) {
  if (input_dim < 1 || hidden_dim < 1) throw ValidationError("init_backbone: dimensions must be >= 1");
  BackboneParams p;
  const double a1 = std::sqrt(6.0 / static_cast<double>(input_dim + hidden_dim));
  const double a2 = std::sqrt(6.0 / static_cast<double>(hidden_dim + hidden_dim));
  Rng r1 = rng.split("w1");
  Rng r2 = rng.split("w2");
  p.w1 = uniform_matrix(input_dim, hidden_dim, r1, -a1, a1);
  p.w2 = uniform_matrix(hidden_dim, hidden_dim, r2, -a2, a2);
  return p;
}

ForwardResult forward(const SparseMatrix& adj, const Matrix& features,
                      const BackboneParams& params, const LoraAdapter* adapter) {
  check_shapes(adj, features, params, adapter);
  ForwardResult out;
  Tape& t = out.tape;
  TapeAccess::adj(t) = adj;
  TapeAccess::af(t) = adj * features;
  TapeAccess::z1(t) = TapeAccess::af(t) * effective(params.w1, adapter, 0);
  TapeAccess::h1(t) = TapeAccess::z1(t).cwiseMax(0.0);
  TapeAccess::ah1(t) = adj * TapeAccess::h1(t);
  TapeAccess::w2_eff(t) = effective(params.w2, adapter, 1);
  if (adapter) TapeAccess::adapter(t) = *adapter;
  out.embeddings = TapeAccess::ah1(t) * TapeAccess::w2_eff(t);
  return out;
}

Matrix embed(const SparseMatrix& adj, const Matrix& features, const BackboneParams& params,
             const LoraAdapter* adapter) {
  return forward(adj, features, params, adapter).embeddings;
}

BackboneGrads backward(Tape& tape, const Matrix& grad_embeddings) {
  if (TapeAccess::consumed(tape)) throw ContractError("backward: tape already consumed");
  TapeAccess::consumed(tape) = true;
  const Matrix& ah1 = TapeAccess::ah1(tape);
  require_shape(grad_embeddings, ah1.rows(), TapeAccess::w2_eff(tape).cols(), "backward(dL/dX)");

  BackboneGrads g;
  g.w2 = ah1.transpose() * grad_embeddings;
  // A is symmetric, so A^T G = A G.
  const Matrix grad_h1 = TapeAccess::adj(tape) * (grad_embeddings * TapeAccess::w2_eff(tape).transpose());
  const Matrix grad_z1 = (TapeAccess::z1(tape).array() > 0.0).select(grad_h1, 0.0);
  g.w1 = TapeAccess::af(tape).transpose() * grad_z1;

  if (const auto& ad = TapeAccess::adapter(tape)) {
    AdapterGrads ag;
    const Matrix* grad_w[2] = {&g.w1, &g.w2};
    for (int l = 0; l < 2; ++l) {
      ag.down[l] = *grad_w[l] * ad->up[l].transpose();
      ag.up[l] = ad->down[l].transpose() * *grad_w[l];
    }
    g.adapter = std::move(ag);
  }
  return g;
}

double link_prediction_loss(const Matrix& embeddings, const std::vector<Edge>& positives,
                            const std::vector<Edge>& negatives, Matrix* grad) {
  const double total = static_cast<double>(positives.size() + negatives.size());
  if (total == 0) throw ValidationError("link_prediction_loss: no pairs");
  if (grad) *grad = Matrix::Zero(embeddings.rows(), embeddings.cols());
  double loss = 0.0;
  auto accumulate = [&](const std::vector<Edge>& pairs, bool positive) {
    for (const auto& [u, v] : pairs) {
      const double s = embeddings.row(u).dot(embeddings.row(v));
      loss += positive ? softplus(-s) : softplus(s);
      if (grad) {
        const double ds = (sigmoid(s) - (positive ? 1.0 : 0.0)) / total;
        grad->row(u) += ds * embeddings.row(v);
        grad->row(v) += ds * embeddings.row(u);
      }
    }
  };
  accumulate(positives, true);
  accumulate(negatives, false);
  return loss / total;
}

PretrainResult pretrain_link_prediction(const Graph& g, const PretrainConfig& cfg) {
  if (g.edges.empty()) throw ValidationError("pretrain_link_prediction: graph has no edges");
  if (g.num_nodes < 2) throw ValidationError("pretrain_link_prediction: need at least 2 nodes");
  if (cfg.epochs < 0) throw ValidationError("pretrain_link_prediction: negative epoch count");

  const Rng root = Rng(cfg.seed).split("pretrain");
  PretrainResult out;
  out.params = init_backbone(g.feature_dim(), cfg.hidden_dim, root.split("init"));
  const SparseMatrix adj = normalized_adjacency(g);
  Adam adam({.learning_rate = cfg.learning_rate, .weight_decay = cfg.weight_decay});
  Rng neg_rng = root.split("negatives");
  const auto n = static_cast<std::uint64_t>(g.num_nodes);

  std::vector<Edge> negatives(g.edges.size());
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (auto& e : negatives) {
      const auto u = static_cast<Index>(neg_rng.below(n));
      auto v = static_cast<Index>(neg_rng.below(n - 1));
      if (v >= u) ++v;
      e = {u, v};
    }
    auto fwd = forward(adj, g.features, out.params);
    Matrix grad_x;
    out.losses.push_back(link_prediction_loss(fwd.embeddings, g.edges, negatives, &grad_x));
    const BackboneGrads grads = backward(fwd.tape, grad_x);
    adam.step({&out.params.w1, &out.params.w2}, {&grads.w1, &grads.w2});
  }
  out.params.frozen = true;
  return out;
}

}  // namespace gk
