#pragma once

#include <optional>
#include <string>
#include <vector>

#include "graphkeeper/checkpoint.hpp"
#include "graphkeeper/metrics.hpp"

namespace gk {

enum class Ablation {
  kNone,
  kNoKnowledgePreservation,  // classifier refit on the newest domain only
  kNoAdapters,               // one shared backbone trained on every domain
};

struct RunOptions {
  bool oracle_domains = false;  // bypass discrimination during evaluation
  Ablation ablation = Ablation::kNone;
};

struct RunReport {
  RunConfig config;
  bool oracle_domains = false;
  std::vector<int> domain_ids;
  std::vector<DomainBlock> blocks;
  AccuracyMatrix accuracy;
  Metrics metrics;
  // confusion[i][j]: evaluations of domain index i routed to domain index j.
  std::vector<std::vector<int>> confusion;
  int discrimination_calls = 0;
  int discrimination_correct = 0;
  std::vector<double> train_seconds;  // wall clock, kept out of to_json()

  double discrimination_accuracy() const {
    return discrimination_calls ? static_cast<double>(discrimination_correct) / discrimination_calls : 1.0;
  }
  // Deterministic for a fixed (config, seed).
  std::string to_json() const;
  std::string accuracy_csv() const;
  std::string timings_json() const;
};

struct RunResult {
  RunReport report;
  Artifacts artifacts;
  std::vector<double> pretrain_losses;
  std::vector<std::vector<double>> training_losses;  // per domain, per epoch
  std::vector<Matrix> learned_embeddings;            // X_t right after learning domain t
};

// Synthetic suite or dataset directories, per config.
std::vector<DomainTask> load_tasks(const RunConfig& cfg);

// Domain graphs with raw features; class blocks must be disjoint.
RunResult run_sequence(const RunConfig& cfg, const std::vector<DomainTask>& tasks, const RunOptions& opts = {});

// run_sequence on load_tasks(cfg), then writes the checkpoint plus
// report.json, accuracy.csv and timings.json into out_dir. A lock file keeps
// a single runner per directory.
RunResult run_and_persist(const RunConfig& cfg, const std::string& out_dir, const RunOptions& opts = {});

// Pretrains on the first domain and writes backbone_w{1,2}.gkmx and
// pretrain_losses.csv into out_dir.
PretrainResult pretrain_and_persist(const RunConfig& cfg, const std::string& out_dir);

struct Inference {
  int domain_id = 0;
  bool forced = false;
  Discrimination discrimination;  // empty when forced
  Matrix embeddings;
  Prediction prediction;
};

// Discriminate the graph's domain (unless forced), embed it with that
// domain's adapter, and classify with the ridge state.
Inference infer(const Artifacts& artifacts, const Graph& raw, std::optional<int> forced_domain = {});

// Embeddings of a graph under a known domain's alignment and adapter.
Matrix domain_embeddings(const Artifacts& artifacts, int domain_id, const Graph& raw);

// Accuracy over the test split (all labeled nodes when the split is empty),
// with labels mapped into `truth`.
double accuracy(const Graph& raw, const Prediction& prediction, const ClassBlock& truth);

}  // namespace gk
