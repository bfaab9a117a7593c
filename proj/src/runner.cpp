#include "graphkeeper/runner.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "graphkeeper/container.hpp"

namespace gk {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

// Rethrows the in-flight exception with a prefix, keeping its category.
[[noreturn]] void rethrow_with_context(const std::string& prefix) {
  try {
    throw;
  } catch (const ConfigError& e) {
    throw ConfigError(prefix + e.what());
  } catch (const DataError& e) {
    throw DataError(prefix + e.what());
  } catch (const BoundsError& e) {
    throw BoundsError(prefix + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(prefix + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(prefix + e.what());
  } catch (const ContractError& e) {
    throw ContractError(prefix + e.what());
  }
}

class RunLock {
 public:
  explicit RunLock(const fs::path& dir) : path_(dir / ".lock") {
    fs::create_directories(dir);
    std::FILE* f = std::fopen(path_.c_str(), "wx");
    if (!f) throw DataError(path_.string() + ": run directory is locked by another runner");
    std::fclose(f);
  }
  ~RunLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  RunLock(const RunLock&) = delete;
  RunLock& operator=(const RunLock&) = delete;

 private:
  fs::path path_;
};

Graph with_features(const Graph& g, Matrix features) {
  Graph out = g;
  out.features = std::move(features);
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(path.string() + ": cannot open for writing");
  out << text;
}

}  // namespace

std::string RunReport::to_json() const {
  json j;
  json cfg;
  for (const auto& [k, v] : config_entries(config)) cfg[k] = v;
  j["config"] = cfg;
  j["domains"] = domain_ids;
  json blocks_json = json::array();
  for (const auto& b : blocks)
    blocks_json.push_back({{"domain_id", b.domain_id}, {"begin", b.classes.begin}, {"end", b.classes.end}});
  j["blocks"] = blocks_json;
  j["accuracy_matrix"] = accuracy.rows();
  j["average_accuracy"] = metrics.average_accuracy;
  j["average_forgetting"] = metrics.average_forgetting;
  j["discrimination"] = {{"oracle_domains", oracle_domains},
                         {"calls", discrimination_calls},
                         {"correct", discrimination_correct},
                         {"accuracy", discrimination_accuracy()},
                         {"confusion", confusion}};
  return j.dump(2) + "\n";
}

std::string RunReport::accuracy_csv() const {
  std::ostringstream out;
  out << "after_domain";
  for (int id : domain_ids) out << ",domain_" << id;
  out << "\n";
  for (int i = 0; i < accuracy.size(); ++i) {
    out << domain_ids[static_cast<std::size_t>(i)];
    for (std::size_t j = 0; j < domain_ids.size(); ++j) {
      out << ",";
      if (static_cast<int>(j) <= i) out << format_real(accuracy.at(i, static_cast<int>(j)));
    }
    out << "\n";
  }
  return out.str();
}

std::string RunReport::timings_json() const {
  json j;
  j["train_seconds"] = train_seconds;
  return j.dump(2) + "\n";
}

std::vector<DomainTask> load_tasks(const RunConfig& cfg) {
  cfg.validate();
  if (cfg.datasets.empty()) return synth_domain_suite(cfg.synthetic_spec());
  std::vector<DomainTask> tasks;
  int next_class = 0;
  for (std::size_t i = 0; i < cfg.datasets.size(); ++i) {
    DomainTask t;
    t.domain_id = static_cast<int>(i);
    t.graph = load_dataset(cfg.datasets[i]);
    t.class_block = {next_class, next_class + t.graph.num_classes};
    next_class = t.class_block.end;
    tasks.push_back(std::move(t));
  }
  return tasks;
}

Matrix domain_embeddings(const Artifacts& artifacts, int domain_id, const Graph& raw) {
  const DomainRecord& rec = artifacts.domain(domain_id);
  const Matrix aligned = raw.feature_dim() == rec.alignment.input_dim()
                             ? rec.alignment.apply(raw.features)
                             : align_features(raw.features, artifacts.config.aligned_dim);
  const LoraAdapter* adapter = artifacts.adapters.contains(domain_id) ? &artifacts.adapters.at(domain_id) : nullptr;
  return embed(normalized_adjacency(raw), aligned, artifacts.backbone, adapter);
}

Inference infer(const Artifacts& artifacts, const Graph& raw, std::optional<int> forced_domain) {
  if (raw.num_nodes < 1) throw ValidationError("infer: empty graph");
  raw.validate();
  Inference out;
  if (forced_domain) {
    artifacts.domain(*forced_domain);
    out.domain_id = *forced_domain;
    out.forced = true;
  } else {
    const Matrix aligned = align_features(raw.features, artifacts.config.aligned_dim);
    const Matrix projected = random_projection(normalized_adjacency(raw), aligned, artifacts.projection_params());
    out.discrimination = discriminate(domain_prototype(projected), artifacts.domain_prototypes());
    out.domain_id = out.discrimination.domain_id;
  }
  out.embeddings = domain_embeddings(artifacts, out.domain_id, raw);
  out.prediction = predict(artifacts.ridge, out.embeddings);
  return out;
}

double accuracy(const Graph& raw, const Prediction& prediction, const ClassBlock& truth) {
  std::vector<Index> nodes;
  for (Index i : raw.nodes_in(Split::kTest))
    if (raw.labels[static_cast<std::size_t>(i)] != kNoLabel) nodes.push_back(i);
  if (nodes.empty()) {
    for (Index i = 0; i < raw.num_nodes; ++i)
      if (raw.labels[static_cast<std::size_t>(i)] != kNoLabel) nodes.push_back(i);
  }
  if (nodes.empty()) throw ValidationError("accuracy: graph has no labeled nodes");
  std::size_t correct = 0;
  for (Index i : nodes) {
    if (prediction.classes[static_cast<std::size_t>(i)] == truth.begin + raw.labels[static_cast<std::size_t>(i)]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(nodes.size());
}

RunResult run_sequence(const RunConfig& cfg, const std::vector<DomainTask>& tasks, const RunOptions& opts) {
  cfg.validate();
  if (tasks.empty()) throw ConfigError("run_sequence: no domains");
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (tasks[i].domain_id == tasks[j].domain_id) throw ConfigError("run_sequence: duplicate domain id");
      if (tasks[i].class_block.overlaps(tasks[j].class_block)) {
        throw ConfigError("run_sequence: class blocks of domains " + std::to_string(tasks[j].domain_id) + " and " +
                          std::to_string(tasks[i].domain_id) + " overlap");
      }
    }
  }

  RunResult result;
  Artifacts& art = result.artifacts;
  art.config = cfg;
  art.projection_seed = cfg.seed;
  art.projection_params();

  RunReport& report = result.report;
  report.config = cfg;
  report.oracle_domains = opts.oracle_domains;
  const std::size_t T = tasks.size();
  report.confusion.assign(T, std::vector<int>(T, 0));

  const DisentangleConfig dcfg = cfg.disentangle();
  const PrototypeOptions popts{cfg.dbscan_eps, cfg.dbscan_min_pts};

  for (std::size_t t = 0; t < T; ++t) {
    const DomainTask& task = tasks[t];
    const std::string where = "domain " + std::to_string(task.domain_id) + " (step " + std::to_string(t + 1) + "): ";
    try {
      const auto start = std::chrono::steady_clock::now();
      task.graph.validate();
      DomainRecord rec;
      rec.domain_id = task.domain_id;
      rec.classes = task.class_block;
      rec.graph = task.graph;
      rec.alignment = fit_alignment(task.graph.features, cfg.aligned_dim);
      const DomainTask aligned{task.domain_id, with_features(task.graph, rec.alignment.apply(task.graph.features)),
                               task.class_block};

      if (t == 0) {
        PretrainResult pre = pretrain_link_prediction(aligned.graph, cfg.pretrain());
        art.backbone = std::move(pre.params);
        result.pretrain_losses = std::move(pre.losses);
      }

      if (opts.ablation == Ablation::kNoAdapters) {
        BackboneTraining bt = finetune_backbone(aligned, art.backbone, art.embedding_prototypes, dcfg);
        art.backbone = std::move(bt.backbone);
        result.training_losses.push_back(std::move(bt.losses));
      } else {
        art.adapters.begin_training(task.domain_id);
        AdapterTraining at = train_adapter(aligned, art.backbone, art.embedding_prototypes, dcfg);
        result.training_losses.push_back(std::move(at.losses));
        art.adapters.commit(std::move(at.adapter));
      }

      const LoraAdapter* adapter =
          art.adapters.contains(task.domain_id) ? &art.adapters.at(task.domain_id) : nullptr;
      const GraphView view = make_view(aligned.graph);
      const Matrix x = embed(view.adj, view.features, art.backbone, adapter);
      result.learned_embeddings.push_back(x);

      std::vector<int> train_labels(aligned.graph.labels.size(), kNoLabel);
      std::vector<Index> train_rows;
      for (Index i : aligned.graph.nodes_in(Split::kTrain)) {
        const int y = aligned.graph.labels[static_cast<std::size_t>(i)];
        if (y == kNoLabel) continue;
        train_labels[static_cast<std::size_t>(i)] = y;
        train_rows.push_back(i);
      }
      if (train_rows.empty()) throw ValidationError("no labeled training nodes");
      art.embedding_prototypes.append(extract_prototypes(x, train_labels, popts, task.domain_id));

      Matrix x_train(static_cast<Index>(train_rows.size()), x.cols());
      std::vector<int> y_train;
      for (std::size_t i = 0; i < train_rows.size(); ++i) {
        x_train.row(static_cast<Index>(i)) = x.row(train_rows[i]);
        y_train.push_back(train_labels[static_cast<std::size_t>(train_rows[i])]);
      }
      const Matrix y = one_hot(y_train, task.class_block.width());
      const DomainBlock block{task.domain_id, task.class_block};
      if (t == 0 || opts.ablation == Ablation::kNoKnowledgePreservation) {
        art.ridge = init_state(x_train, y, cfg.lambda, block);
      } else {
        art.ridge = update_state(art.ridge, x_train, y, block);
      }

      rec.prototype = domain_prototype(random_projection(view.adj, view.features, art.projection_params()));
      art.domains.push_back(std::move(rec));
      report.domain_ids.push_back(task.domain_id);
      report.train_seconds.push_back(
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    } catch (const Error&) {
      rethrow_with_context(where);
    }

    std::vector<double> row;
    for (std::size_t j = 0; j <= t; ++j) {
      try {
        const std::optional<int> forced =
            opts.oracle_domains ? std::optional<int>(tasks[j].domain_id) : std::nullopt;
        const Inference inf = infer(art, tasks[j].graph, forced);
        row.push_back(accuracy(tasks[j].graph, inf.prediction, tasks[j].class_block));
        std::size_t chosen = 0;
        while (tasks[chosen].domain_id != inf.domain_id) ++chosen;
        ++report.confusion[j][chosen];
        if (!opts.oracle_domains) {
          ++report.discrimination_calls;
          if (chosen == j) ++report.discrimination_correct;
        }
      } catch (const Error&) {
        rethrow_with_context("evaluating domain " + std::to_string(tasks[j].domain_id) + " after step " +
                             std::to_string(t + 1) + ": ");
      }
    }
    report.accuracy.append_row(std::move(row));
  }
  report.blocks = art.ridge.blocks;
  report.metrics = metrics(report.accuracy);
  return result;
}

RunResult run_and_persist(const RunConfig& cfg, const std::string& out_dir, const RunOptions& opts) {
  const fs::path root(out_dir);
  RunLock lock(root);
  RunResult result = run_sequence(cfg, load_tasks(cfg), opts);
  save_checkpoint(result.artifacts, out_dir);
  write_text(root / "report.json", result.report.to_json());
  write_text(root / "accuracy.csv", result.report.accuracy_csv());
  write_text(root / "timings.json", result.report.timings_json());
  return result;
}

PretrainResult pretrain_and_persist(const RunConfig& cfg, const std::string& out_dir) {
  const auto tasks = load_tasks(cfg);
  const Graph& first = tasks.front().graph;
  const Graph aligned = with_features(first, align_features(first.features, cfg.aligned_dim));
  PretrainResult pre = pretrain_link_prediction(aligned, cfg.pretrain());
  const fs::path root(out_dir);
  fs::create_directories(root);
  write_matrix((root / "backbone_w1.gkmx").string(), pre.params.w1);
  write_matrix((root / "backbone_w2.gkmx").string(), pre.params.w2);
  std::ostringstream losses;
  losses << "epoch,loss\n";
  for (std::size_t i = 0; i < pre.losses.size(); ++i) losses << i + 1 << "," << format_real(pre.losses[i]) << "\n";
  write_text(root / "pretrain_losses.csv", losses.str());
  return pre;
}

}  // namespace gk
