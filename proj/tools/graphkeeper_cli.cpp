// Command-line front end: pretraining, incremental runs, inference on new
// graphs, embedding export and report printing.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "graphkeeper/runner.hpp"

namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw gk::DataError(path + ": cannot open");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cmd_pretrain(const std::string& config, const std::string& out) {
  const gk::RunConfig cfg = gk::load_config(config);
  const auto pre = gk::pretrain_and_persist(cfg, out);
  std::cout << "pretrained backbone on first domain: " << pre.losses.size() << " epochs";
  if (!pre.losses.empty()) std::cout << ", loss " << pre.losses.front() << " -> " << pre.losses.back();
  std::cout << "\nwrote " << out << "\n";
  return 0;
}

int cmd_run(const std::string& config, const std::string& out_flag, bool oracle) {
  gk::RunConfig cfg = gk::load_config(config);
  const std::string out = out_flag.empty() ? cfg.output_dir : out_flag;
  if (out.empty()) throw gk::ConfigError("run: no output directory (--out or output_dir)");
  cfg.output_dir = out;
  const auto result = gk::run_and_persist(cfg, out, {.oracle_domains = oracle});
  const auto& r = result.report;
  std::cout << std::fixed << std::setprecision(4);
  std::cout << "AA " << r.metrics.average_accuracy << "  AF " << r.metrics.average_forgetting
            << "  discrimination " << r.discrimination_accuracy() << "\n";
  std::cout << "artifacts written to " << out << "\n";
  return 0;
}

struct EvalArgs {
  std::string artifacts;
  std::string dataset;
  int forced_domain = -1;
  std::string predictions;
};

int cmd_eval(const EvalArgs& args) {
  const gk::Artifacts art = gk::load_checkpoint(args.artifacts);
  const gk::Graph g = gk::load_dataset(args.dataset);
  const std::optional<int> forced = args.forced_domain >= 0 ? std::optional<int>(args.forced_domain) : std::nullopt;
  const gk::Inference inf = gk::infer(art, g, forced);

  // A graph matching a learned domain's name is scored against that domain's
  // class block; otherwise the routed domain's block is assumed.
  const gk::DomainRecord* known = art.find_domain(g.name);
  const gk::ClassBlock truth = known ? known->classes : art.domain(inf.domain_id).classes;
  std::cout << "domain " << inf.domain_id << (inf.forced ? " (forced)" : "") << "\n";
  std::cout << std::fixed << std::setprecision(6) << "accuracy " << gk::accuracy(g, inf.prediction, truth) << "\n";

  if (!args.predictions.empty()) {
    std::ofstream out(args.predictions);
    if (!out) throw gk::DataError(args.predictions + ": cannot open for writing");
    out << "node_id,class";
    for (gk::Index c = 0; c < inf.prediction.probabilities.cols(); ++c) out << ",p_" << art.ridge.column_class(c);
    out << "\n";
    for (gk::Index i = 0; i < g.num_nodes; ++i) {
      out << i << "," << inf.prediction.classes[static_cast<std::size_t>(i)];
      for (gk::Index c = 0; c < inf.prediction.probabilities.cols(); ++c)
        out << "," << gk::format_real(inf.prediction.probabilities(i, c));
      out << "\n";
    }
  }
  return 0;
}

int cmd_discriminate(const std::string& artifacts, const std::string& dataset) {
  const gk::Artifacts art = gk::load_checkpoint(artifacts);
  const gk::Graph g = gk::load_dataset(dataset);
  const gk::Matrix aligned = gk::align_features(g.features, art.config.aligned_dim);
  const gk::Matrix projected = gk::random_projection(gk::normalized_adjacency(g), aligned, art.projection_params());
  const auto protos = art.domain_prototypes();
  const gk::Discrimination d = gk::discriminate(gk::domain_prototype(projected), protos);
  std::cout << "domain " << d.domain_id << "\n";
  for (std::size_t k = 0; k < protos.size(); ++k) {
    std::cout << "  domain " << protos[k].domain_id << "  sq_distance " << gk::format_real(d.sq_distances[k])
              << "  correlation " << gk::format_real(d.correlations[k]) << "\n";
  }
  return 0;
}

int cmd_export(const std::string& artifacts, int domain, const std::string& out_path) {
  const gk::Artifacts art = gk::load_checkpoint(artifacts);
  const gk::Graph& g = art.domain(domain).graph;
  const gk::Matrix x = gk::domain_embeddings(art, domain, g);
  std::ofstream out(out_path);
  if (!out) throw gk::DataError(out_path + ": cannot open for writing");
  out << "node_id,label,split";
  for (gk::Index j = 0; j < x.cols(); ++j) out << ",x" << j;
  out << "\n";
  for (gk::Index i = 0; i < x.rows(); ++i) {
    const int y = g.labels[static_cast<std::size_t>(i)];
    out << i << "," << (y == gk::kNoLabel ? std::string("-") : std::to_string(y)) << ","
        << gk::split_name(g.split[static_cast<std::size_t>(i)]);
    for (gk::Index j = 0; j < x.cols(); ++j) out << "," << gk::format_real(x(i, j));
    out << "\n";
  }
  std::cout << "wrote " << x.rows() << " embeddings of domain " << domain << " to " << out_path << "\n";
  return 0;
}

int cmd_report(const std::string& artifacts) {
  const fs::path path = fs::path(artifacts) / "report.json";
  nlohmann::json r;
  try {
    r = nlohmann::json::parse(read_file(path.string()));
  } catch (const nlohmann::json::exception& e) {
    throw gk::DataError(path.string() + ": " + e.what());
  }
  std::cout << std::fixed << std::setprecision(4);
  std::cout << "AA " << r.at("average_accuracy").get<double>() << "\n";
  std::cout << "AF " << r.at("average_forgetting").get<double>() << "\n";
  std::cout << "accuracy matrix (row = after learning domain, column = evaluated domain)\n";
  const auto ids = r.at("domains").get<std::vector<int>>();
  const auto rows = r.at("accuracy_matrix").get<std::vector<std::vector<double>>>();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::cout << "  " << std::setw(4) << ids[i];
    for (double a : rows[i]) std::cout << "  " << a;
    std::cout << "\n";
  }
  const auto& disc = r.at("discrimination");
  std::cout << "domain discrimination " << disc.at("correct").get<int>() << "/" << disc.at("calls").get<int>()
            << (disc.at("oracle_domains").get<bool>() ? " (oracle domains)" : "") << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Domain-incremental graph learning with frozen adapters and an analytic classifier"};
  app.require_subcommand(1);

  std::string config, out, artifacts, dataset;
  bool oracle = false;
  int domain = -1;
  EvalArgs eval_args;

  auto* pretrain = app.add_subcommand("pretrain", "Link-prediction pretraining on the first domain");
  pretrain->add_option("--config", config, "Config file")->required();
  pretrain->add_option("--out", out, "Output directory")->required();

  auto* run = app.add_subcommand("run", "Learn the full domain sequence and evaluate after each domain");
  run->add_option("--config", config, "Config file")->required();
  run->add_option("--out", out, "Output directory (defaults to output_dir from the config)");
  run->add_flag("--oracle-domains", oracle, "Route evaluation by true domain instead of discrimination");

  auto* eval = app.add_subcommand("eval", "Classify a dataset with a trained run");
  eval->add_option("--artifacts", eval_args.artifacts, "Run directory")->required();
  eval->add_option("--dataset", eval_args.dataset, "Dataset directory")->required();
  eval->add_option("--domain", eval_args.forced_domain, "Force the domain instead of discriminating (debug)");
  eval->add_option("--predictions", eval_args.predictions, "Write per-node predictions as CSV");

  auto* disc = app.add_subcommand("discriminate", "Identify the domain of a dataset");
  disc->add_option("--artifacts", artifacts, "Run directory")->required();
  disc->add_option("--dataset", dataset, "Dataset directory")->required();

  auto* exp = app.add_subcommand("export-embeddings", "Write a learned domain's node embeddings as CSV");
  exp->add_option("--artifacts", artifacts, "Run directory")->required();
  exp->add_option("--domain", domain, "Domain id")->required();
  exp->add_option("--out", out, "CSV path")->required();

  auto* rep = app.add_subcommand("report", "Print AA/AF and the accuracy matrix of a run");
  rep->add_option("--artifacts", artifacts, "Run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*pretrain) return cmd_pretrain(config, out);
    if (*run) return cmd_run(config, out, oracle);
    if (*eval) return cmd_eval(eval_args);
    if (*disc) return cmd_discriminate(artifacts, dataset);
    if (*exp) return cmd_export(artifacts, domain, out);
    if (*rep) return cmd_report(artifacts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return gk::exit_code(e);
  }
  return 0;
}
