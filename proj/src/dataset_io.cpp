#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "graphkeeper/graph.hpp"

namespace gk {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void parse_fail(const fs::path& file, std::size_t line, const std::string& msg) {
  throw DataError(file.string() + ":" + std::to_string(line) + ": " + msg);
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find('\t', start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
bool parse_number(const std::string& s, T& out) {
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

std::ifstream open_input(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw DataError(file.string() + ": cannot open file");
  return in;
}

}  // namespace

Graph load_dataset(const std::string& dir) {
  const fs::path root(dir);
  Graph g;
  Index feature_dim = 0;

  {
    const fs::path file = root / "meta.json";
    auto in = open_input(file);
    nlohmann::json meta;
    try {
      in >> meta;
      g.num_nodes = meta.at("num_nodes").get<Index>();
      feature_dim = meta.at("feature_dim").get<Index>();
      g.num_classes = meta.at("num_classes").get<int>();
      g.name = meta.at("name").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw DataError(file.string() + ": " + e.what());
    }
    if (g.num_nodes < 0 || feature_dim < 0 || g.num_classes < 0) {
      throw DataError(file.string() + ": negative count");
    }
  }

  {
    const fs::path file = root / "nodes.tsv";
    auto in = open_input(file);
    g.features.resize(g.num_nodes, feature_dim);
    g.labels.resize(static_cast<std::size_t>(g.num_nodes));
    g.split.resize(static_cast<std::size_t>(g.num_nodes));
    std::string line;
    std::size_t lineno = 0;
    Index row = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      if (row >= g.num_nodes) parse_fail(file, lineno, "more node rows than num_nodes");
      const auto cols = split_tabs(line);
      if (static_cast<Index>(cols.size()) != 3 + feature_dim) {
        parse_fail(file, lineno, "expected " + std::to_string(3 + feature_dim) + " fields, got " +
                                     std::to_string(cols.size()));
      }
      Index id = -1;
      if (!parse_number(cols[0], id) || id != row) {
        parse_fail(file, lineno, "node id '" + cols[0] + "' is not the dense index " + std::to_string(row));
      }
      int label = kNoLabel;
      if (cols[1] != "-") {
        if (!parse_number(cols[1], label)) parse_fail(file, lineno, "bad label '" + cols[1] + "'");
        if (label < 0 || label >= g.num_classes) {
          parse_fail(file, lineno, "label " + cols[1] + " outside [0, " + std::to_string(g.num_classes) + ")");
        }
      }
      g.labels[static_cast<std::size_t>(row)] = label;
      try {
        g.split[static_cast<std::size_t>(row)] = parse_split(cols[2]);
      } catch (const ValidationError& e) {
        parse_fail(file, lineno, e.what());
      }
      for (Index j = 0; j < feature_dim; ++j) {
        double v = 0.0;
        const auto& field = cols[static_cast<std::size_t>(3 + j)];
        if (!parse_number(field, v)) parse_fail(file, lineno, "bad feature value '" + field + "'");
        g.features(row, j) = v;
      }
      ++row;
    }
    if (row != g.num_nodes) {
      parse_fail(file, lineno, "found " + std::to_string(row) + " node rows, meta declares " +
                                   std::to_string(g.num_nodes));
    }
  }

  {
    const fs::path file = root / "edges.tsv";
    auto in = open_input(file);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      const auto cols = split_tabs(line);
      Index u = -1, v = -1;
      if (cols.size() != 2 || !parse_number(cols[0], u) || !parse_number(cols[1], v)) {
        parse_fail(file, lineno, "expected 'src<TAB>dst'");
      }
      if (u < 0 || v < 0 || u >= g.num_nodes || v >= g.num_nodes) {
        parse_fail(file, lineno, "edge (" + cols[0] + ", " + cols[1] + ") references a node outside [0, " +
                                     std::to_string(g.num_nodes) + ")");
      }
      if (u >= v) parse_fail(file, lineno, "edge must satisfy src < dst");
      const Edge e{u, v};
      if (!g.edges.empty() && !(g.edges.back() < e)) {
        parse_fail(file, lineno, "edges must be sorted and unique");
      }
      g.edges.push_back(e);
    }
  }
  return g;
}

void save_dataset(const Graph& g, const std::string& dir) {
  g.validate();
  const fs::path root(dir);
  fs::create_directories(root);

  nlohmann::ordered_json meta;
  meta["num_nodes"] = g.num_nodes;
  meta["feature_dim"] = g.feature_dim();
  meta["num_classes"] = g.num_classes;
  meta["name"] = g.name;
  std::ofstream(root / "meta.json", std::ios::binary) << meta.dump(2) << "\n";

  std::ostringstream nodes;
  for (Index i = 0; i < g.num_nodes; ++i) {
    const int y = g.labels[static_cast<std::size_t>(i)];
    nodes << i << '\t' << (y == kNoLabel ? std::string("-") : std::to_string(y)) << '\t'
          << split_name(g.split[static_cast<std::size_t>(i)]);
    for (Index j = 0; j < g.feature_dim(); ++j) nodes << '\t' << format_double(g.features(i, j));
    nodes << '\n';
  }
  std::ofstream(root / "nodes.tsv", std::ios::binary) << nodes.str();

  std::ostringstream edges;
  for (const auto& [u, v] : g.edges) edges << u << '\t' << v << '\n';
  std::ofstream(root / "edges.tsv", std::ios::binary) << edges.str();
}

}  // namespace gk
