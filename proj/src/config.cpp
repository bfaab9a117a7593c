#include "graphkeeper/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace gk {

std::string format_real(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_value(const std::string& key, const std::string& v) {
  T out{};
  const char* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError("config key '" + key + "': cannot parse '" + v + "'");
  return out;
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

template <typename T, typename M>
Setter set(M RunConfig::*member) {
  return [member](RunConfig& c, const std::string& k, const std::string& v) { c.*member = parse_value<T>(k, v); };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"aligned_dim", set<Index>(&RunConfig::aligned_dim)},
      {"hidden_dim", set<Index>(&RunConfig::hidden_dim)},
      {"rank", set<Index>(&RunConfig::rank)},
      {"gamma1", set<double>(&RunConfig::gamma1)},
      {"gamma2", set<double>(&RunConfig::gamma2)},
      {"epsilon", set<double>(&RunConfig::epsilon)},
      {"lambda", set<double>(&RunConfig::lambda)},
      {"epochs", set<int>(&RunConfig::epochs)},
      {"learning_rate", set<double>(&RunConfig::learning_rate)},
      {"weight_decay", set<double>(&RunConfig::weight_decay)},
      {"mask_rate", set<double>(&RunConfig::mask_rate)},
      {"drop_rate", set<double>(&RunConfig::drop_rate)},
      {"dbscan_eps",
       [](RunConfig& c, const std::string& k, const std::string& v) {
         if (v == "auto") {
           c.dbscan_eps.reset();
         } else {
           c.dbscan_eps = parse_value<double>(k, v);
         }
       }},
      {"dbscan_min_pts", set<int>(&RunConfig::dbscan_min_pts)},
      {"projection_dim", set<Index>(&RunConfig::projection_dim)},
      {"seed", set<std::uint64_t>(&RunConfig::seed)},
      {"datasets", [](RunConfig& c, const std::string&, const std::string& v) { c.datasets = split_list(v); }},
      {"synthetic_domains", set<int>(&RunConfig::synthetic_domains)},
      {"synthetic_classes", set<int>(&RunConfig::synthetic_classes)},
      {"synthetic_nodes_per_class", set<int>(&RunConfig::synthetic_nodes_per_class)},
      {"synthetic_p_in", set<double>(&RunConfig::synthetic_p_in)},
      {"synthetic_p_out", set<double>(&RunConfig::synthetic_p_out)},
      {"synthetic_feature_dim", set<int>(&RunConfig::synthetic_feature_dim)},
      {"synthetic_mean_separation", set<double>(&RunConfig::synthetic_mean_separation)},
      {"output_dir", [](RunConfig& c, const std::string&, const std::string& v) { c.output_dir = v; }},
  };
  return table;
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError("config: " + msg);
}

}  // namespace

void RunConfig::validate() const {
  require(aligned_dim >= 1 && hidden_dim >= 1 && projection_dim >= 1, "dimensions must be >= 1");
  require(rank >= 1 && rank < std::min(aligned_dim, hidden_dim),
          "rank must lie in [1, min(aligned_dim, hidden_dim))");
  require(gamma1 >= 0 && gamma2 >= 0, "gamma1 and gamma2 must be >= 0");
  require(epsilon > 0, "epsilon must be > 0");
  require(lambda > 0, "lambda must be > 0");
  require(epochs >= 0, "epochs must be >= 0");
  require(learning_rate > 0, "learning_rate must be > 0");
  require(weight_decay >= 0, "weight_decay must be >= 0");
  require(mask_rate >= 0 && mask_rate <= 1, "mask_rate must lie in [0, 1]");
  require(drop_rate >= 0 && drop_rate <= 1, "drop_rate must lie in [0, 1]");
  require(!dbscan_eps || *dbscan_eps > 0, "dbscan_eps must be > 0 or auto");
  require(dbscan_min_pts >= 1, "dbscan_min_pts must be >= 1");
  if (datasets.empty()) {
    require(synthetic_domains >= 1 && synthetic_classes >= 1 && synthetic_nodes_per_class >= 1 &&
                synthetic_feature_dim >= 1,
            "synthetic counts must be >= 1");
    require(synthetic_p_in >= 0 && synthetic_p_in <= 1 && synthetic_p_out >= 0 && synthetic_p_out <= 1,
            "synthetic edge probabilities must lie in [0, 1]");
  }
}

SyntheticSuiteSpec RunConfig::synthetic_spec() const {
  return {synthetic_domains, synthetic_classes, synthetic_nodes_per_class, synthetic_p_in,
          synthetic_p_out,   synthetic_feature_dim, synthetic_mean_separation, seed};
}

DisentangleConfig RunConfig::disentangle() const {
  return {rank, epochs, learning_rate, weight_decay, gamma1, gamma2, epsilon, mask_rate, drop_rate, seed};
}

PretrainConfig RunConfig::pretrain() const { return {hidden_dim, epochs, learning_rate, weight_decay, seed}; }

RunConfig parse_config(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    const std::string where = origin + ":" + std::to_string(lineno) + ": ";
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError(where + "unknown key '" + key + "'");
    if (!seen.insert(key).second) throw ConfigError(where + "duplicate key '" + key + "'");
    try {
      it->second(cfg, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& c) {
  std::string datasets;
  for (std::size_t i = 0; i < c.datasets.size(); ++i) datasets += (i ? "," : "") + c.datasets[i];
  return {
      {"aligned_dim", std::to_string(c.aligned_dim)},
      {"hidden_dim", std::to_string(c.hidden_dim)},
      {"rank", std::to_string(c.rank)},
      {"gamma1", format_real(c.gamma1)},
      {"gamma2", format_real(c.gamma2)},
      {"epsilon", format_real(c.epsilon)},
      {"lambda", format_real(c.lambda)},
      {"epochs", std::to_string(c.epochs)},
      {"learning_rate", format_real(c.learning_rate)},
      {"weight_decay", format_real(c.weight_decay)},
      {"mask_rate", format_real(c.mask_rate)},
      {"drop_rate", format_real(c.drop_rate)},
      {"dbscan_eps", c.dbscan_eps ? format_real(*c.dbscan_eps) : "auto"},
      {"dbscan_min_pts", std::to_string(c.dbscan_min_pts)},
      {"projection_dim", std::to_string(c.projection_dim)},
      {"seed", std::to_string(c.seed)},
      {"datasets", datasets},
      {"synthetic_domains", std::to_string(c.synthetic_domains)},
      {"synthetic_classes", std::to_string(c.synthetic_classes)},
      {"synthetic_nodes_per_class", std::to_string(c.synthetic_nodes_per_class)},
      {"synthetic_p_in", format_real(c.synthetic_p_in)},
      {"synthetic_p_out", format_real(c.synthetic_p_out)},
      {"synthetic_feature_dim", std::to_string(c.synthetic_feature_dim)},
      {"synthetic_mean_separation", format_real(c.synthetic_mean_separation)},
  };
}

std::string serialize_config(const RunConfig& cfg) {
  std::string out;
  for (const auto& [k, v] : config_entries(cfg)) out += k + " = " + v + "\n";
  return out;
}

}  // namespace gk
