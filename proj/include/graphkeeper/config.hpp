#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "graphkeeper/graph.hpp"
#include "graphkeeper/peft.hpp"

namespace gk {

// Every tunable of a run. The text form is one `key = value` per line with
// keys spelled exactly as the members below; '#' starts a comment line.
struct RunConfig {
  Index aligned_dim = 64;
  Index hidden_dim = 64;
  Index rank = 16;
  double gamma1 = 1.0;
  double gamma2 = 0.1;
  double epsilon = 1e-8;
  double lambda = 1.0;
  int epochs = 200;
  double learning_rate = 5e-2;
  double weight_decay = 5e-4;
  double mask_rate = 0.2;
  double drop_rate = 0.2;
  std::optional<double> dbscan_eps;  // "auto" when empty
  int dbscan_min_pts = 4;
  Index projection_dim = 2048;
  std::uint64_t seed = 0;
  // Dataset directories in domain order; the synthetic suite is used when empty.
  std::vector<std::string> datasets;
  int synthetic_domains = 4;
  int synthetic_classes = 3;
  int synthetic_nodes_per_class = 60;
  double synthetic_p_in = 0.1;
  double synthetic_p_out = 0.01;
  int synthetic_feature_dim = 32;
  double synthetic_mean_separation = 5.0;
  std::string output_dir;

  // Throws ConfigError naming the first violated constraint.
  void validate() const;

  SyntheticSuiteSpec synthetic_spec() const;
  DisentangleConfig disentangle() const;
  PretrainConfig pretrain() const;
};

RunConfig parse_config(const std::string& text, const std::string& origin = "<config>");
RunConfig load_config(const std::string& path);

// Canonical text form. output_dir is omitted: it names where a run is
// written, not how it behaves, so echoes stay identical across locations.
std::string serialize_config(const RunConfig& cfg);

// Ordered (key, value) pairs of the canonical form.
std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& cfg);

std::string format_real(double x);

}  // namespace gk
