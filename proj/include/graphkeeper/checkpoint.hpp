#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "graphkeeper/backbone.hpp"
#include "graphkeeper/config.hpp"
#include "graphkeeper/disentangle.hpp"
#include "graphkeeper/domain_id.hpp"
#include "graphkeeper/keeper.hpp"
#include "graphkeeper/peft.hpp"

namespace gk {

struct DomainRecord {
  int domain_id = 0;
  ClassBlock classes;
  FeatureAlignment alignment;  // raw width -> aligned_dim
  Vector prototype;            // mean projected feature vector
  Graph graph;                 // raw (unaligned) graph as learned
};

// Everything a completed (or in-progress) run needs for inference.
struct Artifacts {
  RunConfig config;
  BackboneParams backbone;
  AdapterRegistry adapters;
  RidgeState ridge;
  PrototypeSet embedding_prototypes;
  std::uint64_t projection_seed = 0;
  std::vector<DomainRecord> domains;

  // Regenerated from (projection_seed, aligned_dim, projection_dim).
  std::shared_ptr<const ProjectionParams> projection;

  const DomainRecord& domain(int domain_id) const;
  const DomainRecord* find_domain(const std::string& name) const;
  std::vector<DomainPrototype> domain_prototypes() const;
  const ProjectionParams& projection_params();
  const ProjectionParams& projection_params() const;
};

inline constexpr int kArtifactsVersion = 1;

// Directory layout: manifest.json, config.cfg, matrices/*.gkmx, domains/<id>/.
void save_checkpoint(const Artifacts& artifacts, const std::string& dir);
Artifacts load_checkpoint(const std::string& dir);

}  // namespace gk
