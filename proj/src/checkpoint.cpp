#include "graphkeeper/checkpoint.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "graphkeeper/container.hpp"

namespace gk {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

const DomainRecord& Artifacts::domain(int domain_id) const {
  for (const auto& d : domains)
    if (d.domain_id == domain_id) return d;
  throw ValidationError("artifacts: unknown domain " + std::to_string(domain_id));
}

const DomainRecord* Artifacts::find_domain(const std::string& name) const {
  for (const auto& d : domains)
    if (d.graph.name == name) return &d;
  return nullptr;
}

std::vector<DomainPrototype> Artifacts::domain_prototypes() const {
  std::vector<DomainPrototype> out;
  for (const auto& d : domains) out.push_back({d.domain_id, d.prototype});
  return out;
}

const ProjectionParams& Artifacts::projection_params() {
  if (!projection) {
    projection = std::make_shared<const ProjectionParams>(
        make_projection(config.aligned_dim, config.projection_dim, projection_seed));
  }
  return *projection;
}

const ProjectionParams& Artifacts::projection_params() const {
  if (!projection) throw ContractError("artifacts: projection not materialised");
  return *projection;
}

namespace {

std::string mat(const fs::path& dir, const std::string& name) { return (dir / "matrices" / (name + ".gkmx")).string(); }

std::string adapter_name(int id, const char* part, int layer) {
  return "adapter_" + std::to_string(id) + "_" + part + std::to_string(layer + 1);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(path.string() + ": cannot open for writing");
  out << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string() + ": missing artifact file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

void save_checkpoint(const Artifacts& a, const std::string& dir) {
  const fs::path root(dir);
  fs::create_directories(root / "matrices");
  fs::create_directories(root / "domains");

  json manifest;
  manifest["format"] = "graphkeeper-artifacts";
  manifest["version"] = kArtifactsVersion;
  manifest["projection"] = {{"seed", a.projection_seed},
                            {"input_dim", a.config.aligned_dim},
                            {"dim", a.config.projection_dim}};
  manifest["backbone_frozen"] = a.backbone.frozen;
  manifest["lambda"] = a.ridge.lambda;
  json blocks = json::array();
  for (const auto& b : a.ridge.blocks)
    blocks.push_back({{"domain_id", b.domain_id}, {"begin", b.classes.begin}, {"end", b.classes.end}});
  manifest["blocks"] = blocks;
  json adapters = json::array();
  for (const auto& [id, ad] : a.adapters.adapters()) adapters.push_back({{"domain_id", id}, {"rank", ad.rank}});
  manifest["adapters"] = adapters;
  json protos = json::array();
  for (const auto& p : a.embedding_prototypes.entries())
    protos.push_back({{"domain_id", p.domain_id}, {"cluster_id", p.cluster_id}});
  manifest["prototypes"] = protos;
  json domains = json::array();
  for (const auto& d : a.domains) {
    domains.push_back({{"domain_id", d.domain_id},
                       {"name", d.graph.name},
                       {"class_begin", d.classes.begin},
                       {"class_end", d.classes.end}});
  }
  manifest["domains"] = domains;
  write_text(root / "manifest.json", manifest.dump(2) + "\n");
  write_text(root / "config.cfg", serialize_config(a.config));

  write_matrix(mat(root, "backbone_w1"), a.backbone.w1);
  write_matrix(mat(root, "backbone_w2"), a.backbone.w2);
  write_matrix(mat(root, "ridge_W"), a.ridge.W);
  write_matrix(mat(root, "ridge_M"), a.ridge.M);
  write_matrix(mat(root, "embedding_prototypes"), a.embedding_prototypes.as_matrix(a.backbone.hidden_dim()));
  for (const auto& [id, ad] : a.adapters.adapters()) {
    for (int l = 0; l < 2; ++l) {
      write_matrix(mat(root, adapter_name(id, "down", l)), ad.down[l]);
      write_matrix(mat(root, adapter_name(id, "up", l)), ad.up[l]);
    }
  }
  for (const auto& d : a.domains) {
    const std::string id = std::to_string(d.domain_id);
    write_matrix(mat(root, "domain_" + id + "_alignment"), d.alignment.projection);
    write_matrix(mat(root, "domain_" + id + "_prototype"), d.prototype.transpose());
    save_dataset(d.graph, (root / "domains" / id).string());
  }
}

Artifacts load_checkpoint(const std::string& dir) {
  const fs::path root(dir);
  const fs::path manifest_path = root / "manifest.json";
  json manifest;
  try {
    manifest = json::parse(read_text(manifest_path));
  } catch (const json::exception& e) {
    throw DataError(manifest_path.string() + ": " + e.what());
  }

  Artifacts a;
  try {
    if (manifest.at("format") != "graphkeeper-artifacts") throw DataError(manifest_path.string() + ": not an artifact manifest");
    const int version = manifest.at("version").get<int>();
    if (version != kArtifactsVersion) {
      throw DataError(manifest_path.string() + ": artifact version " + std::to_string(version) + " unsupported (expected " +
                      std::to_string(kArtifactsVersion) + ")");
    }
    a.config = parse_config(read_text(root / "config.cfg"), (root / "config.cfg").string());
    a.projection_seed = manifest.at("projection").at("seed").get<std::uint64_t>();

    a.backbone.w1 = read_matrix(mat(root, "backbone_w1"));
    a.backbone.w2 = read_matrix(mat(root, "backbone_w2"));
    a.backbone.frozen = manifest.at("backbone_frozen").get<bool>();

    a.ridge.W = read_matrix(mat(root, "ridge_W"));
    a.ridge.M = read_matrix(mat(root, "ridge_M"));
    a.ridge.lambda = manifest.at("lambda").get<double>();
    for (const auto& b : manifest.at("blocks")) {
      a.ridge.blocks.push_back({b.at("domain_id").get<int>(), {b.at("begin").get<int>(), b.at("end").get<int>()}});
    }

    for (const auto& entry : manifest.at("adapters")) {
      LoraAdapter ad;
      ad.domain_id = entry.at("domain_id").get<int>();
      ad.rank = entry.at("rank").get<Index>();
      for (int l = 0; l < 2; ++l) {
        ad.down[l] = read_matrix(mat(root, adapter_name(ad.domain_id, "down", l)));
        ad.up[l] = read_matrix(mat(root, adapter_name(ad.domain_id, "up", l)));
      }
      ad.frozen = true;
      a.adapters.insert_frozen(std::move(ad));
    }

    const Matrix protos = read_matrix(mat(root, "embedding_prototypes"));
    const auto& tags = manifest.at("prototypes");
    if (static_cast<Index>(tags.size()) != protos.rows()) {
      throw DataError(manifest_path.string() + ": prototype tags do not match embedding_prototypes rows");
    }
    for (std::size_t i = 0; i < tags.size(); ++i) {
      a.embedding_prototypes.append({tags[i].at("domain_id").get<int>(), tags[i].at("cluster_id").get<int>(),
                                     protos.row(static_cast<Index>(i)).transpose()});
    }

    for (const auto& entry : manifest.at("domains")) {
      DomainRecord d;
      d.domain_id = entry.at("domain_id").get<int>();
      d.classes = {entry.at("class_begin").get<int>(), entry.at("class_end").get<int>()};
      const std::string id = std::to_string(d.domain_id);
      d.alignment.projection = read_matrix(mat(root, "domain_" + id + "_alignment"));
      d.prototype = read_matrix(mat(root, "domain_" + id + "_prototype")).transpose();
      d.graph = load_dataset((root / "domains" / id).string());
      a.domains.push_back(std::move(d));
    }
  } catch (const json::exception& e) {
    throw DataError(manifest_path.string() + ": " + e.what());
  }
  a.projection_params();
  return a;
}

}  // namespace gk
