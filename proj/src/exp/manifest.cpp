#include "qmeta/exp/manifest.hpp"

#include <fstream>

#include <json.hpp>

#ifndef QMETA_GIT_REVISION
#define QMETA_GIT_REVISION "unknown"
#endif

namespace qmeta::exp {

std::string git_revision() { return QMETA_GIT_REVISION; }

void write_manifest(const std::filesystem::path& path, const RunManifest& m) {
  nlohmann::ordered_json j;
  j["command"] = m.command;
  j["config_hash"] = config_hash(m.config);
  j["seed"] = m.config.seed;
  j["git_revision"] = git_revision();
  j["wall_time_seconds"] = m.wall_time_seconds;
  j["threads"] = m.threads;
  j["outputs"] = nlohmann::ordered_json::array();
  for (const auto& p : m.outputs) j["outputs"].push_back(p.generic_string());
  j["config"] = nlohmann::json::parse(config_to_json(m.config));
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace qmeta::exp
