#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "qmeta/exp/config.hpp"

namespace qmeta::exp {

/// Short revision of the source tree at configure time, "unknown" outside a checkout.
std::string git_revision();

struct RunManifest {
  std::string command;
  ExperimentConfig config;
  double wall_time_seconds = 0;
  int threads = 1;
  std::vector<std::filesystem::path> outputs;
};

/// {command, config_hash, seed, git_revision, wall_time_seconds, threads,
///  outputs, config}
void write_manifest(const std::filesystem::path& path, const RunManifest& m);

}  // namespace qmeta::exp
