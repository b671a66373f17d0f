#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "qmeta/nn/tape.hpp"

namespace qmeta::nn {

// On disk a checkpoint is two files sharing a stem:
//   <stem>.bin   every tensor as little-endian float64, concatenated in name order
//   <stem>.json  {"global_step", "config_hash", "blob", "metadata",
//                 "tensors": [{"name", "shape", "offset", "byte_len"}, ...]}
struct Checkpoint {
  ParameterStore params;
  long global_step = 0;
  std::string config_hash;
  std::map<std::string, std::string> metadata;
};

void save_checkpoint(const std::filesystem::path& stem, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& stem);
bool checkpoint_exists(const std::filesystem::path& stem);

}  // namespace qmeta::nn
