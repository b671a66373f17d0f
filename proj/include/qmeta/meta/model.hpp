#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "qmeta/nn/checkpoint.hpp"
#include "qmeta/nn/tape.hpp"
#include "qmeta/rng.hpp"

namespace qmeta::meta {

struct MetaConfig {
  int p = 4;
  int T = 10;
  std::size_t hidden = 48;
  std::size_t embed_dim = 0;  // 0: unconditioned, no P_embed

  bool operator==(const MetaConfig&) const = default;
};

/// LSTM over z_t = [E~_{t-1}, theta_{t-1}] (size 1 + 2p), output map
/// theta_t = W_out h~_t with h~_t = h_t + P_embed g when conditioned.
struct MetaOptimizerModel {
  MetaConfig config;
  nn::ParameterStore params;

  std::size_t input_size() const { return 1 + 2 * static_cast<std::size_t>(config.p); }
  bool conditioned() const { return config.embed_dim > 0; }

  static MetaOptimizerModel create(const MetaConfig& cfg, Rng& rng);
};

nn::Checkpoint to_checkpoint(const MetaOptimizerModel& m, long global_step, const std::string& config_hash,
                             std::map<std::string, std::string> metadata = {});
MetaOptimizerModel from_checkpoint(const nn::Checkpoint& ckpt);

}  // namespace qmeta::meta
