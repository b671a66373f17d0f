#include "qmeta/meta/model.hpp"

#include <cmath>
#include <stdexcept>

#include "qmeta/nn/layers.hpp"

namespace qmeta::meta {

MetaOptimizerModel MetaOptimizerModel::create(const MetaConfig& cfg, Rng& rng) {
  if (cfg.p < 1 || cfg.T < 1 || cfg.hidden < 1) throw std::invalid_argument("MetaOptimizerModel: bad config");
  MetaOptimizerModel m;
  m.config = cfg;
  const double bound = 1.0 / std::sqrt(static_cast<double>(cfg.hidden));
  nn::init_lstm(m.params, "lstm", m.input_size(), cfg.hidden, rng);
  m.params.add("W_out", nn::uniform_matrix(2 * cfg.p, cfg.hidden, bound, rng));
  if (cfg.embed_dim > 0)
    m.params.add("P_embed", nn::uniform_matrix(cfg.hidden, cfg.embed_dim,
                                               1.0 / std::sqrt(static_cast<double>(cfg.embed_dim)), rng));
  return m;
}

nn::Checkpoint to_checkpoint(const MetaOptimizerModel& m, long global_step, const std::string& config_hash,
                             std::map<std::string, std::string> metadata) {
  metadata["p"] = std::to_string(m.config.p);
  metadata["T"] = std::to_string(m.config.T);
  metadata["hidden"] = std::to_string(m.config.hidden);
  metadata["embed_dim"] = std::to_string(m.config.embed_dim);
  return nn::Checkpoint{m.params, global_step, config_hash, std::move(metadata)};
}

MetaOptimizerModel from_checkpoint(const nn::Checkpoint& ckpt) {
  MetaOptimizerModel m;
  try {
    m.config.p = std::stoi(ckpt.metadata.at("p"));
    m.config.T = std::stoi(ckpt.metadata.at("T"));
    m.config.hidden = std::stoul(ckpt.metadata.at("hidden"));
    m.config.embed_dim = std::stoul(ckpt.metadata.at("embed_dim"));
  } catch (const std::exception&) {
    throw std::runtime_error("checkpoint metadata lacks the meta-optimizer configuration");
  }
  m.params = ckpt.params;
  const auto& w = m.params.at("W_out");
  if (w.rows() != 2 * static_cast<std::size_t>(m.config.p) || w.cols() != m.config.hidden)
    throw std::runtime_error("checkpoint W_out shape does not match its metadata");
  if (m.conditioned() != m.params.contains("P_embed"))
    throw std::runtime_error("checkpoint P_embed presence does not match embed_dim");
  return m;
}

}  // namespace qmeta::meta
