#pragma once

#include <cstdint>
#include <vector>

#include "qmeta/embed/hetero_graph.hpp"
#include "qmeta/nn/tape.hpp"
#include "qmeta/rng.hpp"

namespace qmeta::embed {

// Heterogeneous GNN over the three relations of a HeteroGraph. Each relation
// has its own two-round mean-aggregation stack (ReLU after round one, linear
// after round two) producing 32 features per variable node; the three are
// concatenated, fused by a 96-96-96 MLP, and a shared 96->1 head with a
// sigmoid gives the relaxed selection x.
inline constexpr std::size_t kNodeFeatures = 3;  // degree/n, 1, Q~_uu
inline constexpr std::size_t kRelationDim = 32;
inline constexpr std::size_t kEmbeddingDim = 3 * kRelationDim;
inline constexpr int kRounds = 2;

void init_unihetco(nn::ParameterStore& store, Rng& rng);

struct HeteroForward {
  nn::Var prob, obj, constr;  // n x 32 each
  nn::Var fused;              // n x 96
  nn::Var x;                  // n x 1, in (0, 1)
};

HeteroForward hetero_forward(nn::Tape& tape, const nn::ParameterStore& store, const HeteroGraph& hg);

struct NcoLoss {
  nn::Var obj, constr, total;
};

/// x'Q~x + sum_j max(0, (Ax - b)_j), both weights 1.
NcoLoss nco_loss(nn::Tape& tape, const HeteroGraph& hg, nn::Var x);

struct NcoValues {
  double obj = 0, constr = 0, total = 0;
};
NcoValues nco_loss_value(const HeteroGraph& hg, const std::vector<double>& x);

struct PretrainConfig {
  int epochs = 30;
  double lr = 1e-3;
  int batch = 32;
  std::uint64_t seed = 0;
};

struct PretrainResult {
  nn::ParameterStore weights;
  std::vector<double> loss_history;  // mean per-instance loss, one per epoch
};

/// Multi-domain pre-training. Every batch draws batch/K instances from each
/// of the K class datasets; the epoch length is set by the largest dataset.
PretrainResult pretrain_unihetco(const std::vector<std::vector<HeteroGraph>>& per_class, const PretrainConfig& cfg);

/// Mean over nodes of the concatenated per-relation embeddings (length 96).
std::vector<double> extract_embedding(const nn::ParameterStore& store, const HeteroGraph& hg);
std::vector<double> relaxed_solution(const nn::ParameterStore& store, const HeteroGraph& hg);

}  // namespace qmeta::embed
