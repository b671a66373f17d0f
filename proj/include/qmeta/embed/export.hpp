#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "qmeta/embed/gnn.hpp"

namespace qmeta::embed {

struct EmbeddingRow {
  std::string id;
  ProblemClass cls;
  std::vector<double> g;
};

/// UniHetCO embeddings for every (class, graph) pair, classes outermost.
std::vector<EmbeddingRow> compute_embeddings(const std::vector<GraphInstance>& graphs,
                                             const std::vector<ProblemClass>& classes,
                                             const nn::ParameterStore& weights);

/// CSV with header id,class,g_1..g_d.
void write_embedding_csv(const std::filesystem::path& path, const std::vector<EmbeddingRow>& rows);

inline void export_embeddings(const std::vector<GraphInstance>& graphs, const std::vector<ProblemClass>& classes,
                              const nn::ParameterStore& weights, const std::filesystem::path& path) {
  write_embedding_csv(path, compute_embeddings(graphs, classes, weights));
}

struct SeparationStats {
  double inter_centroid = 0;  // mean pairwise distance between class centroids
  double intra_dispersion = 0;  // mean distance of a point to its class centroid
};
SeparationStats class_separation(const std::vector<EmbeddingRow>& rows);

}  // namespace qmeta::embed
