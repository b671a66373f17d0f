#pragma once

#include <vector>

#include "qmeta/graph.hpp"

namespace qmeta::embed {

inline constexpr int kWlDim = 48;

/// Structure-only graph embedding used in place of Graph2Vec: the WL colours
/// of every vertex after 0..iterations refinement rounds are hashed into a
/// dim-bucket count vector, which is then L2-normalized. Training-free and
/// blind to the problem class by construction.
std::vector<double> wl_embed(const GraphInstance& g, int dim = kWlDim, int iterations = 3);

}  // namespace qmeta::embed
