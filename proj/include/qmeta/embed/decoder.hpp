#pragma once

#include <vector>

#include "qmeta/problem.hpp"

namespace qmeta::embed {

/// Projects relaxed scores onto a feasible bitstring. Vertices are visited by
/// score (ties broken by vertex index):
///   MaxCut     x_v >= 0.5 picks the side, then one sweep of improving flips
///   MIS        add v if it has no selected neighbour
///   MaxClique  add v if it is adjacent to every selected vertex
///   MVC        start from all vertices, drop v (lowest score first) while
///              every edge stays covered
Bitstring greedy_decode(ProblemClass c, const GraphInstance& g, const std::vector<double>& scores);

}  // namespace qmeta::embed
