#pragma once

#include <vector>

#include "qmeta/graph.hpp"
#include "qmeta/problem.hpp"

namespace qmeta::embed {

struct WeightedEdge {
  int u, v;  // u < v
  double weight;
};

struct Incidence {
  int var, constraint;
  double coefficient;
};

/// Variable nodes (one per vertex), constraint nodes (one per row of A) and
/// three relations over them: the problem graph, the objective couplings of
/// Q~, and the bipartite star expansion of A.
struct HeteroGraph {
  int n = 0;
  int m = 0;
  std::vector<Edge> prob_edges;
  std::vector<WeightedEdge> obj_edges;  // off-diagonal nonzeros of Q~
  std::vector<double> self_weight;      // diagonal of Q~
  std::vector<Incidence> constr_edges;  // nonzeros of A
  std::vector<double> rhs;              // b, one per constraint node
  QuboForm qubo;
};

HeteroGraph build_hetero_graph(const GraphInstance& g, const QuboForm& qubo);
inline HeteroGraph build_hetero_graph(ProblemClass c, const GraphInstance& g) {
  return build_hetero_graph(g, to_qubo(c, g));
}

}  // namespace qmeta::embed
