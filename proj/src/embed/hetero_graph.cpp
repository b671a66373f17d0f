#include "qmeta/embed/hetero_graph.hpp"

#include <stdexcept>

namespace qmeta::embed {

HeteroGraph build_hetero_graph(const GraphInstance& g, const QuboForm& qubo) {
  const int n = g.num_vertices();
  if (qubo.num_vars() != n) throw std::invalid_argument("build_hetero_graph: QUBO size does not match the graph");
  HeteroGraph hg;
  hg.n = n;
  hg.m = qubo.num_constraints();
  hg.prob_edges = g.edges();
  hg.self_weight.resize(n);
  for (int u = 0; u < n; ++u) {
    hg.self_weight[u] = qubo.Qtilde(u, u);
    for (int v = u + 1; v < n; ++v)
      if (qubo.Qtilde(u, v) != 0.0) hg.obj_edges.push_back({u, v, qubo.Qtilde(u, v)});
  }
  for (int j = 0; j < hg.m; ++j)
    for (int v = 0; v < n; ++v)
      if (qubo.A(j, v) != 0.0) hg.constr_edges.push_back({v, j, qubo.A(j, v)});
  hg.rhs = qubo.b;
  hg.qubo = qubo;
  return hg;
}

}  // namespace qmeta::embed
