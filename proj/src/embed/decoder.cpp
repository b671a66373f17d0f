#include "qmeta/embed/decoder.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace qmeta::embed {

namespace {

std::vector<int> by_score(const std::vector<double>& x, bool descending) {
  std::vector<int> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return descending ? x[a] > x[b] : x[a] < x[b]; });
  return order;
}

}  // namespace

Bitstring greedy_decode(ProblemClass c, const GraphInstance& g, const std::vector<double>& scores) {
  const int n = g.num_vertices();
  if (static_cast<int>(scores.size()) != n) throw std::invalid_argument("greedy_decode: score length mismatch");
  Bitstring x(n, 0);
  switch (c) {
    case ProblemClass::MaxCut: {
      for (int v = 0; v < n; ++v) x[v] = scores[v] >= 0.5;
      for (int v : by_score(scores, true)) {
        int same = 0, other = 0;
        for (int u : g.neighbors(v)) (x[u] == x[v] ? same : other)++;
        if (same > other) x[v] ^= 1;
      }
      break;
    }
    case ProblemClass::MIS:
      for (int v : by_score(scores, true)) {
        bool free = true;
        for (int u : g.neighbors(v)) free = free && !x[u];
        if (free) x[v] = 1;
      }
      break;
    case ProblemClass::MaxClique:
      for (int v : by_score(scores, true)) {
        bool joins = true;
        for (int u = 0; u < n; ++u) joins = joins && (!x[u] || g.has_edge(u, v));
        if (joins) x[v] = 1;
      }
      break;
    case ProblemClass::MVC:
      std::fill(x.begin(), x.end(), 1);
      for (int v : by_score(scores, false)) {
        bool removable = true;
        for (int u : g.neighbors(v)) removable = removable && x[u];
        if (removable) x[v] = 0;
      }
      break;
  }
  return x;
}

}  // namespace qmeta::embed
