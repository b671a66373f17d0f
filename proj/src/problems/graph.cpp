#include "qmeta/graph.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <map>
#include <stdexcept>

namespace qmeta {

GraphInstance::GraphInstance(int n, std::vector<Edge> edges, std::string id) : n_(n), id_(std::move(id)) {
  if (n < 1 || n > kMaxVertices) throw std::invalid_argument("GraphInstance: vertex count out of range");
  adj_.assign(n, 0);
  for (auto [u, v] : edges) {
    if (u == v) throw std::invalid_argument("GraphInstance: self-loop");
    if (u < 0 || v < 0 || u >= n || v >= n) throw std::invalid_argument("GraphInstance: endpoint out of range");
    if (u > v) std::swap(u, v);
    if (has_edge(u, v)) throw std::invalid_argument("GraphInstance: duplicate edge");
    adj_[u] |= 1ULL << v;
    adj_[v] |= 1ULL << u;
    edges_.emplace_back(u, v);
  }
  std::sort(edges_.begin(), edges_.end());
}

int GraphInstance::degree(int v) const { return std::popcount(adj_[v]); }

std::vector<int> GraphInstance::neighbors(int v) const {
  std::vector<int> out;
  for (std::uint64_t m = adj_[v]; m; m &= m - 1) out.push_back(std::countr_zero(m));
  return out;
}

bool GraphInstance::is_connected() const {
  if (n_ == 0) return false;
  std::uint64_t seen = 1, frontier = 1;
  while (frontier) {
    std::uint64_t next = 0;
    for (std::uint64_t m = frontier; m; m &= m - 1) next |= adj_[std::countr_zero(m)];
    frontier = next & ~seen;
    seen |= next;
  }
  const std::uint64_t all = n_ == 64 ? ~0ULL : ((1ULL << n_) - 1);
  return seen == all;
}

std::uint64_t GraphInstance::structure_hash() const {
  std::uint64_t h = mix64(static_cast<std::uint64_t>(n_));
  for (auto [u, v] : edges_) h = mix64(h ^ (static_cast<std::uint64_t>(u) << 32 | static_cast<std::uint64_t>(v)));
  return h;
}

GraphInstance complement(const GraphInstance& g) {
  const int n = g.num_vertices();
  std::vector<Edge> edges;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (!g.has_edge(u, v)) edges.emplace_back(u, v);
  return GraphInstance(n, std::move(edges), g.id());
}

GraphInstance permute_vertices(const GraphInstance& g, const std::vector<int>& perm) {
  if (static_cast<int>(perm.size()) != g.num_vertices()) throw std::invalid_argument("permute_vertices: size mismatch");
  std::vector<Edge> edges;
  edges.reserve(g.edges().size());
  for (auto [u, v] : g.edges()) edges.emplace_back(perm[u], perm[v]);
  return GraphInstance(g.num_vertices(), std::move(edges), g.id());
}

GraphInstance generate_random_connected_graph(int n, int k, Rng& rng, int max_attempts, GenerationStats* stats) {
  if (n < 2) throw std::invalid_argument("generate_random_connected_graph: n must be >= 2");
  if (k < 1 || k > n - 1) throw std::invalid_argument("generate_random_connected_graph: k must lie in [1, n-1]");
  const double prob = static_cast<double>(k) / n;
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    std::vector<Edge> edges;
    for (int u = 0; u < n; ++u)
      for (int v = u + 1; v < n; ++v)
        if (rng.bernoulli(prob)) edges.emplace_back(u, v);
    if (stats) {
      ++stats->attempts;
      stats->edges_drawn += static_cast<long>(edges.size());
    }
    GraphInstance g(n, std::move(edges));
    if (g.is_connected()) {
      char buf[24];
      std::snprintf(buf, sizeof buf, "g%016llx", static_cast<unsigned long long>(g.structure_hash()));
      g.set_id(buf);
      return g;
    }
  }
  throw std::runtime_error("generate_random_connected_graph: rejection budget exceeded (density k/n too low)");
}

std::vector<std::uint64_t> wl_colors(const GraphInstance& g, int iterations) {
  const int n = g.num_vertices();
  std::vector<std::uint64_t> color(n), next(n);
  for (int v = 0; v < n; ++v) color[v] = mix64(static_cast<std::uint64_t>(g.degree(v)));
  std::vector<std::uint64_t> nb;
  for (int it = 0; it < iterations; ++it) {
    for (int v = 0; v < n; ++v) {
      nb.clear();
      for (int u : g.neighbors(v)) nb.push_back(color[u]);
      std::sort(nb.begin(), nb.end());
      std::uint64_t h = mix64(color[v] ^ 0x5bd1e995ULL);
      for (auto c : nb) h = mix64(h ^ c);
      next[v] = h;
    }
    color.swap(next);
  }
  return color;
}

std::uint64_t wl_hash(const GraphInstance& g, int iterations) {
  auto colors = wl_colors(g, iterations);
  std::sort(colors.begin(), colors.end());
  std::uint64_t h = mix64(static_cast<std::uint64_t>(g.num_vertices()) << 32 | static_cast<std::uint64_t>(g.num_edges()));
  for (auto c : colors) h = mix64(h ^ c);
  return h;
}

namespace {

struct IsoSearch {
  const GraphInstance& a;
  const GraphInstance& b;
  const std::vector<std::uint64_t>& ca;
  const std::vector<std::uint64_t>& cb;
  std::vector<int> order;  // vertices of a, in assignment order
  std::vector<int> map_ab;
  std::uint64_t used_b = 0;

  bool extend(std::size_t depth) {
    if (depth == order.size()) return true;
    const int va = order[depth];
    for (int vb = 0; vb < b.num_vertices(); ++vb) {
      if ((used_b >> vb) & 1ULL) continue;
      if (ca[va] != cb[vb]) continue;
      bool ok = true;
      for (std::size_t d = 0; d < depth && ok; ++d) {
        const int ua = order[d];
        ok = a.has_edge(va, ua) == b.has_edge(vb, map_ab[ua]);
      }
      if (!ok) continue;
      map_ab[va] = vb;
      used_b |= 1ULL << vb;
      if (extend(depth + 1)) return true;
      used_b &= ~(1ULL << vb);
    }
    return false;
  }
};

}  // namespace

bool are_isomorphic(const GraphInstance& a, const GraphInstance& b) {
  if (a.num_vertices() != b.num_vertices() || a.num_edges() != b.num_edges()) return false;
  const int n = a.num_vertices();
  const int rounds = 3;
  auto ca = wl_colors(a, rounds);
  auto cb = wl_colors(b, rounds);
  {
    auto sa = ca, sb = cb;
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    if (sa != sb) return false;
  }
  // Assign rarest colour classes first, then BFS-ish by connectivity to
  // already ordered vertices, which prunes early.
  std::map<std::uint64_t, int> freq;
  for (auto c : ca) ++freq[c];
  std::vector<int> order;
  std::vector<bool> placed(n, false);
  for (int step = 0; step < n; ++step) {
    int best = -1;
    long best_key = 0;
    for (int v = 0; v < n; ++v) {
      if (placed[v]) continue;
      int links = 0;
      for (int u : order) links += a.has_edge(u, v);
      const long key = static_cast<long>(links) * 1000 - freq[ca[v]];
      if (best < 0 || key > best_key) {
        best = v;
        best_key = key;
      }
    }
    placed[best] = true;
    order.push_back(best);
  }
  IsoSearch search{a, b, ca, cb, std::move(order), std::vector<int>(n, -1)};
  return search.extend(0);
}

}  // namespace qmeta
