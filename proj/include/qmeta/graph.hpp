#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qmeta/rng.hpp"

namespace qmeta {

using Edge = std::pair<int, int>;

/// Undirected simple graph on vertices 0..n-1.
///
/// Edges are stored normalized (u < v) and sorted. Adjacency is kept as one
/// 64-bit row mask per vertex, which bounds n at 64; every consumer in this
/// project stays far below that (statevectors stop at 20 qubits).
class GraphInstance {
 public:
  static constexpr int kMaxVertices = 64;

  GraphInstance() = default;
  GraphInstance(int n, std::vector<Edge> edges, std::string id = {});

  int num_vertices() const { return n_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::string& id() const { return id_; }
  void set_id(std::string id) { id_ = std::move(id); }

  bool has_edge(int u, int v) const { return (adj_[u] >> v) & 1ULL; }
  std::uint64_t neighbor_mask(int v) const { return adj_[v]; }
  int degree(int v) const;
  std::vector<int> neighbors(int v) const;
  bool is_connected() const;

  /// Structural hash of (n, edges); independent of id.
  std::uint64_t structure_hash() const;

  bool operator==(const GraphInstance& o) const { return n_ == o.n_ && edges_ == o.edges_; }

 private:
  int n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::uint64_t> adj_;
  std::string id_;
};

GraphInstance complement(const GraphInstance& g);

/// Relabels vertex v to perm[v].
GraphInstance permute_vertices(const GraphInstance& g, const std::vector<int>& perm);

struct GenerationStats {
  long attempts = 0;
  long edges_drawn = 0;  // summed over all attempts, rejected ones included
};

/// Each of the n(n-1)/2 candidate pairs is included with probability k/n;
/// the draw is repeated until the graph is connected.
GraphInstance generate_random_connected_graph(int n, int k, Rng& rng, int max_attempts = 10000,
                                              GenerationStats* stats = nullptr);

/// Weisfeiler-Lehman colour refinement. Returns the final colour of each
/// vertex after `iterations` rounds, seeded with vertex degrees. Colours are
/// canonical hashes, so they are comparable across graphs.
std::vector<std::uint64_t> wl_colors(const GraphInstance& g, int iterations);

/// Isomorphism-invariant hash from WL refinement (3 rounds by default).
std::uint64_t wl_hash(const GraphInstance& g, int iterations = 3);

/// Exact isomorphism test by backtracking over WL colour classes.
bool are_isomorphic(const GraphInstance& a, const GraphInstance& b);

}  // namespace qmeta
