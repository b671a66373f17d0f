#include "qmeta/embed/export.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>

#include "qmeta/parallel.hpp"

namespace qmeta::embed {

std::vector<EmbeddingRow> compute_embeddings(const std::vector<GraphInstance>& graphs,
                                             const std::vector<ProblemClass>& classes,
                                             const nn::ParameterStore& weights) {
  std::vector<EmbeddingRow> rows(graphs.size() * classes.size());
  parallel_for(rows.size(), [&](std::size_t k) {
    const ProblemClass c = classes[k / graphs.size()];
    const GraphInstance& g = graphs[k % graphs.size()];
    rows[k] = {g.id(), c, extract_embedding(weights, build_hetero_graph(c, g))};
  });
  return rows;
}

void write_embedding_csv(const std::filesystem::path& path, const std::vector<EmbeddingRow>& rows) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  const std::size_t d = rows.empty() ? 0 : rows.front().g.size();
  f << "id,class";
  for (std::size_t k = 1; k <= d; ++k) f << ",g_" << k;
  f << '\n';
  char buf[32];
  for (const auto& r : rows) {
    if (r.g.size() != d) throw std::invalid_argument("write_embedding_csv: ragged embedding rows");
    f << r.id << ',' << to_string(r.cls);
    for (double v : r.g) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      f << ',' << buf;
    }
    f << '\n';
  }
}

SeparationStats class_separation(const std::vector<EmbeddingRow>& rows) {
  std::map<ProblemClass, std::vector<const EmbeddingRow*>> groups;
  for (const auto& r : rows) groups[r.cls].push_back(&r);
  if (groups.size() < 2) throw std::invalid_argument("class_separation: need at least two classes");
  const std::size_t d = rows.front().g.size();
  auto dist = [d](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (std::size_t k = 0; k < d; ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    return std::sqrt(s);
  };
  std::vector<std::vector<double>> centroids;
  SeparationStats s;
  for (const auto& [cls, members] : groups) {
    std::vector<double> c(d, 0.0);
    for (const auto* r : members)
      for (std::size_t k = 0; k < d; ++k) c[k] += r->g[k] / static_cast<double>(members.size());
    for (const auto* r : members) s.intra_dispersion += dist(r->g, c) / static_cast<double>(rows.size());
    centroids.push_back(std::move(c));
  }
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < centroids.size(); ++a)
    for (std::size_t b = a + 1; b < centroids.size(); ++b, ++pairs) s.inter_centroid += dist(centroids[a], centroids[b]);
  s.inter_centroid /= static_cast<double>(pairs);
  return s;
}

}  // namespace qmeta::embed
