#include "qmeta/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace qmeta {

bool IsomorphismFilter::contains(const GraphInstance& g) const {
  auto it = buckets_.find(wl_hash(g));
  if (it == buckets_.end()) return false;
  for (auto idx : it->second)
    if (are_isomorphic(g, graphs_[idx])) return true;
  return false;
}

bool IsomorphismFilter::try_add(const GraphInstance& g) {
  const auto h = wl_hash(g);
  auto& bucket = buckets_[h];
  for (auto idx : bucket)
    if (are_isomorphic(g, graphs_[idx])) return false;
  bucket.push_back(graphs_.size());
  graphs_.push_back(g);
  return true;
}

Dataset generate_dataset(const DatasetSpec& spec) {
  if (spec.train_count < 1 || spec.test_count < 1) throw std::invalid_argument("generate_dataset: counts must be >= 1");
  Dataset ds;
  IsomorphismFilter filter;
  const int total = spec.train_count + spec.test_count;
  constexpr int kMaxRedraws = 100000;
  for (int i = 0; i < total; ++i) {
    const bool is_train = i < spec.train_count;
    Rng rng(derive_seed(spec.master_seed, static_cast<std::uint64_t>(i)));
    bool accepted = false;
    for (int attempt = 0; attempt < kMaxRedraws && !accepted; ++attempt) {
      const int n = is_train ? static_cast<int>(rng.uniform_int(spec.train_n_min, spec.train_n_max)) : spec.test_n;
      const int k = static_cast<int>(rng.uniform_int(std::min(spec.k_min, n - 1), n - 1));
      GraphInstance g = generate_random_connected_graph(n, k, rng);
      if (!filter.try_add(g)) continue;
      char buf[32];
      const int local = is_train ? i : i - spec.train_count;
      std::snprintf(buf, sizeof buf, "%s-%05d", is_train ? "train" : "test", local);
      g.set_id(buf);
      (is_train ? ds.train : ds.test).push_back(std::move(g));
      accepted = true;
    }
    if (!accepted) throw std::runtime_error("generate_dataset: could not find a new non-isomorphic graph");
  }
  return ds;
}

std::string dataset_to_jsonl(const Dataset& ds) {
  std::ostringstream out;
  auto emit = [&](const GraphInstance& g, const char* split) {
    nlohmann::ordered_json rec;
    rec["id"] = g.id();
    rec["n"] = g.num_vertices();
    auto edges = nlohmann::ordered_json::array();
    for (auto [u, v] : g.edges()) edges.push_back({u, v});
    rec["edges"] = std::move(edges);
    rec["split"] = split;
    out << rec.dump() << '\n';
  };
  for (const auto& g : ds.train) emit(g, "train");
  for (const auto& g : ds.test) emit(g, "test");
  return out.str();
}

void write_dataset_jsonl(const Dataset& ds, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f << dataset_to_jsonl(ds);
}

Dataset parse_dataset_jsonl(const std::string& text) {
  Dataset ds;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      auto rec = nlohmann::json::parse(line);
      std::vector<Edge> edges;
      for (const auto& e : rec.at("edges")) edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
      GraphInstance g(rec.at("n").get<int>(), std::move(edges), rec.at("id").get<std::string>());
      const auto split = rec.at("split").get<std::string>();
      if (split == "train")
        ds.train.push_back(std::move(g));
      else if (split == "test")
        ds.test.push_back(std::move(g));
      else
        throw std::runtime_error("unknown split '" + split + "'");
    } catch (const std::exception& e) {
      throw std::runtime_error("dataset line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return ds;
}

Dataset read_dataset_jsonl(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open dataset " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_dataset_jsonl(ss.str());
}

}  // namespace qmeta
