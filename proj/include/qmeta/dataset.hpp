#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "qmeta/graph.hpp"

namespace qmeta {

enum class Split { Train, Test };

struct DatasetRecord {
  GraphInstance graph;
  Split split = Split::Train;
};

struct DatasetSpec {
  int train_count = 1000;
  int test_count = 100;
  int train_n_min = 6;
  int train_n_max = 10;
  int test_n = 12;
  int k_min = 3;
  std::uint64_t master_seed = 0;
};

struct Dataset {
  std::vector<GraphInstance> train;
  std::vector<GraphInstance> test;
};

/// Accepts graphs only when they are non-isomorphic to everything accepted
/// so far. WL hashes bucket the candidates and an exact check runs on
/// collisions.
class IsomorphismFilter {
 public:
  bool contains(const GraphInstance& g) const;
  /// Returns false (and does not insert) when an isomorphic copy exists.
  bool try_add(const GraphInstance& g);
  std::size_t size() const { return graphs_.size(); }

 private:
  std::vector<GraphInstance> graphs_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> buckets_;
};

/// n and k are drawn per graph (k uniform in [k_min, n-1]); each record index
/// owns a derived random stream. Non-isomorphism is enforced across train and
/// test jointly.
Dataset generate_dataset(const DatasetSpec& spec);

void write_dataset_jsonl(const Dataset& ds, const std::filesystem::path& path);
std::string dataset_to_jsonl(const Dataset& ds);
Dataset read_dataset_jsonl(const std::filesystem::path& path);
Dataset parse_dataset_jsonl(const std::string& text);

}  // namespace qmeta
