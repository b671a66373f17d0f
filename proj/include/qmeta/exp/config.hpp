#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qmeta/problem.hpp"

namespace qmeta::exp {

enum class Backend { None, Wl, UniHetCO };
enum class Method { Vanilla, MetaLstm, WlMetaLstm, UniMetaLstm };

std::string_view to_string(Backend b);
std::string_view to_string(Method m);
Backend parse_backend(std::string_view s);  // "none", "wl", "unihetco"
Method parse_method(std::string_view s);    // "vanilla", "meta-lstm", "wl-meta-lstm", "uni-meta-lstm"
Backend backend_of(Method m);               // Vanilla has none
Method method_of(Backend b);

inline constexpr std::array<int, 4> kSupportedDepths = {4, 6, 8, 10};

/// Raised for values outside the supported grid or malformed config files.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Mirrors the flat JSON config file; every key is optional there.
struct ExperimentConfig {
  std::vector<ProblemClass> classes{kAllClasses.begin(), kAllClasses.end()};
  std::vector<int> depths{4};
  std::vector<Method> methods{Method::Vanilla, Method::MetaLstm, Method::WlMetaLstm, Method::UniMetaLstm};
  std::vector<Backend> embeddings{Backend::UniHetCO};  // what train-meta trains
  std::uint64_t seed = 0;
  std::string dataset;  // empty: <out>/dataset.jsonl

  // dataset generation
  int train_count = 1000, test_count = 100;
  int train_n_min = 6, train_n_max = 10, test_n = 12;
  // 0 uses the whole split
  int train_limit = 0, test_limit = 0;

  // meta-optimizer
  int T = 10;
  int hidden = 48;
  int batch = 32;
  int epochs = 100;
  double lr = 1e-3;
  int fine_tune_steps = 5;
  double fine_tune_lr = 1e-3;

  // UniHetCO pre-training
  int pretrain_epochs = 30;
  int pretrain_batch = 32;
  double pretrain_lr = 1e-3;
  int pretrain_graphs_per_class = 0;  // 0: whole train split

  // evaluation
  int shots = 5000;
  bool exact_probabilities = false;
  int vanilla_max_steps = 500;
  double vanilla_lr = 0.01;
  double vanilla_tolerance = 1e-8;
};

/// Throws ConfigError naming the offending key.
void validate(const ExperimentConfig& cfg);
void validate_depth(int p);

std::string config_to_json(const ExperimentConfig& cfg);  // canonical, sorted keys
/// Starts from `base` and overrides the keys present. Unknown keys are errors.
ExperimentConfig config_from_json(const std::string& text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {});
/// 16 hex digits of FNV-1a over the canonical JSON.
std::string config_hash(const ExperimentConfig& cfg);

std::uint64_t fnv1a(std::string_view s);

}  // namespace qmeta::exp
