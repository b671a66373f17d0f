#include "qmeta/exp/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace qmeta::exp {

using nlohmann::json;

std::string_view to_string(Backend b) {
  switch (b) {
    case Backend::None: return "none";
    case Backend::Wl: return "wl";
    case Backend::UniHetCO: return "unihetco";
  }
  return "?";
}

std::string_view to_string(Method m) {
  switch (m) {
    case Method::Vanilla: return "vanilla";
    case Method::MetaLstm: return "meta-lstm";
    case Method::WlMetaLstm: return "wl-meta-lstm";
    case Method::UniMetaLstm: return "uni-meta-lstm";
  }
  return "?";
}

Backend parse_backend(std::string_view s) {
  for (auto b : {Backend::None, Backend::Wl, Backend::UniHetCO})
    if (to_string(b) == s) return b;
  throw ConfigError("unknown embedding backend '" + std::string(s) + "' (expected none, wl or unihetco)");
}

Method parse_method(std::string_view s) {
  for (auto m : {Method::Vanilla, Method::MetaLstm, Method::WlMetaLstm, Method::UniMetaLstm})
    if (to_string(m) == s) return m;
  throw ConfigError("unknown method '" + std::string(s) +
                    "' (expected vanilla, meta-lstm, wl-meta-lstm or uni-meta-lstm)");
}

Backend backend_of(Method m) {
  switch (m) {
    case Method::WlMetaLstm: return Backend::Wl;
    case Method::UniMetaLstm: return Backend::UniHetCO;
    default: return Backend::None;
  }
}

Method method_of(Backend b) {
  switch (b) {
    case Backend::Wl: return Method::WlMetaLstm;
    case Backend::UniHetCO: return Method::UniMetaLstm;
    default: return Method::MetaLstm;
  }
}

void validate_depth(int p) {
  if (std::find(kSupportedDepths.begin(), kSupportedDepths.end(), p) == kSupportedDepths.end())
    throw ConfigError("depth " + std::to_string(p) + " is not in the supported grid {4, 6, 8, 10}");
}

namespace {

void require(bool ok, const char* key, const char* what) {
  if (!ok) throw ConfigError(std::string("config: '") + key + "' " + what);
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config: '") + key + "' has the wrong type");
  }
}

// Accepts a single value or an array of values.
template <class T, class Parse>
void read_list(const json& j, const char* key, std::vector<T>& out, Parse parse) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  out.clear();
  try {
    if (v.is_array())
      for (const auto& e : v) out.push_back(parse(e));
    else
      out.push_back(parse(v));
  } catch (const json::exception&) {
    throw ConfigError(std::string("config: '") + key + "' has the wrong type");
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: '") + key + "': " + e.what());
  }
}

}  // namespace

void validate(const ExperimentConfig& c) {
  require(!c.classes.empty(), "classes", "must not be empty");
  require(!c.depths.empty(), "depths", "must not be empty");
  for (int p : c.depths) validate_depth(p);
  require(!c.methods.empty(), "methods", "must not be empty");
  require(!c.embeddings.empty(), "embeddings", "must not be empty");
  require(c.train_count >= 0 && c.test_count >= 0, "train_count/test_count", "must be nonnegative");
  require(c.train_n_min >= 2 && c.train_n_min <= c.train_n_max, "train_n_min/train_n_max", "must satisfy 2 <= min <= max");
  require(c.train_n_max <= kMaxEnumerationQubits, "train_n_max", "exceeds the simulator limit");
  require(c.test_n >= 2 && c.test_n <= kMaxEnumerationQubits, "test_n", "must be in [2, 20]");
  require(c.train_limit >= 0 && c.test_limit >= 0, "train_limit/test_limit", "must be nonnegative");
  require(c.T >= 1, "T", "must be positive");
  require(c.hidden >= 1, "hidden", "must be positive");
  require(c.batch >= 1, "batch", "must be positive");
  require(c.epochs >= 0, "epochs", "must be nonnegative");
  require(c.lr > 0, "lr", "must be positive");
  require(c.fine_tune_steps >= 0, "fine_tune_steps", "must be nonnegative");
  require(c.fine_tune_lr > 0, "fine_tune_lr", "must be positive");
  require(c.pretrain_epochs >= 0, "pretrain_epochs", "must be nonnegative");
  require(c.pretrain_batch >= 1, "pretrain_batch", "must be positive");
  require(c.pretrain_lr > 0, "pretrain_lr", "must be positive");
  require(c.pretrain_graphs_per_class >= 0, "pretrain_graphs_per_class", "must be nonnegative");
  require(c.shots >= 1, "shots", "must be positive");
  require(c.vanilla_max_steps >= 0, "vanilla_max_steps", "must be nonnegative");
  require(c.vanilla_lr > 0, "vanilla_lr", "must be positive");
  require(c.vanilla_tolerance >= 0, "vanilla_tolerance", "must be nonnegative");
}

std::string config_to_json(const ExperimentConfig& c) {
  json j;  // object keys are kept sorted
  j["classes"] = json::array();
  for (auto cls : c.classes) j["classes"].push_back(std::string(to_string(cls)));
  j["depths"] = c.depths;
  j["methods"] = json::array();
  for (auto m : c.methods) j["methods"].push_back(std::string(to_string(m)));
  j["embeddings"] = json::array();
  for (auto b : c.embeddings) j["embeddings"].push_back(std::string(to_string(b)));
  j["seed"] = c.seed;
  j["dataset"] = c.dataset;
  j["train_count"] = c.train_count;
  j["test_count"] = c.test_count;
  j["train_n_min"] = c.train_n_min;
  j["train_n_max"] = c.train_n_max;
  j["test_n"] = c.test_n;
  j["train_limit"] = c.train_limit;
  j["test_limit"] = c.test_limit;
  j["T"] = c.T;
  j["hidden"] = c.hidden;
  j["batch"] = c.batch;
  j["epochs"] = c.epochs;
  j["lr"] = c.lr;
  j["fine_tune_steps"] = c.fine_tune_steps;
  j["fine_tune_lr"] = c.fine_tune_lr;
  j["pretrain_epochs"] = c.pretrain_epochs;
  j["pretrain_batch"] = c.pretrain_batch;
  j["pretrain_lr"] = c.pretrain_lr;
  j["pretrain_graphs_per_class"] = c.pretrain_graphs_per_class;
  j["shots"] = c.shots;
  j["exact_probabilities"] = c.exact_probabilities;
  j["vanilla_max_steps"] = c.vanilla_max_steps;
  j["vanilla_lr"] = c.vanilla_lr;
  j["vanilla_tolerance"] = c.vanilla_tolerance;
  return j.dump();
}

ExperimentConfig config_from_json(const std::string& text, ExperimentConfig c) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  const json known = json::parse(config_to_json(c));
  for (const auto& [key, _] : j.items())
    if (!known.contains(key)) throw ConfigError("config: unknown key '" + key + "'");

  read_list(j, "classes", c.classes, [](const json& e) { return parse_problem_class(e.get<std::string>()); });
  read_list(j, "depths", c.depths, [](const json& e) { return e.get<int>(); });
  read_list(j, "methods", c.methods, [](const json& e) { return parse_method(e.get<std::string>()); });
  read_list(j, "embeddings", c.embeddings, [](const json& e) { return parse_backend(e.get<std::string>()); });
  read(j, "seed", c.seed);
  read(j, "dataset", c.dataset);
  read(j, "train_count", c.train_count);
  read(j, "test_count", c.test_count);
  read(j, "train_n_min", c.train_n_min);
  read(j, "train_n_max", c.train_n_max);
  read(j, "test_n", c.test_n);
  read(j, "train_limit", c.train_limit);
  read(j, "test_limit", c.test_limit);
  read(j, "T", c.T);
  read(j, "hidden", c.hidden);
  read(j, "batch", c.batch);
  read(j, "epochs", c.epochs);
  read(j, "lr", c.lr);
  read(j, "fine_tune_steps", c.fine_tune_steps);
  read(j, "fine_tune_lr", c.fine_tune_lr);
  read(j, "pretrain_epochs", c.pretrain_epochs);
  read(j, "pretrain_batch", c.pretrain_batch);
  read(j, "pretrain_lr", c.pretrain_lr);
  read(j, "pretrain_graphs_per_class", c.pretrain_graphs_per_class);
  read(j, "shots", c.shots);
  read(j, "exact_probabilities", c.exact_probabilities);
  read(j, "vanilla_max_steps", c.vanilla_max_steps);
  read(j, "vanilla_lr", c.vanilla_lr);
  read(j, "vanilla_tolerance", c.vanilla_tolerance);
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str(), std::move(base));
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const ExperimentConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(config_to_json(cfg))));
  return buf;
}

}  // namespace qmeta::exp
