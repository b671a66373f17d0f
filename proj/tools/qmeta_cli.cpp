#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>

#include <CLI11.hpp>

#include "qmeta/dataset.hpp"
#include "qmeta/embed/export.hpp"
#include "qmeta/embed/wl.hpp"
#include "qmeta/exp/experiments.hpp"
#include "qmeta/exp/manifest.hpp"
#include "qmeta/parallel.hpp"

namespace fs = std::filesystem;
using namespace qmeta;
using namespace qmeta::exp;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitMissingData = 2;
constexpr int kExitMissingCheckpoint = 3;

struct DatasetMissing : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string config_path;
  std::string out = "runs";
  int threads = 1;
};

// Options shared by the subcommands that pick cells out of the grid. Empty
// vectors fall back to the config.
struct Selection {
  std::string data;
  std::vector<std::string> classes, methods, embeddings, sources, targets;
  std::vector<int> depths;
};

struct Run {
  ExperimentConfig cfg;
  Layout layout;
  std::vector<fs::path> outputs;

  fs::path output(const std::string& name) {
    outputs.push_back(name);
    return layout.root / name;
  }
};

const std::vector<std::string> kClassNames = {"maxcut", "mis", "maxclique", "mvc"};
const std::vector<std::string> kMethodNames = {"vanilla", "meta-lstm", "wl-meta-lstm", "uni-meta-lstm"};
const std::vector<std::string> kBackendNames = {"none", "wl", "unihetco"};

std::vector<ProblemClass> classes_or(const std::vector<std::string>& names, const std::vector<ProblemClass>& fallback) {
  if (names.empty()) return fallback;
  std::vector<ProblemClass> out;
  for (const auto& n : names) out.push_back(parse_problem_class(n));
  return out;
}

std::vector<int> depths_or(const std::vector<int>& depths, const std::vector<int>& fallback) {
  for (int p : depths) validate_depth(p);
  return depths.empty() ? fallback : depths;
}

std::vector<Method> methods_or(const std::vector<std::string>& names, const std::vector<Method>& fallback) {
  if (names.empty()) return fallback;
  std::vector<Method> out;
  for (const auto& n : names) out.push_back(parse_method(n));
  return out;
}

fs::path dataset_path(const Run& run, const Selection& sel) {
  if (!sel.data.empty()) return sel.data;
  if (!run.cfg.dataset.empty()) return run.cfg.dataset;
  return run.layout.root / "dataset.jsonl";
}

Dataset load_dataset(const Run& run, const Selection& sel) {
  const auto path = dataset_path(run, sel);
  if (!fs::exists(path)) throw DatasetMissing("dataset not found: " + path.string() + " (run gen-data first)");
  auto ds = read_dataset_jsonl(path);
  auto clip = [](std::vector<GraphInstance>& v, int limit) {
    if (limit > 0 && v.size() > static_cast<std::size_t>(limit)) v.resize(static_cast<std::size_t>(limit));
  };
  clip(ds.train, run.cfg.train_limit);
  clip(ds.test, run.cfg.test_limit);
  return ds;
}

void log(const std::string& msg) { std::cerr << "[qmeta] " << msg << '\n'; }

std::string cell(ProblemClass c, int p) { return std::string(to_string(c)) + " p=" + std::to_string(p); }

// --- subcommands -----------------------------------------------------------

void gen_data(Run& run, std::optional<int> train, std::optional<int> test, bool out_given) {
  if (train) run.cfg.train_count = *train;
  if (test) run.cfg.test_count = *test;
  validate(run.cfg);
  fs::path path = run.layout.root;
  if (!out_given || path.extension() != ".jsonl") path /= "dataset.jsonl";
  DatasetSpec spec{.train_count = run.cfg.train_count,
                   .test_count = run.cfg.test_count,
                   .train_n_min = run.cfg.train_n_min,
                   .train_n_max = run.cfg.train_n_max,
                   .test_n = run.cfg.test_n,
                   .master_seed = run.cfg.seed};
  const auto ds = generate_dataset(spec);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_dataset_jsonl(ds, path);
  run.layout.root = path.has_parent_path() ? path.parent_path() : fs::path(".");
  run.outputs.push_back(path.filename());
  log("wrote " + std::to_string(ds.train.size()) + " train / " + std::to_string(ds.test.size()) + " test graphs to " +
      path.string());
}

void pretrain_embed(Run& run, const Selection& sel) {
  const auto ds = load_dataset(run, sel);
  const auto classes = classes_or(sel.classes, run.cfg.classes);
  if (run.cfg.pretrain_batch % static_cast<int>(classes.size()) != 0)
    throw ConfigError("pretrain_batch must be a multiple of the number of classes (" + std::to_string(classes.size()) +
                      ")");
  std::vector<GraphInstance> graphs = ds.train;
  const int per_class = run.cfg.pretrain_graphs_per_class;
  if (per_class > 0 && graphs.size() > static_cast<std::size_t>(per_class)) graphs.resize(static_cast<std::size_t>(per_class));
  if (graphs.empty()) throw std::runtime_error("pretrain-embed: the train split is empty");

  std::vector<std::vector<embed::HeteroGraph>> per_domain(classes.size());
  for (std::size_t k = 0; k < classes.size(); ++k) {
    per_domain[k].resize(graphs.size());
    parallel_for(graphs.size(),
                 [&](std::size_t i) { per_domain[k][i] = embed::build_hetero_graph(classes[k], graphs[i]); });
  }
  log("pre-training UniHetCO on " + std::to_string(graphs.size()) + " graphs x " + std::to_string(classes.size()) +
      " classes");
  auto res = embed::pretrain_unihetco(per_domain, embed::PretrainConfig{.epochs = run.cfg.pretrain_epochs,
                                                                        .lr = run.cfg.pretrain_lr,
                                                                        .batch = run.cfg.pretrain_batch,
                                                                        .seed = stream_seed(run.cfg.seed, "pretrain")});
  std::string class_list;
  for (auto c : classes) class_list += (class_list.empty() ? "" : ",") + std::string(to_string(c));
  nn::save_checkpoint(run.layout.gnn_checkpoint(),
                      nn::Checkpoint{res.weights, static_cast<long>(res.loss_history.size()), config_hash(run.cfg),
                                     {{"model", "unihetco"}, {"classes", class_list}}});
  run.outputs.push_back("checkpoints/unihetco.json");
  run.outputs.push_back("checkpoints/unihetco.bin");

  std::ofstream out(run.output("pretrain_log.csv"), std::ios::binary);
  out << "epoch,mean_loss\n";
  char buf[32];
  for (std::size_t e = 0; e < res.loss_history.size(); ++e) {
    std::snprintf(buf, sizeof buf, "%.17g", res.loss_history[e]);
    out << e + 1 << ',' << buf << '\n';
  }
}

void train_meta(Run& run, const Selection& sel) {
  const auto ds = load_dataset(run, sel);
  if (ds.train.empty()) throw std::runtime_error("train-meta: the train split is empty");
  std::vector<Backend> backends = run.cfg.embeddings;
  if (!sel.embeddings.empty()) {
    backends.clear();
    for (const auto& b : sel.embeddings) backends.push_back(parse_backend(b));
  }
  std::optional<nn::ParameterStore> gnn;
  for (auto b : backends)
    if (b == Backend::UniHetCO && !gnn) gnn = load_gnn(run.layout);

  for (auto c : classes_or(sel.classes, run.cfg.classes))
    for (int p : depths_or(sel.depths, run.cfg.depths))
      for (auto b : backends) {
        const Method m = method_of(b);
        log("training " + std::string(to_string(m)) + " on " + cell(c, p));
        const auto data = make_instances(b, c, ds.train, gnn ? &*gnn : nullptr);
        const auto res = train_meta_model(run.cfg, b, c, p, data);
        const auto stem = run.layout.checkpoint(m, c, p);
        nn::save_checkpoint(stem, meta::to_checkpoint(res.model, res.global_step, config_hash(run.cfg),
                                                      {{"class", std::string(to_string(c))},
                                                       {"method", std::string(to_string(m))},
                                                       {"best_epoch", std::to_string(res.best_epoch)}}));
        run.outputs.push_back(fs::relative(stem, run.layout.root).string() + ".json");
        run.outputs.push_back(fs::relative(stem, run.layout.root).string() + ".bin");
        write_training_log(run.layout.train_log(m, c, p), res);
        run.outputs.push_back(run.layout.train_log(m, c, p).filename());
      }
}

void eval_single(Run& run, const Selection& sel, bool dump_diagonals) {
  const auto ds = load_dataset(run, sel);
  if (ds.test.empty()) throw std::runtime_error("eval-single: the test split is empty");
  const auto classes = classes_or(sel.classes, run.cfg.classes);
  const auto depths = depths_or(sel.depths, run.cfg.depths);
  const auto methods = methods_or(sel.methods, run.cfg.methods);

  // Resolve every checkpoint before spending time on evaluation.
  std::map<std::tuple<Method, ProblemClass, int>, meta::MetaOptimizerModel> models;
  std::optional<nn::ParameterStore> gnn;
  for (auto c : classes)
    for (int p : depths)
      for (auto m : methods) {
        if (m == Method::Vanilla) continue;
        models.emplace(std::tuple{m, c, p}, load_meta_model(run.layout, m, c, p));
        if (m == Method::UniMetaLstm && !gnn) gnn = load_gnn(run.layout);
      }

  std::vector<ResultRow> rows;
  for (auto c : classes)
    for (int p : depths)
      for (auto m : methods) {
        log("evaluating " + std::string(to_string(m)) + " on " + cell(c, p));
        const meta::MetaOptimizerModel* model = m == Method::Vanilla ? nullptr : &models.at({m, c, p});
        rows.push_back({c, p, m, evaluate_cell(run.cfg, m, c, p, ds.test, model, gnn ? &*gnn : nullptr), run.cfg.seed});
      }
  write_results_csv(run.output("results-single.csv"), rows);

  if (dump_diagonals)
    for (auto c : classes)
      for (std::size_t i = 0; i < ds.test.size(); ++i) {
        const std::string name = "diagonals/" + std::string(to_string(c)) + "-" + ds.test[i].id() + ".csv";
        write_diagonal_csv(build_cost_hamiltonian(c, ds.test[i]), run.output(name));
      }
}

void eval_transfer(Run& run, const Selection& sel, const std::string& method_name, bool full) {
  const auto ds = load_dataset(run, sel);
  if (ds.test.empty()) throw std::runtime_error("eval-transfer: the test split is empty");
  const Method m = parse_method(method_name);
  if (m == Method::Vanilla) throw ConfigError("eval-transfer: vanilla has no trained model to transfer");

  std::vector<TransferCell> cells;
  if (full) {
    cells = transfer_grid({kAllClasses.begin(), kAllClasses.end()}, {kSupportedDepths.begin(), kSupportedDepths.end()});
  } else {
    const auto sources = classes_or(sel.sources, run.cfg.classes);
    const auto targets = classes_or(sel.targets, run.cfg.classes);
    const bool single_pair = sources.size() == 1 && targets.size() == 1;
    for (auto s : sources)
      for (auto t : targets)
        if (s != t || single_pair)
          for (int p : depths_or(sel.depths, run.cfg.depths)) cells.push_back({s, t, p});
  }

  std::map<std::pair<ProblemClass, int>, meta::MetaOptimizerModel> sources;
  for (const auto& c : cells)
    if (!sources.contains({c.source, c.depth}))
      sources.emplace(std::pair{c.source, c.depth}, load_meta_model(run.layout, m, c.source, c.depth));
  std::optional<nn::ParameterStore> gnn;
  if (m == Method::UniMetaLstm) gnn = load_gnn(run.layout);

  std::vector<TransferResult> rows;
  for (const auto& c : cells) {
    log("transfer " + std::string(to_string(c.source)) + " -> " + cell(c.target, c.depth));
    rows.push_back(evaluate_transfer(run.cfg, m, c, sources.at({c.source, c.depth}), ds.test, gnn ? &*gnn : nullptr));
  }
  write_transfer_csv(run.output("results-transfer.csv"), rows);
}

void diversity(Run& run, const Selection& sel) {
  const auto ds = load_dataset(run, sel);
  std::vector<Method> methods = methods_or(sel.methods, {Method::MetaLstm, Method::UniMetaLstm});
  std::optional<nn::ParameterStore> gnn;
  for (auto c : classes_or(sel.classes, run.cfg.classes))
    for (int p : depths_or(sel.depths, run.cfg.depths))
      for (auto m : methods) {
        if (m == Method::Vanilla) throw ConfigError("diversity: vanilla trajectories are not supported");
        if (m == Method::UniMetaLstm && !gnn) gnn = load_gnn(run.layout);
        const auto model = load_meta_model(run.layout, m, c, p);
        const auto data = make_instances(backend_of(m), c, ds.test, gnn ? &*gnn : nullptr);
        const auto stats = trajectory_diversity(collect_trajectories(model, data));
        const std::string tag = std::string(to_string(m)) + "-" + std::string(to_string(c)) + "-p" + std::to_string(p);
        write_diversity_csv(run.output("diversity-" + tag + ".csv"), stats);
        write_variance_csv(run.output("variance-" + tag + ".csv"), stats);
      }
}

void export_embed(Run& run, const Selection& sel, const std::string& split, const std::string& backend) {
  const auto ds = load_dataset(run, sel);
  const auto& graphs = split == "train" ? ds.train : ds.test;
  const auto classes = classes_or(sel.classes, run.cfg.classes);
  std::vector<embed::EmbeddingRow> rows;
  if (parse_backend(backend) == Backend::UniHetCO) {
    rows = embed::compute_embeddings(graphs, classes, load_gnn(run.layout));
  } else if (parse_backend(backend) == Backend::Wl) {
    for (auto c : classes)
      for (const auto& g : graphs) rows.push_back({g.id(), c, embed::wl_embed(g)});
  } else {
    throw ConfigError("export-embed: backend must be wl or unihetco");
  }
  embed::write_embedding_csv(run.output("embeddings.csv"), rows);
}

void add_selection(CLI::App* cmd, Selection& sel, bool classes = true, bool depths = true) {
  cmd->add_option("--data", sel.data, "Dataset JSONL (default: config 'dataset', then <out>/dataset.jsonl)");
  if (classes)
    cmd->add_option("--class", sel.classes, "Problem class(es)")->delimiter(',')->check(CLI::IsMember(kClassNames));
  if (depths)
    cmd->add_option("--p", sel.depths, "Circuit depth(s)")->delimiter(',')->check(CLI::IsMember({4, 6, 8, 10}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph-conditioned meta-learning of QAOA parameters"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  Globals g;
  app.add_option("--seed", g.seed, "Master seed (overrides the config)");
  app.add_option("--config", g.config_path, "Flat JSON experiment config")->check(CLI::ExistingFile);
  auto* out_opt = app.add_option("--out", g.out, "Output directory (gen-data: dataset file or directory)");
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::Range(1, 1024));

  Selection sel;
  std::optional<int> train_count, test_count;
  auto* gen = app.add_subcommand("gen-data", "Generate the train/test graph dataset");
  gen->add_option("--train", train_count, "Training graphs")->check(CLI::NonNegativeNumber);
  gen->add_option("--test", test_count, "Test graphs")->check(CLI::NonNegativeNumber);

  auto* pre = app.add_subcommand("pretrain-embed", "Multi-domain UniHetCO pre-training");
  add_selection(pre, sel, true, false);

  auto* tm = app.add_subcommand("train-meta", "Train meta-optimizers for the selected cells");
  add_selection(tm, sel);
  tm->add_option("--embedding", sel.embeddings, "Embedding backend(s): none, wl, unihetco")
      ->delimiter(',')
      ->check(CLI::IsMember(kBackendNames));

  bool dump_diagonals = false;
  auto* es = app.add_subcommand("eval-single", "Single-problem evaluation table");
  add_selection(es, sel);
  es->add_option("--methods", sel.methods, "Methods to evaluate")->delimiter(',')->check(CLI::IsMember(kMethodNames));
  es->add_flag("--dump-diagonals", dump_diagonals, "Also write each test Hamiltonian diagonal as CSV");

  std::string transfer_method = "uni-meta-lstm";
  bool full = false;
  auto* et = app.add_subcommand("eval-transfer", "Cross-problem transfer with fine-tuning");
  add_selection(et, sel, false, true);
  et->add_option("--source", sel.sources, "Source class(es)")->delimiter(',')->check(CLI::IsMember(kClassNames));
  et->add_option("--target", sel.targets, "Target class(es)")->delimiter(',')->check(CLI::IsMember(kClassNames));
  et->add_option("--method", transfer_method, "Meta method to transfer")->check(CLI::IsMember(kMethodNames));
  et->add_flag("--full", full, "All 4x3 ordered class pairs at every supported depth");

  auto* dv = app.add_subcommand("diversity", "Trajectory diversity statistics on the test split");
  add_selection(dv, sel);
  dv->add_option("--methods", sel.methods, "Meta methods")->delimiter(',')->check(CLI::IsMember(kMethodNames));

  std::string split = "test", backend = "unihetco";
  auto* ee = app.add_subcommand("export-embed", "Export graph embeddings as CSV");
  add_selection(ee, sel, true, false);
  ee->add_option("--split", split, "train or test")->check(CLI::IsMember({"train", "test"}));
  ee->add_option("--backend", backend, "wl or unihetco")->check(CLI::IsMember({"wl", "unihetco"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  const auto start = std::chrono::steady_clock::now();
  CLI::App* cmd = app.get_subcommands().front();
  Run run;
  try {
    if (!g.config_path.empty()) run.cfg = load_config(g.config_path);
    if (g.seed) run.cfg.seed = *g.seed;
    validate(run.cfg);
    set_thread_count(g.threads);
    run.layout.root = g.out;

    const std::string name = cmd->get_name();
    if (name == "gen-data") gen_data(run, train_count, test_count, out_opt->count() > 0);
    else if (name == "pretrain-embed") pretrain_embed(run, sel);
    else if (name == "train-meta") train_meta(run, sel);
    else if (name == "eval-single") eval_single(run, sel, dump_diagonals);
    else if (name == "eval-transfer") eval_transfer(run, sel, transfer_method, full);
    else if (name == "diversity") diversity(run, sel);
    else if (name == "export-embed") export_embed(run, sel, split, backend);

    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_manifest(run.layout.root / ("manifest-" + name + ".json"), RunManifest{name, run.cfg, wall, g.threads, run.outputs});
  } catch (const DatasetMissing& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitMissingData;
  } catch (const MissingCheckpoint& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitMissingCheckpoint;
  } catch (const ConfigError& e) {
    std::cerr << "usage error: " << e.what() << "\n\n" << cmd->help();
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
