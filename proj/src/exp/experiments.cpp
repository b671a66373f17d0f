#include "qmeta/exp/experiments.hpp"

#include <cstdio>
#include <fstream>

#include "qmeta/embed/gnn.hpp"
#include "qmeta/embed/wl.hpp"
#include "qmeta/exp/vanilla.hpp"
#include "qmeta/parallel.hpp"

namespace qmeta::exp {

namespace {

std::string cell_name(ProblemClass c, int p) { return std::string(to_string(c)) + "/p" + std::to_string(p); }

std::string instance_key(const GraphInstance& g, std::size_t index) {
  return g.id().empty() ? "#" + std::to_string(index) : g.id();
}

std::ofstream open_csv(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string percent(const std::optional<double>& v) { return v ? fixed2(100.0 * *v) : std::string(); }

std::string full(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string metric_columns(const AggregateMetrics& m) {
  return percent(m.p_opt_hit) + ',' + percent(m.ar) + ',' + percent(m.fr) + ',' + fixed2(m.steps) + ',' +
         std::to_string(m.n_instances);
}

}  // namespace

std::filesystem::path Layout::checkpoint(Method m, ProblemClass c, int p) const {
  return root / "checkpoints" / (std::string(to_string(m)) + "-" + std::string(to_string(c)) + "-p" + std::to_string(p));
}

std::filesystem::path Layout::train_log(Method m, ProblemClass c, int p) const {
  return root / ("train_log-" + std::string(to_string(m)) + "-" + std::string(to_string(c)) + "-p" +
                 std::to_string(p) + ".csv");
}

std::uint64_t stream_seed(std::uint64_t master, const std::string& name) { return derive_seed(master, fnv1a(name)); }

std::size_t embedding_dim(Backend b) {
  switch (b) {
    case Backend::Wl: return embed::kWlDim;
    case Backend::UniHetCO: return embed::kEmbeddingDim;
    default: return 0;
  }
}

std::vector<double> instance_embedding(Backend b, ProblemClass c, const GraphInstance& g,
                                       const nn::ParameterStore* gnn) {
  switch (b) {
    case Backend::None: return {};
    case Backend::Wl: return embed::wl_embed(g);
    case Backend::UniHetCO:
      if (!gnn) throw std::invalid_argument("instance_embedding: UniHetCO weights are required");
      return embed::extract_embedding(*gnn, embed::build_hetero_graph(c, g));
  }
  return {};
}

std::vector<meta::TrainInstance> make_instances(Backend b, ProblemClass c, const std::vector<GraphInstance>& graphs,
                                                const nn::ParameterStore* gnn) {
  std::vector<std::optional<meta::TrainInstance>> slots(graphs.size());
  parallel_for(graphs.size(), [&](std::size_t i) {
    slots[i].emplace(meta::TrainInstance{build_cost_hamiltonian(c, graphs[i]), instance_embedding(b, c, graphs[i], gnn)});
  });
  std::vector<meta::TrainInstance> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

meta::MetaOptimizerModel fresh_model(const ExperimentConfig& cfg, Backend b, ProblemClass c, int p) {
  Rng rng(stream_seed(cfg.seed, "init/" + std::string(to_string(b)) + "/" + cell_name(c, p)));
  return meta::MetaOptimizerModel::create(
      meta::MetaConfig{.p = p, .T = cfg.T, .hidden = static_cast<std::size_t>(cfg.hidden), .embed_dim = embedding_dim(b)},
      rng);
}

meta::TrainResult train_meta_model(const ExperimentConfig& cfg, Backend b, ProblemClass c, int p,
                                   const std::vector<meta::TrainInstance>& data) {
  meta::TrainConfig tc{.batch = cfg.batch,
                       .epochs = cfg.epochs,
                       .lr = cfg.lr,
                       .seed = stream_seed(cfg.seed, "train/" + std::string(to_string(b)) + "/" + cell_name(c, p))};
  return meta::train(fresh_model(cfg, b, c, p), data, tc);
}

AggregateMetrics aggregate(const std::vector<MetricsReport>& reports) {
  AggregateMetrics a;
  a.n_instances = static_cast<int>(reports.size());
  if (reports.empty()) return a;
  double ar = 0, fr = 0;
  int ar_count = 0, fr_count = 0;
  for (const auto& r : reports) {
    a.p_opt_hit += r.p_opt_hit;
    a.steps += r.steps;
    if (r.ar) ar += *r.ar, ++ar_count;
    if (r.fr) fr += *r.fr, ++fr_count;
  }
  const double n = static_cast<double>(reports.size());
  a.p_opt_hit /= n;
  a.steps /= n;
  if (ar_count) a.ar = ar / ar_count;
  if (fr_count) a.fr = fr / fr_count;
  return a;
}

MetricsReport score_state(const ExperimentConfig& cfg, ProblemClass c, const GraphInstance& g, const StateVector& psi,
                          std::uint64_t sample_seed) {
  const auto oracle = brute_force_optimum(c, g);
  if (cfg.exact_probabilities) return exact_metrics(c, g, exact_probabilities(psi), oracle).report;
  Rng rng(sample_seed);
  return evaluate_metrics(c, g, psi, cfg.shots, rng, oracle);
}

AggregateMetrics evaluate_cell(const ExperimentConfig& cfg, Method m, ProblemClass c, int p,
                               const std::vector<GraphInstance>& test, const meta::MetaOptimizerModel* model,
                               const nn::ParameterStore* gnn) {
  if (m != Method::Vanilla) {
    if (!model) throw std::invalid_argument("evaluate_cell: " + std::string(to_string(m)) + " needs a model");
    if (model->config.p != p)
      throw std::invalid_argument("evaluate_cell: model depth " + std::to_string(model->config.p) +
                                  " does not match cell " + cell_name(c, p));
  }
  const std::string tag = std::string(to_string(m)) + "/" + cell_name(c, p) + "/";
  std::vector<MetricsReport> reports(test.size());
  parallel_for(test.size(), [&](std::size_t i) {
    const auto& g = test[i];
    const auto key = instance_key(g, i);
    const auto h = build_cost_hamiltonian(c, g);
    if (m == Method::Vanilla) {
      Rng init(stream_seed(cfg.seed, "vanilla-init/" + tag + key));
      auto res = run_vanilla_qaoa(
          h, p, init,
          VanillaConfig{.max_steps = cfg.vanilla_max_steps, .lr = cfg.vanilla_lr, .tolerance = cfg.vanilla_tolerance});
      reports[i] = score_state(cfg, c, g, res.final_state, stream_seed(cfg.seed, "sample/" + tag + key));
      reports[i].steps = res.steps_used;
      return;
    }
    const auto emb = instance_embedding(backend_of(m), c, g, gnn);
    const auto r = meta::rollout(*model, h, emb);
    reports[i] = score_state(cfg, c, g, run_qaoa(h, r.thetas.back()), stream_seed(cfg.seed, "sample/" + tag + key));
    reports[i].steps = static_cast<double>(r.thetas.size());
  });
  return aggregate(reports);
}

void write_results_csv(const std::filesystem::path& path, const std::vector<ResultRow>& rows) {
  auto out = open_csv(path);
  out << "class,depth,method,p_opt_hit,ar,fr,steps,n_instances,seed\n";
  for (const auto& r : rows)
    out << to_string(r.cls) << ',' << r.depth << ',' << to_string(r.method) << ',' << metric_columns(r.metrics) << ','
        << r.seed << '\n';
}

std::vector<TransferCell> transfer_grid(const std::vector<ProblemClass>& classes, const std::vector<int>& depths) {
  std::vector<TransferCell> cells;
  for (auto s : classes)
    for (auto t : classes)
      if (s != t)
        for (int p : depths) cells.push_back({s, t, p});
  return cells;
}

TransferResult evaluate_transfer(const ExperimentConfig& cfg, Method m, const TransferCell& cell,
                                 const meta::MetaOptimizerModel& source_model, const std::vector<GraphInstance>& test,
                                 const nn::ParameterStore* gnn) {
  if (m == Method::Vanilla) throw std::invalid_argument("evaluate_transfer: vanilla has no model to transfer");
  if (source_model.config.p != cell.depth)
    throw std::invalid_argument("evaluate_transfer: checkpoint depth p=" + std::to_string(source_model.config.p) +
                                " does not match target depth p=" + std::to_string(cell.depth) + " (" +
                                std::string(to_string(cell.source)) + " -> " + std::string(to_string(cell.target)) + ")");
  const std::string tag = std::string(to_string(m)) + "/" + std::string(to_string(cell.source)) + "->" +
                          cell_name(cell.target, cell.depth) + "/";
  const auto omega = meta::default_loss_weights(source_model.config.T);
  struct Slot {
    MetricsReport report;
    double before = 0, after = 0;
  };
  std::vector<Slot> slots(test.size());
  parallel_for(test.size(), [&](std::size_t i) {
    const auto& g = test[i];
    meta::TrainInstance inst{build_cost_hamiltonian(cell.target, g), instance_embedding(backend_of(m), cell.target, g, gnn)};
    slots[i].before = meta::meta_loss(meta::rollout(source_model, inst.h, inst.g), omega);
    const auto tuned = meta::fine_tune(source_model, inst, cfg.fine_tune_steps, cfg.fine_tune_lr);
    const auto r = meta::rollout(tuned, inst.h, inst.g);
    slots[i].after = meta::meta_loss(r, omega);
    slots[i].report = score_state(cfg, cell.target, g, run_qaoa(inst.h, r.thetas.back()),
                                  stream_seed(cfg.seed, "sample/" + tag + instance_key(g, i)));
    slots[i].report.steps = static_cast<double>(r.thetas.size());
  });

  TransferResult res{cell, m, {}, 0, 0, 0, cfg.seed};
  std::vector<MetricsReport> reports;
  for (const auto& s : slots) {
    reports.push_back(s.report);
    res.loss_before += s.before;
    res.loss_after += s.after;
    res.improved += s.after < s.before;
  }
  res.metrics = aggregate(reports);
  if (!slots.empty()) {
    const double n = static_cast<double>(slots.size());
    res.loss_before /= n;
    res.loss_after /= n;
    res.improved /= n;
  }
  return res;
}

void write_transfer_csv(const std::filesystem::path& path, const std::vector<TransferResult>& rows) {
  auto out = open_csv(path);
  out << "source,target,depth,method,p_opt_hit,ar,fr,steps,n_instances,loss_before,loss_after,improved,seed\n";
  for (const auto& r : rows)
    out << to_string(r.cell.source) << ',' << to_string(r.cell.target) << ',' << r.cell.depth << ','
        << to_string(r.method) << ',' << metric_columns(r.metrics) << ',' << full(r.loss_before) << ','
        << full(r.loss_after) << ',' << percent(r.improved) << ',' << r.seed << '\n';
}

Trajectories collect_trajectories(const meta::MetaOptimizerModel& model, const std::vector<meta::TrainInstance>& data) {
  Trajectories out(data.size());
  parallel_for(data.size(), [&](std::size_t i) { out[i] = meta::rollout(model, data[i].h, data[i].g).thetas; });
  return out;
}

void write_training_log(const std::filesystem::path& path, const meta::TrainResult& res) {
  auto out = open_csv(path);
  out << "epoch,mean_loss,mean_final_energy,best\n";
  for (const auto& e : res.history)
    out << e.epoch << ',' << full(e.mean_loss) << ',' << full(e.mean_final_energy) << ','
        << (e.epoch == res.best_epoch ? 1 : 0) << '\n';
}

meta::MetaOptimizerModel load_meta_model(const Layout& layout, Method m, ProblemClass c, int p) {
  const auto stem = layout.checkpoint(m, c, p);
  if (!nn::checkpoint_exists(stem))
    throw MissingCheckpoint("missing checkpoint for cell (class=" + std::string(to_string(c)) +
                            ", p=" + std::to_string(p) + ", backend=" + std::string(to_string(backend_of(m))) +
                            "): " + stem.string() + ".json; run train-meta first");
  auto model = meta::from_checkpoint(nn::load_checkpoint(stem));
  if (model.config.p != p)
    throw std::invalid_argument("checkpoint " + stem.string() + " has depth p=" + std::to_string(model.config.p) +
                                ", expected p=" + std::to_string(p));
  return model;
}

nn::ParameterStore load_gnn(const Layout& layout) {
  const auto stem = layout.gnn_checkpoint();
  if (!nn::checkpoint_exists(stem))
    throw MissingCheckpoint("missing UniHetCO checkpoint: " + stem.string() + ".json; run pretrain-embed first");
  return nn::load_checkpoint(stem).params;
}

}  // namespace qmeta::exp
