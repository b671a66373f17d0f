// Acceptance suite: prints one PASS/FAIL line per criterion.
//   acceptance          run all criteria
//   acceptance N [...]  run the listed criteria only

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>

#include "qmeta/dataset.hpp"
#include "qmeta/embed/decoder.hpp"
#include "qmeta/embed/export.hpp"
#include "qmeta/exp/experiments.hpp"

namespace fs = std::filesystem;
using namespace qmeta;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

ParameterVector random_theta(Rng& rng, int p, double scale = 1.0) {
  ParameterVector t(p);
  for (double& g : t.gamma) g = scale * rng.uniform(-std::numbers::pi, std::numbers::pi);
  for (double& b : t.beta) b = scale * rng.uniform(-std::numbers::pi / 2, std::numbers::pi / 2);
  return t;
}

GraphInstance random_graph(Rng& rng, int n_min, int n_max) {
  const int n = static_cast<int>(rng.uniform_int(n_min, n_max));
  return generate_random_connected_graph(n, static_cast<int>(rng.uniform_int(1, n - 1)), rng);
}

// --- 1 ----------------------------------------------------------------------

Outcome hamiltonian_correctness() {
  Rng rng(101);
  int identity_failures = 0, argmin_failures = 0, graphs = 0;
  for (auto c : kAllClasses)
    for (int i = 0; i < 50; ++i, ++graphs) {
      const auto g = random_graph(rng, 2, 10);
      if (!hamiltonian_objective_identity_check(c, g)) ++identity_failures;
      const auto h = build_cost_hamiltonian(c, g);
      std::vector<std::uint64_t> argmin;
      for (std::uint64_t idx = 0; idx < h.dimension(); ++idx)
        if (h.diagonal()[idx] == h.min_value()) argmin.push_back(idx);
      if (argmin != brute_force_optimum(c, g).optimizers) ++argmin_failures;
    }
  return {identity_failures == 0 && argmin_failures == 0,
          std::to_string(graphs) + " graphs, identity failures " + std::to_string(identity_failures) +
              ", optimizer-set mismatches " + std::to_string(argmin_failures)};
}

// --- 2 ----------------------------------------------------------------------

std::vector<double> central_difference(const CostHamiltonian& h, const ParameterVector& theta, double step) {
  auto x = theta.flat();
  std::vector<double> g(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    auto up = x, dn = x;
    up[k] += step;
    dn[k] -= step;
    g[k] = (qaoa_energy(h, ParameterVector::from_flat(up)) - qaoa_energy(h, ParameterVector::from_flat(dn))) / (2 * step);
  }
  return g;
}

// Richardson extrapolation removes the O(step^2) truncation term, which
// otherwise dominates for penalty Hamiltonians with norms in the hundreds.
std::vector<double> richardson_difference(const CostHamiltonian& h, const ParameterVector& theta, double step) {
  auto coarse = central_difference(h, theta, step);
  auto fine = central_difference(h, theta, step / 2);
  for (std::size_t k = 0; k < fine.size(); ++k) fine[k] = (4 * fine[k] - coarse[k]) / 3;
  return fine;
}

Outcome gradient_suite() {
  Rng rng(202);
  double max_err = 0;
  for (int rep = 0; rep < 20; ++rep) {
    const auto g = random_graph(rng, 3, 7);
    const auto h = build_cost_hamiltonian(kAllClasses[rep % 4], g);
    const auto theta = random_theta(rng, static_cast<int>(rng.uniform_int(1, 4)));
    const auto an = energy_and_gradient(h, theta).grad;
    const auto fd = richardson_difference(h, theta, 1e-5);
    for (std::size_t k = 0; k < an.size(); ++k) max_err = std::max(max_err, std::abs(an[k] - fd[k]));
  }

  // tiny end-to-end config: n=4, p=2, T=3, hidden=8
  Rng mrng(203);
  auto model = meta::MetaOptimizerModel::create(meta::MetaConfig{.p = 2, .T = 3, .hidden = 8, .embed_dim = 0}, mrng);
  const auto h = build_cost_hamiltonian(ProblemClass::MIS, generate_random_connected_graph(4, 2, mrng));
  const auto omega = meta::default_loss_weights(3);
  const auto lg = meta::meta_loss_and_gradient(model, h, {}, omega);
  meta::RolloutOptions frozen;
  frozen.feedback = std::vector<double>{lg.rollout.initial_normalized, lg.rollout.normalized[0], lg.rollout.normalized[1]};
  std::vector<std::pair<std::string, std::size_t>> coords;
  for (const auto& [name, m] : model.params)
    for (std::size_t i = 0; i < m.size(); ++i) coords.emplace_back(name, i);
  double max_rel = 0;
  for (int k = 0; k < 50; ++k) {
    const auto& [name, i] = coords[static_cast<std::size_t>(mrng.uniform_int(0, static_cast<std::int64_t>(coords.size()) - 1))];
    auto probe = model;
    probe.params.at(name)[i] += 1e-5;
    const double up = meta::meta_loss(meta::rollout(probe, h, {}, frozen), omega);
    probe.params.at(name)[i] -= 2e-5;
    const double dn = meta::meta_loss(meta::rollout(probe, h, {}, frozen), omega);
    const double fd = (up - dn) / 2e-5, an = lg.grad.at(name)[i];
    max_rel = std::max(max_rel, std::abs(fd - an) / std::max(1e-6, std::abs(fd) + std::abs(an)));
  }
  return {max_err < 1e-6 && max_rel < 1e-3,
          fmt("simulator max |adjoint - FD| %.3g (< 1e-6); meta-loss max rel err %.3g over 50 coords (< 1e-3)", max_err,
              max_rel)};
}

// --- 3 ----------------------------------------------------------------------

Outcome normalization_bound() {
  Rng rng(303);
  int violations = 0;
  double worst = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    const auto h = build_cost_hamiltonian(kAllClasses[rep % 4], random_graph(rng, 2, 9));
    const double e = normalized_energy(qaoa_energy(h, random_theta(rng, static_cast<int>(rng.uniform_int(1, 6)), 3.0)), h);
    worst = std::max(worst, std::abs(e));
    violations += std::abs(e) > 1.0;
  }
  return {violations == 0, "1000 pairs, violations " + std::to_string(violations) + fmt(", max |E~| %.6f", worst)};
}

// --- 4 ----------------------------------------------------------------------

Outcome metric_oracle() {
  const GraphInstance edge(2, {{0, 1}});
  SampleSet s;
  for (auto [bits, n] : {std::pair{"00", 2500}, {"01", 1500}, {"10", 500}, {"11", 500}}) {
    s.counts[index_from_bitstring(parse_bitstring(bits))] = n;
    s.shots += n;
  }
  const auto mis = exp::metrics_from_counts(ProblemClass::MIS, edge, s, brute_force_optimum(ProblemClass::MIS, edge));
  const bool mis_ok = mis.fr && *mis.fr == 0.9 && mis.p_opt_hit == 0.4 && mis.ar && *mis.ar == 2000.0 / 4500.0;

  const GraphInstance k3(3, {{0, 1}, {0, 2}, {1, 2}});
  const auto exact = exp::exact_metrics(ProblemClass::MaxCut, k3, exact_probabilities(prepare_plus_state(3)),
                                        brute_force_optimum(ProblemClass::MaxCut, k3));
  const bool k3_ok = exact.report.ar && *exact.report.ar == 0.75;
  return {mis_ok && k3_ok, fmt("MIS example FR=%.4f p=%.4f AR=%.4f; K3 uniform exact AR=%.17g", mis.fr.value_or(-1),
                               mis.p_opt_hit, mis.ar.value_or(-1), exact.report.ar.value_or(-1))};
}

// --- 5 ----------------------------------------------------------------------

Outcome conditioning_identity() {
  Rng rng(505);
  int mismatches = 0;
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t d = static_cast<std::size_t>(rng.uniform_int(1, 96));
    Rng mrng(5000 + rep);
    auto model = meta::MetaOptimizerModel::create(
        meta::MetaConfig{.p = static_cast<int>(rng.uniform_int(1, 6)), .T = 10, .hidden = 48, .embed_dim = d}, mrng);
    const auto h = build_cost_hamiltonian(kAllClasses[rep % 4], random_graph(rng, 3, 8));
    const auto a = meta::rollout(model, h, std::vector<double>(d, 0.0));
    const auto b = meta::rollout(model, h, {});
    bool same = a.normalized == b.normalized;
    for (std::size_t t = 0; t < a.thetas.size(); ++t)
      same = same && a.thetas[t].gamma == b.thetas[t].gamma && a.thetas[t].beta == b.thetas[t].beta;
    mismatches += !same;
  }
  return {mismatches == 0, "20 models/instances, bitwise mismatches " + std::to_string(mismatches)};
}

// --- shared reduced-scale setup for 6, 7, 8, 10 --------------------------------

constexpr std::uint64_t kReducedSeed = 2024;
constexpr int kReducedDepth = 4;

const Dataset& reduced_dataset() {
  static const Dataset ds = generate_dataset(DatasetSpec{.train_count = 200,
                                                         .test_count = 20,
                                                         .train_n_min = 6,
                                                         .train_n_max = 8,
                                                         .test_n = 10,
                                                         .master_seed = kReducedSeed});
  return ds;
}

exp::ExperimentConfig reduced_config() {
  exp::ExperimentConfig cfg;
  cfg.seed = kReducedSeed;
  cfg.epochs = 30;
  cfg.batch = 32;
  cfg.lr = 1e-3;
  cfg.T = 10;
  cfg.hidden = 48;
  return cfg;
}

// UniHetCO pre-trained on 100 graphs per class for 30 epochs.
const nn::ParameterStore& reduced_gnn() {
  static const nn::ParameterStore weights = [] {
    const auto& ds = reduced_dataset();
    const std::vector<GraphInstance> graphs(ds.train.begin(), ds.train.begin() + 100);
    std::vector<std::vector<embed::HeteroGraph>> per_class;
    for (auto c : kAllClasses) {
      per_class.emplace_back();
      for (const auto& g : graphs) per_class.back().push_back(embed::build_hetero_graph(c, g));
    }
    return embed::pretrain_unihetco(per_class, embed::PretrainConfig{.epochs = 30,
                                                                      .lr = 1e-3,
                                                                      .batch = 32,
                                                                      .seed = exp::stream_seed(kReducedSeed, "pretrain")})
        .weights;
  }();
  return weights;
}

struct TrainedCell {
  meta::MetaOptimizerModel untrained, trained;
  std::vector<meta::TrainInstance> test;
};

const TrainedCell& reduced_trained(exp::Backend b) {
  static std::map<exp::Backend, TrainedCell> cache;
  if (auto it = cache.find(b); it != cache.end()) return it->second;
  const auto cfg = reduced_config();
  const auto& ds = reduced_dataset();
  const nn::ParameterStore* gnn = b == exp::Backend::UniHetCO ? &reduced_gnn() : nullptr;
  const auto train = exp::make_instances(b, ProblemClass::MaxCut, ds.train, gnn);
  TrainedCell cell{exp::fresh_model(cfg, b, ProblemClass::MaxCut, kReducedDepth),
                   exp::train_meta_model(cfg, b, ProblemClass::MaxCut, kReducedDepth, train).model,
                   exp::make_instances(b, ProblemClass::MaxCut, ds.test, gnn)};
  return cache.emplace(b, std::move(cell)).first->second;
}

double mean_step_energy(const meta::MetaOptimizerModel& m, const std::vector<meta::TrainInstance>& data, int step) {
  double s = 0;
  for (const auto& inst : data) s += meta::rollout(m, inst.h, inst.g).normalized[static_cast<std::size_t>(step)];
  return s / static_cast<double>(data.size());
}

// --- 6 ----------------------------------------------------------------------

Outcome training_trend() {
  const auto& cell = reduced_trained(exp::Backend::UniHetCO);
  const double trained_final = mean_step_energy(cell.trained, cell.test, 9);
  const double untrained_final = mean_step_energy(cell.untrained, cell.test, 9);
  const double trained_first = mean_step_energy(cell.trained, cell.test, 0);
  const double vs_untrained = untrained_final - trained_final, vs_first = trained_first - trained_final;
  return {vs_untrained >= 0.02 && vs_first >= 0.01,
          fmt("test mean final E~ trained %.4f vs untrained %.4f (gain %.4f, need >= 0.02); ", trained_final,
              untrained_final, vs_untrained) +
              fmt("step-1 %.4f (gain %.4f, need >= 0.01)", trained_first, vs_first)};
}

// --- 7 ----------------------------------------------------------------------

Outcome diversity_claim() {
  const auto& uni = reduced_trained(exp::Backend::UniHetCO);
  const auto& plain = reduced_trained(exp::Backend::None);
  const auto su = exp::trajectory_diversity(exp::collect_trajectories(uni.trained, uni.test));
  const auto sp = exp::trajectory_diversity(exp::collect_trajectories(plain.trained, plain.test));
  const double ug = su.msd_gamma.back(), ub = su.msd_beta.back(), pg = sp.msd_gamma.back(), pb = sp.msd_beta.back();
  return {ug > pg && ub > pb, fmt("final-step MSD gamma: uni %.4g vs meta %.4g; beta: uni %.4g vs meta %.4g", ug, pg, ub, pb)};
}

// --- 8 ----------------------------------------------------------------------

Outcome transfer_harness() {
  const auto& source = reduced_trained(exp::Backend::UniHetCO).trained;
  const auto target = exp::make_instances(exp::Backend::UniHetCO, ProblemClass::MIS, reduced_dataset().test, &reduced_gnn());
  const auto omega = meta::default_loss_weights(source.config.T);
  int improved = 0;
  for (const auto& inst : target) {
    const double before = meta::meta_loss(meta::rollout(source, inst.h, inst.g), omega);
    const double after = meta::meta_loss(meta::rollout(meta::fine_tune(source, inst, 5, 1e-3), inst.h, inst.g), omega);
    improved += after < before;
  }
  const auto grid = exp::transfer_grid({kAllClasses.begin(), kAllClasses.end()},
                                       {exp::kSupportedDepths.begin(), exp::kSupportedDepths.end()});
  std::map<std::tuple<ProblemClass, ProblemClass, int>, int> seen;
  for (const auto& c : grid) ++seen[{c.source, c.target, c.depth}];
  bool once = seen.size() == 48;
  for (const auto& [_, n] : seen) once = once && n == 1;
  const double frac = static_cast<double>(improved) / static_cast<double>(target.size());
  return {frac >= 0.8 && grid.size() == 48 && once,
          fmt("MaxCut->MIS fine-tuning lowered meta_loss on %.0f/%.0f instances (%.0f%%, need >= 80%%); ", improved,
              static_cast<double>(target.size()), 100 * frac) +
              "full grid " + std::to_string(grid.size()) + " cells" + (once ? ", each once" : ", DUPLICATES")};
}

// --- 9 ----------------------------------------------------------------------

Outcome decoder_feasibility() {
  Rng rng(909);
  nn::ParameterStore gnn;
  embed::init_unihetco(gnn, rng);
  int infeasible = 0, total = 0;
  for (int i = 0; i < 500; ++i) {
    const auto g = random_graph(rng, 2, 12);
    for (auto c : kAllClasses) {
      std::vector<double> scores;
      if (i % 2 == 0) {
        scores = embed::relaxed_solution(gnn, embed::build_hetero_graph(c, g));
      } else {
        for (int v = 0; v < g.num_vertices(); ++v) scores.push_back(rng.uniform());
      }
      infeasible += !is_feasible(c, g, embed::greedy_decode(c, g, scores));
      ++total;
    }
  }
  return {infeasible == 0, std::to_string(total) + " decodes, infeasible " + std::to_string(infeasible)};
}

// --- 10 ---------------------------------------------------------------------

Outcome embedding_separation() {
  const auto& ds = reduced_dataset();
  const auto path = fs::temp_directory_path() / "qmeta_acceptance" / "embeddings.csv";
  embed::export_embeddings(ds.test, {kAllClasses.begin(), kAllClasses.end()}, reduced_gnn(), path);

  // read the exported file back so the statistic is taken in the exported space
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  std::vector<embed::EmbeddingRow> rows;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string id, cls, v;
    std::getline(ss, id, ',');
    std::getline(ss, cls, ',');
    embed::EmbeddingRow r{id, parse_problem_class(cls), {}};
    while (std::getline(ss, v, ',')) r.g.push_back(std::stod(v));
    rows.push_back(std::move(r));
  }
  fs::remove_all(path.parent_path());
  const auto s = embed::class_separation(rows);
  return {s.inter_centroid > s.intra_dispersion,
          fmt("%.0f rows x %.0f dims: inter-centroid %.4f vs intra-dispersion %.4f", static_cast<double>(rows.size()),
              rows.empty() ? 0.0 : static_cast<double>(rows.front().g.size()), s.inter_centroid, s.intra_dispersion)};
}

// --- 11 ---------------------------------------------------------------------

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    const auto name = e.path().filename().string();
    if (name.starts_with("manifest-")) continue;  // wall time differs by design
    std::ifstream in(e.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    files[fs::relative(e.path(), root).generic_string()] = ss.str();
  }
  return files;
}

Outcome cli_determinism() {
  const fs::path base = fs::temp_directory_path() / "qmeta_acceptance_cli";
  fs::remove_all(base);
  fs::create_directories(base);
  {
    std::ofstream cfg(base / "config.json");
    cfg << R"({"classes": ["maxcut", "mis"], "depths": [4], "train_n_min": 5, "train_n_max": 6, "test_n": 7,
               "epochs": 2, "batch": 8, "pretrain_epochs": 2, "pretrain_batch": 8, "shots": 1000,
               "vanilla_max_steps": 40, "embeddings": ["none", "wl", "unihetco"]})";
  }
  const std::vector<std::string> commands = {
      "gen-data --train 24 --test 4",
      "pretrain-embed",
      "train-meta",
      "eval-single --dump-diagonals",
      "eval-transfer",
      "diversity",
      "export-embed",
  };
  auto run_all = [&](const std::string& tag, int threads) -> std::optional<std::map<std::string, std::string>> {
    const fs::path out = base / tag;
    for (const auto& cmd : commands) {
      const std::string line = std::string("\"") + QMETA_CLI_PATH + "\" --seed 11 --config \"" +
                               (base / "config.json").string() + "\" --out \"" + out.string() + "\" --threads " +
                               std::to_string(threads) + " " + cmd + " 2>/dev/null";
      if (std::system(line.c_str()) != 0) {
        std::cerr << "command failed: " << line << '\n';
        return std::nullopt;
      }
    }
    return snapshot(out);
  };
  const auto a = run_all("a", 1), b = run_all("b", 1), c = run_all("c", 4);
  if (!a || !b || !c) return {false, "a CLI command failed"};
  const bool repeat = *a == *b, threads = *a == *c;
  fs::remove_all(base);
  return {repeat && threads && !a->empty(),
          std::to_string(a->size()) + " output files; repeated run " + (repeat ? "identical" : "DIFFERS") +
              ", --threads 1 vs 4 " + (threads ? "identical" : "DIFFERS")};
}

struct Criterion {
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {"hamiltonian-correctness", hamiltonian_correctness},
      {"gradient-suite", gradient_suite},
      {"normalization-bound", normalization_bound},
      {"metric-oracle", metric_oracle},
      {"conditioning-identity", conditioning_identity},
      {"reduced-training-trend", training_trend},
      {"trajectory-diversity", diversity_claim},
      {"transfer-harness", transfer_harness},
      {"decoder-feasibility", decoder_feasibility},
      {"embedding-separation", embedding_separation},
      {"cli-determinism", cli_determinism},
  };
  std::vector<std::size_t> selected;
  for (int i = 1; i < argc; ++i) {
    const int k = std::atoi(argv[i]);
    if (k < 1 || k > static_cast<int>(criteria.size())) {
      std::cerr << "usage: acceptance [criterion 1-" << criteria.size() << " ...]\n";
      return 2;
    }
    selected.push_back(static_cast<std::size_t>(k - 1));
  }
  if (selected.empty())
    for (std::size_t k = 0; k < criteria.size(); ++k) selected.push_back(k);

  int failures = 0;
  for (std::size_t k : selected) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %2zu %-24s %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].name, o.detail.c_str(), secs);
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
