#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qmeta/embed/decoder.hpp"
#include "qmeta/embed/export.hpp"
#include "qmeta/embed/gnn.hpp"
#include "qmeta/embed/wl.hpp"
#include "qmeta/parallel.hpp"

using namespace qmeta;
using namespace qmeta::embed;
using nn::ParameterStore;
using nn::Tape;

namespace {

GraphInstance k3() { return GraphInstance(3, {{0, 1}, {0, 2}, {1, 2}}); }
GraphInstance single_edge() { return GraphInstance(2, {{0, 1}}); }

GraphInstance random_graph(Rng& rng, int lo, int hi) {
  const int n = static_cast<int>(rng.uniform_int(lo, hi));
  return generate_random_connected_graph(n, static_cast<int>(rng.uniform_int(std::min(2, n - 1), n - 1)), rng);
}

ParameterStore random_weights(std::uint64_t seed) {
  ParameterStore s;
  Rng rng(seed);
  init_unihetco(s, rng);
  // non-zero biases so every parameter influences the output
  for (auto& [name, m] : s)
    if (name.find(".b") != std::string::npos)
      for (double& v : m.values()) v = rng.uniform(-0.3, 0.3);
  return s;
}

std::vector<int> random_permutation(Rng& rng, int n) {
  std::vector<int> p(n);
  for (int i = 0; i < n; ++i) p[i] = i;
  for (int i = n - 1; i > 0; --i) std::swap(p[i], p[rng.uniform_int(0, i)]);
  return p;
}

}  // namespace

TEST_CASE("build_hetero_graph") {
  SUBCASE("MIS single edge") {
    auto hg = build_hetero_graph(ProblemClass::MIS, single_edge());
    CHECK(hg.n == 2);
    CHECK(hg.m == 1);
    CHECK(hg.self_weight == std::vector<double>{-1, -1});
    CHECK(hg.obj_edges.empty());
    REQUIRE(hg.constr_edges.size() == 2);
    CHECK(hg.constr_edges[0].var == 0);
    CHECK(hg.constr_edges[1].var == 1);
    CHECK(hg.rhs == std::vector<double>{1});
  }
  SUBCASE("MaxCut K3") {
    auto hg = build_hetero_graph(ProblemClass::MaxCut, k3());
    CHECK(hg.m == 0);
    REQUIRE(hg.obj_edges.size() == 3);
    for (const auto& e : hg.obj_edges) CHECK(e.weight == 1.0);
    CHECK(hg.self_weight == std::vector<double>{-2, -2, -2});
  }
  SUBCASE("incidences equal the nonzeros of A") {
    Rng rng(3);
    for (int rep = 0; rep < 10; ++rep) {
      auto g = random_graph(rng, 3, 9);
      for (auto c : kAllClasses) {
        auto q = to_qubo(c, g);
        std::size_t nnz = 0;
        for (double v : q.A.values()) nnz += v != 0.0;
        CHECK(build_hetero_graph(g, q).constr_edges.size() == nnz);
      }
    }
  }
}

TEST_CASE("nco_loss") {
  auto mis = build_hetero_graph(ProblemClass::MIS, single_edge());
  auto l = nco_loss_value(mis, {1, 1});
  CHECK(l.obj == -2);
  CHECK(l.constr == 1);
  CHECK(l.total == -1);
  CHECK(nco_loss_value(mis, {0, 0}).total == 0);
  CHECK(nco_loss_value(build_hetero_graph(ProblemClass::MVC, single_edge()), {0, 0}).total == 1);

  Rng rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    auto g = random_graph(rng, 3, 8);
    for (auto c : {ProblemClass::MIS, ProblemClass::MaxClique, ProblemClass::MVC}) {
      auto opt = brute_force_optimum(c, g);
      const Bitstring bits = opt.optimizer_bitstrings(g.num_vertices()).front();
      std::vector<double> x(bits.begin(), bits.end());
      CHECK(nco_loss_value(build_hetero_graph(c, g), x).constr == 0.0);
    }
  }
}

TEST_CASE("nco_loss gradient agrees with finite differences") {
  Rng rng(6);
  for (int rep = 0; rep < 8; ++rep) {
    auto g = random_graph(rng, 3, 6);
    auto hg = build_hetero_graph(kAllClasses[rep % 4], g);
    std::vector<double> x(g.num_vertices());
    for (double& v : x) v = rng.uniform(0.05, 0.95);
    Tape t;
    auto xv = t.constant(Matrix::column(x));
    auto loss = nco_loss(t, hg, xv);
    t.backward(loss.total);
    for (std::size_t i = 0; i < x.size(); ++i) {
      auto up = x, dn = x;
      up[i] += 1e-5;
      dn[i] -= 1e-5;
      const double fd = (nco_loss_value(hg, up).total - nco_loss_value(hg, dn).total) / 2e-5;
      const double an = t.grad(xv)[i];
      CHECK(std::abs(fd - an) / std::max(1e-6, std::abs(fd) + std::abs(an)) < 1e-4);
    }
  }
}

TEST_CASE("hetero_forward") {
  auto w = random_weights(1);
  SUBCASE("shapes and output range") {
    Tape t;
    auto hg = build_hetero_graph(ProblemClass::MVC, k3());
    auto f = hetero_forward(t, w, hg);
    CHECK(f.prob.value().shape_string() == "3x32");
    CHECK(f.fused.value().shape_string() == "3x96");
    for (double v : f.x.value().values()) {
      CHECK(v > 0.0);
      CHECK(v < 1.0);
    }
  }
  SUBCASE("no constraints leaves only the self transform") {
    Tape t;
    auto hg = build_hetero_graph(ProblemClass::MaxCut, k3());
    auto f = hetero_forward(t, w, hg);
    // replay the constr stack by hand without messages
    Matrix h(3, kNodeFeatures);
    for (int v = 0; v < 3; ++v) {
      h(v, 0) = 2.0 / 3;
      h(v, 1) = 1.0;
      h(v, 2) = -2.0;
    }
    for (int k = 0; k < kRounds; ++k) {
      const Matrix& W = w.at("gnn.constr.l" + std::to_string(k) + ".W_self");
      const Matrix& b = w.at("gnn.constr.l" + std::to_string(k) + ".b");
      Matrix out(3, kRelationDim);
      for (int v = 0; v < 3; ++v)
        for (std::size_t j = 0; j < kRelationDim; ++j) {
          double s = b(0, j);
          for (std::size_t i = 0; i < h.cols(); ++i) s += h(v, i) * W(i, j);
          out(v, j) = k + 1 < kRounds ? std::max(0.0, s) : s;
        }
      h = out;
    }
    for (std::size_t i = 0; i < h.size(); ++i) CHECK(std::abs(f.constr.value()[i] - h[i]) < 1e-12);
  }
  SUBCASE("gradient of the pre-training loss") {
    auto hg = build_hetero_graph(ProblemClass::MIS, GraphInstance(4, {{0, 1}, {1, 2}, {2, 3}}));
    Tape t;
    auto loss = nco_loss(t, hg, hetero_forward(t, w, hg).x).total;
    t.backward(loss);
    auto grads = t.parameter_gradients(w);
    Rng rng(2);
    int checked = 0;
    for (auto& [name, m] : w) {
      for (int probe = 0; probe < 2; ++probe) {
        const std::size_t i = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(m.size()) - 1));
        const double orig = m[i];
        auto eval = [&] {
          Tape tt;
          return nco_loss(tt, hg, hetero_forward(tt, w, hg).x).total.scalar();
        };
        m[i] = orig + 1e-5;
        const double up = eval();
        m[i] = orig - 1e-5;
        const double dn = eval();
        m[i] = orig;
        const double fd = (up - dn) / 2e-5, an = grads.at(name)[i];
        if (std::abs(fd) + std::abs(an) < 1e-9) continue;
        CHECK(std::abs(fd - an) / (std::abs(fd) + std::abs(an)) < 1e-4);
        ++checked;
      }
    }
    CHECK(checked > 20);
  }
}

TEST_CASE("permutation invariance and equivariance") {
  auto w = random_weights(2);
  Rng rng(9);
  for (int rep = 0; rep < 6; ++rep) {
    auto g = random_graph(rng, 4, 9);
    auto perm = random_permutation(rng, g.num_vertices());
    auto pg = permute_vertices(g, perm);
    for (auto c : kAllClasses) {
      auto hg = build_hetero_graph(c, g), phg = build_hetero_graph(c, pg);
      auto e1 = extract_embedding(w, hg), e2 = extract_embedding(w, phg);
      for (std::size_t k = 0; k < e1.size(); ++k) CHECK(std::abs(e1[k] - e2[k]) < 1e-10);
      auto x1 = relaxed_solution(w, hg), x2 = relaxed_solution(w, phg);
      for (int v = 0; v < g.num_vertices(); ++v) CHECK(std::abs(x1[v] - x2[perm[v]]) < 1e-10);
    }
  }
}

TEST_CASE("extract_embedding") {
  auto w = random_weights(3);
  SUBCASE("single node graph") {
    GraphInstance one(1, {});
    auto hg = build_hetero_graph(ProblemClass::MaxCut, one);
    Tape t;
    auto f = hetero_forward(t, w, hg);
    auto g = extract_embedding(w, hg);
    REQUIRE(g.size() == kEmbeddingDim);
    for (std::size_t k = 0; k < kRelationDim; ++k) {
      CHECK(g[k] == f.prob.value()[k]);
      CHECK(g[kRelationDim + k] == f.obj.value()[k]);
      CHECK(g[2 * kRelationDim + k] == f.constr.value()[k]);
    }
  }
  SUBCASE("MIS and MVC encodings differ") {
    auto g = GraphInstance(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 4}});
    auto a = extract_embedding(w, build_hetero_graph(ProblemClass::MIS, g));
    auto b = extract_embedding(w, build_hetero_graph(ProblemClass::MVC, g));
    CHECK(a != b);
  }
}

TEST_CASE("pre-training") {
  Rng rng(12);
  std::vector<GraphInstance> graphs;
  for (int i = 0; i < 16; ++i) graphs.push_back(random_graph(rng, 5, 8));
  std::vector<std::vector<HeteroGraph>> per_class(4);
  for (std::size_t c = 0; c < 4; ++c)
    for (const auto& g : graphs) per_class[c].push_back(build_hetero_graph(kAllClasses[c], g));

  PretrainConfig cfg{.epochs = 6, .lr = 1e-3, .batch = 32, .seed = 7};
  auto res = pretrain_unihetco(per_class, cfg);
  REQUIRE(res.loss_history.size() == 6);
  CHECK(res.loss_history.back() < res.loss_history.front());

  SUBCASE("deterministic across thread counts") {
    set_thread_count(3);
    auto again = pretrain_unihetco(per_class, cfg);
    set_thread_count(1);
    CHECK(again.loss_history == res.loss_history);
    CHECK(again.weights == res.weights);
  }
  SUBCASE("single domain") {
    auto one = pretrain_unihetco({per_class[1]}, PretrainConfig{.epochs = 2, .batch = 8, .seed = 1});
    CHECK(one.loss_history.size() == 2);
  }
  CHECK_THROWS(pretrain_unihetco(per_class, PretrainConfig{.batch = 30}));
}

TEST_CASE("greedy_decode") {
  CHECK(greedy_decode(ProblemClass::MIS, single_edge(), {0.9, 0.2}) == Bitstring{1, 0});
  CHECK(greedy_decode(ProblemClass::MVC, single_edge(), {0.9, 0.2}) == Bitstring{1, 0});
  CHECK(greedy_decode(ProblemClass::MaxClique, k3(), {0.1, 0.2, 0.3}) == Bitstring{1, 1, 1});
  // all on one side gives no cut; the improvement sweep must fix it
  CHECK(objective_value(ProblemClass::MaxCut, k3(), greedy_decode(ProblemClass::MaxCut, k3(), {0.9, 0.9, 0.9})) == 2);
  CHECK_THROWS(greedy_decode(ProblemClass::MIS, k3(), {0.5}));

  Rng rng(21);
  for (int rep = 0; rep < 100; ++rep) {
    auto g = random_graph(rng, 2, 12);
    std::vector<double> x(g.num_vertices());
    for (double& v : x) v = rng.uniform();
    for (auto c : kAllClasses) CHECK(is_feasible(c, g, greedy_decode(c, g, x)));
  }
}

TEST_CASE("wl_embed") {
  auto a = wl_embed(k3());
  CHECK(a.size() == 48);
  double norm = 0;
  for (double v : a) norm += v * v;
  CHECK(norm == doctest::Approx(1.0));
  CHECK(wl_embed(permute_vertices(k3(), {2, 0, 1})) == a);
  CHECK(wl_embed(GraphInstance(3, {{0, 1}, {1, 2}})) != a);
  Rng rng(4);
  auto g = random_graph(rng, 6, 10);
  CHECK(wl_embed(permute_vertices(g, random_permutation(rng, g.num_vertices()))) == wl_embed(g));
}

TEST_CASE("embedding export") {
  auto w = random_weights(4);
  Rng rng(30);
  std::vector<GraphInstance> graphs;
  for (int i = 0; i < 5; ++i) {
    graphs.push_back(random_graph(rng, 4, 7));
    graphs.back().set_id("g" + std::to_string(i));
  }
  std::vector<ProblemClass> classes(kAllClasses.begin(), kAllClasses.end());
  const auto dir = std::filesystem::temp_directory_path() / "qmeta_export_test";
  export_embeddings(graphs, classes, w, dir / "a.csv");
  set_thread_count(4);
  export_embeddings(graphs, classes, w, dir / "b.csv");
  set_thread_count(1);

  auto slurp = [](const std::filesystem::path& p) {
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
  };
  const std::string a = slurp(dir / "a.csv");
  CHECK(a == slurp(dir / "b.csv"));
  std::istringstream lines(a);
  std::string header, line;
  std::getline(lines, header);
  CHECK(header.rfind("id,class,g_1,", 0) == 0);
  CHECK(header.substr(header.size() - 5) == ",g_96");
  int rows = 0;
  while (std::getline(lines, line)) ++rows;
  CHECK(rows == 20);
  std::filesystem::remove_all(dir);

  auto stats = class_separation(compute_embeddings(graphs, classes, w));
  CHECK(stats.inter_centroid > 0);
  CHECK(stats.intra_dispersion >= 0);
}
