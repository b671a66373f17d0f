#include "qmeta/embed/gnn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "qmeta/nn/adam.hpp"
#include "qmeta/nn/layers.hpp"
#include "qmeta/parallel.hpp"

namespace qmeta::embed {

using nn::ParameterStore;
using nn::SparseMatrix;
using nn::Tape;
using nn::Var;

namespace {

const char* const kRelations[] = {"prob", "obj", "constr"};

std::string layer_name(const char* rel, int k, const char* what) {
  return std::string("gnn.") + rel + ".l" + std::to_string(k) + "." + what;
}

Matrix node_features(const HeteroGraph& hg) {
  std::vector<int> deg(hg.n, 0);
  for (auto [u, v] : hg.prob_edges) {
    ++deg[u];
    ++deg[v];
  }
  Matrix x(hg.n, kNodeFeatures);
  for (int v = 0; v < hg.n; ++v) {
    x(v, 0) = static_cast<double>(deg[v]) / hg.n;
    x(v, 1) = 1.0;
    x(v, 2) = hg.self_weight[v];
  }
  return x;
}

// Row-normalized neighbour operator for an undirected weighted edge list.
SparseMatrix mean_operator(int n, const std::vector<WeightedEdge>& edges) {
  std::vector<int> count(n, 0);
  for (const auto& e : edges) {
    ++count[e.u];
    ++count[e.v];
  }
  SparseMatrix s{static_cast<std::size_t>(n), static_cast<std::size_t>(n), {}};
  for (const auto& e : edges) {
    s.entries.push_back({static_cast<std::size_t>(e.u), static_cast<std::size_t>(e.v), e.weight / count[e.u]});
    s.entries.push_back({static_cast<std::size_t>(e.v), static_cast<std::size_t>(e.u), e.weight / count[e.v]});
  }
  return s;
}

struct ConstraintOperators {
  SparseMatrix gather;   // m x n: mean of a_cv h_v over members of c
  SparseMatrix scatter;  // n x m: mean of a_cv m_c over constraints touching v
};

ConstraintOperators constraint_operators(const HeteroGraph& hg) {
  std::vector<int> per_constraint(hg.m, 0), per_var(hg.n, 0);
  for (const auto& inc : hg.constr_edges) {
    ++per_constraint[inc.constraint];
    ++per_var[inc.var];
  }
  ConstraintOperators ops{{static_cast<std::size_t>(hg.m), static_cast<std::size_t>(hg.n), {}},
                          {static_cast<std::size_t>(hg.n), static_cast<std::size_t>(hg.m), {}}};
  for (const auto& inc : hg.constr_edges) {
    const auto c = static_cast<std::size_t>(inc.constraint), v = static_cast<std::size_t>(inc.var);
    ops.gather.entries.push_back({c, v, inc.coefficient / per_constraint[c]});
    ops.scatter.entries.push_back({v, c, inc.coefficient / per_var[v]});
  }
  return ops;
}

Var relation_round(Tape& t, const ParameterStore& st, const char* rel, int k, Var h, Var agg) {
  Var out = add_row_broadcast(add(matmul(h, t.param(st, layer_name(rel, k, "W_self"))),
                                  matmul(agg, t.param(st, layer_name(rel, k, "W_nbr")))),
                              t.param(st, layer_name(rel, k, "b")));
  return k + 1 < kRounds ? relu(out) : out;
}

std::vector<double> column_of(const Matrix& m) { return {m.values().begin(), m.values().end()}; }

}  // namespace

void init_unihetco(ParameterStore& store, Rng& rng) {
  for (const char* rel : kRelations) {
    std::size_t in = kNodeFeatures;
    for (int k = 0; k < kRounds; ++k) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(in));
      store.add(layer_name(rel, k, "W_self"), nn::uniform_matrix(in, kRelationDim, bound, rng));
      store.add(layer_name(rel, k, "W_nbr"), nn::uniform_matrix(in, kRelationDim, bound, rng));
      store.add(layer_name(rel, k, "b"), Matrix(1, kRelationDim));
      if (std::string(rel) == "constr") {
        // constraint-node transform over [gathered member features, b_c]
        store.add(layer_name(rel, k, "W_msg"),
                  nn::uniform_matrix(in + 1, in, 1.0 / std::sqrt(static_cast<double>(in + 1)), rng));
        store.add(layer_name(rel, k, "b_msg"), Matrix(1, in));
      }
      in = kRelationDim;
    }
  }
  nn::init_mlp(store, "gnn.fuse", {kEmbeddingDim, kEmbeddingDim, kEmbeddingDim}, rng);
  nn::init_mlp(store, "gnn.head", {kEmbeddingDim, 1}, rng);
}

HeteroForward hetero_forward(Tape& t, const ParameterStore& st, const HeteroGraph& hg) {
  const Var x0 = t.constant(node_features(hg));

  std::vector<WeightedEdge> unit_edges;
  for (auto [u, v] : hg.prob_edges) unit_edges.push_back({u, v, 1.0});
  const SparseMatrix prob_op = mean_operator(hg.n, unit_edges);
  const SparseMatrix obj_op = mean_operator(hg.n, hg.obj_edges);
  const ConstraintOperators cons = constraint_operators(hg);
  Matrix rhs(hg.m, 1);
  for (int j = 0; j < hg.m; ++j) rhs[j] = hg.rhs[j];
  const Var rhs_var = t.constant(rhs);

  Var hp = x0, ho = x0, hc = x0;
  for (int k = 0; k < kRounds; ++k) {
    hp = relation_round(t, st, "prob", k, hp, spmm(prob_op, hp));
    ho = relation_round(t, st, "obj", k, ho, spmm(obj_op, ho));
    Var agg;
    if (hg.m == 0) {
      agg = t.constant(Matrix(hg.n, hc.cols()));
    } else {
      Var gathered = nn::concat_cols({spmm(cons.gather, hc), rhs_var});
      Var msg = relu(add_row_broadcast(matmul(gathered, t.param(st, layer_name("constr", k, "W_msg"))),
                                       t.param(st, layer_name("constr", k, "b_msg"))));
      agg = spmm(cons.scatter, msg);
    }
    hc = relation_round(t, st, "constr", k, hc, agg);
  }
  Var fused = nn::mlp_forward(t, st, "gnn.fuse", 2, nn::concat_cols({hp, ho, hc}));
  Var x = sigmoid(nn::mlp_forward(t, st, "gnn.head", 1, fused));
  return {hp, ho, hc, fused, x};
}

NcoLoss nco_loss(Tape& t, const HeteroGraph& hg, Var x) {
  if (x.rows() != static_cast<std::size_t>(hg.n) || x.cols() != 1)
    throw std::invalid_argument("nco_loss: x must be n x 1");
  Var obj = quad_form(x, hg.qubo.Qtilde);
  Var constr = t.constant(Matrix(1, 1));
  if (hg.m > 0) {
    SparseMatrix a{static_cast<std::size_t>(hg.m), static_cast<std::size_t>(hg.n), {}};
    for (const auto& inc : hg.constr_edges)
      a.entries.push_back(
          {static_cast<std::size_t>(inc.constraint), static_cast<std::size_t>(inc.var), inc.coefficient});
    Matrix b(hg.m, 1);
    for (int j = 0; j < hg.m; ++j) b[j] = hg.rhs[j];
    constr = sum(relu(sub(spmm(a, x), t.constant(b))));
  }
  return {obj, constr, add(obj, constr)};
}

NcoValues nco_loss_value(const HeteroGraph& hg, const std::vector<double>& x) {
  Tape t;
  auto l = nco_loss(t, hg, t.constant(Matrix::column(x)));
  return {l.obj.scalar(), l.constr.scalar(), l.total.scalar()};
}

PretrainResult pretrain_unihetco(const std::vector<std::vector<HeteroGraph>>& per_class, const PretrainConfig& cfg) {
  const std::size_t K = per_class.size();
  if (K == 0) throw std::invalid_argument("pretrain_unihetco: no class datasets");
  for (const auto& d : per_class)
    if (d.empty()) throw std::invalid_argument("pretrain_unihetco: empty class dataset");
  if (cfg.batch < static_cast<int>(K) || cfg.batch % static_cast<int>(K) != 0)
    throw std::invalid_argument("pretrain_unihetco: batch must be a positive multiple of the class count");
  const std::size_t per_batch = static_cast<std::size_t>(cfg.batch) / K;

  Rng rng(derive_seed(cfg.seed, 0x9e77));
  PretrainResult res;
  init_unihetco(res.weights, rng);
  nn::Adam adam(nn::AdamConfig{.lr = cfg.lr});

  std::size_t largest = 0;
  for (const auto& d : per_class) largest = std::max(largest, d.size());
  const std::size_t batches = (largest + per_batch - 1) / per_batch;

  std::vector<std::vector<std::size_t>> order(K);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t c = 0; c < K; ++c) {
      order[c].resize(per_class[c].size());
      std::iota(order[c].begin(), order[c].end(), 0);
      for (std::size_t i = order[c].size(); i > 1; --i)
        std::swap(order[c][i - 1], order[c][static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i - 1)))]);
    }
    double epoch_loss = 0.0;
    std::size_t epoch_count = 0;
    for (std::size_t b = 0; b < batches; ++b) {
      std::vector<const HeteroGraph*> batch;
      for (std::size_t c = 0; c < K; ++c)
        for (std::size_t j = 0; j < per_batch; ++j)
          batch.push_back(&per_class[c][order[c][(b * per_batch + j) % order[c].size()]]);

      std::vector<nn::GradientMap> grads(batch.size());
      std::vector<double> losses(batch.size());
      parallel_for(batch.size(), [&](std::size_t i) {
        Tape t;
        auto fwd = hetero_forward(t, res.weights, *batch[i]);
        auto loss = nco_loss(t, *batch[i], fwd.x);
        t.backward(loss.total);
        losses[i] = loss.total.scalar();
        grads[i] = t.parameter_gradients(res.weights);
      });
      nn::GradientMap total = nn::zero_gradients(res.weights);
      const double inv = 1.0 / static_cast<double>(batch.size());
      for (std::size_t i = 0; i < batch.size(); ++i) {
        nn::accumulate(total, grads[i], inv);
        epoch_loss += losses[i];
      }
      epoch_count += batch.size();
      adam.step(res.weights, total);
    }
    res.loss_history.push_back(epoch_loss / static_cast<double>(epoch_count));
  }
  return res;
}

std::vector<double> extract_embedding(const ParameterStore& store, const HeteroGraph& hg) {
  Tape t;
  auto fwd = hetero_forward(t, store, hg);
  return column_of(nn::mean_rows(nn::concat_cols({fwd.prob, fwd.obj, fwd.constr})).value());
}

std::vector<double> relaxed_solution(const ParameterStore& store, const HeteroGraph& hg) {
  Tape t;
  return column_of(hetero_forward(t, store, hg).x.value());
}

}  // namespace qmeta::embed
