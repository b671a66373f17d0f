#include "qmeta/nn/layers.hpp"

#include <cmath>
#include <stdexcept>

namespace qmeta::nn {

Matrix uniform_matrix(std::size_t rows, std::size_t cols, double bound, Rng& rng) {
  Matrix m(rows, cols);
  for (double& v : m.values()) v = rng.uniform(-bound, bound);
  return m;
}

void init_lstm(ParameterStore& store, const std::string& prefix, std::size_t input, std::size_t hidden, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  store.add(prefix + ".W_x", uniform_matrix(4 * hidden, input, bound, rng));
  store.add(prefix + ".W_h", uniform_matrix(4 * hidden, hidden, bound, rng));
  Matrix b(4 * hidden, 1);
  for (std::size_t k = 0; k < hidden; ++k) b[hidden + k] = 1.0;
  store.add(prefix + ".b", std::move(b));
}

LstmParams bind_lstm(Tape& tape, const ParameterStore& store, const std::string& prefix) {
  LstmParams p{tape.param(store, prefix + ".W_x"), tape.param(store, prefix + ".W_h"), tape.param(store, prefix + ".b"),
               0};
  const Matrix& b = p.b.value();
  if (b.cols() != 1 || b.rows() % 4 != 0) throw std::invalid_argument("bind_lstm: bias must be 4H x 1");
  p.hidden = b.rows() / 4;
  if (p.wh.rows() != 4 * p.hidden || p.wh.cols() != p.hidden || p.wx.rows() != 4 * p.hidden)
    throw std::invalid_argument("bind_lstm: inconsistent gate shapes under " + prefix);
  return p;
}

LstmState lstm_cell(const LstmParams& p, Var z, Var h_prev, Var s_prev) {
  const std::size_t H = p.hidden;
  if (z.cols() != 1 || z.rows() != p.wx.cols()) throw std::invalid_argument("lstm_cell: input is " + z.value().shape_string());
  if (h_prev.rows() != H || s_prev.rows() != H || h_prev.cols() != 1 || s_prev.cols() != 1)
    throw std::invalid_argument("lstm_cell: state shape mismatch");
  Var pre = add(add(matmul(p.wx, z), matmul(p.wh, h_prev)), p.b);
  Var i = sigmoid(slice_rows(pre, 0, H));
  Var f = sigmoid(slice_rows(pre, H, H));
  Var cand = tanh(slice_rows(pre, 2 * H, H));
  Var o = sigmoid(slice_rows(pre, 3 * H, H));
  Var s = add(hadamard(f, s_prev), hadamard(i, cand));
  Var h = hadamard(o, tanh(s));
  return {h, s};
}

void init_mlp(ParameterStore& store, const std::string& prefix, const std::vector<std::size_t>& dims, Rng& rng) {
  if (dims.size() < 2) throw std::invalid_argument("init_mlp: need at least input and output sizes");
  for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(dims[k]));
    store.add(prefix + ".W" + std::to_string(k), uniform_matrix(dims[k], dims[k + 1], bound, rng));
    store.add(prefix + ".b" + std::to_string(k), Matrix(1, dims[k + 1]));
  }
}

Var mlp_forward(Tape& tape, const ParameterStore& store, const std::string& prefix, std::size_t layers, Var x) {
  for (std::size_t k = 0; k < layers; ++k) {
    Var w = tape.param(store, prefix + ".W" + std::to_string(k));
    Var b = tape.param(store, prefix + ".b" + std::to_string(k));
    x = add_row_broadcast(matmul(x, w), b);
    if (k + 1 < layers) x = relu(x);
  }
  return x;
}

}  // namespace qmeta::nn
