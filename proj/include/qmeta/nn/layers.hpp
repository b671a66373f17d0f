#pragma once

#include <string>
#include <vector>

#include "qmeta/nn/tape.hpp"
#include "qmeta/rng.hpp"

namespace qmeta::nn {

Matrix uniform_matrix(std::size_t rows, std::size_t cols, double bound, Rng& rng);

// LSTM cell on column vectors. Gate rows are stacked as [input, forget,
// candidate, output] in W_x (4H x I), W_h (4H x H) and b (4H x 1).
struct LstmParams {
  Var wx, wh, b;
  std::size_t hidden = 0;
};

struct LstmState {
  Var h, s;
};

/// Gate matrices uniform in [-1/sqrt(H), 1/sqrt(H)]; biases zero except the
/// forget gate, which starts at 1.
void init_lstm(ParameterStore& store, const std::string& prefix, std::size_t input, std::size_t hidden, Rng& rng);
LstmParams bind_lstm(Tape& tape, const ParameterStore& store, const std::string& prefix);
LstmState lstm_cell(const LstmParams& p, Var z, Var h_prev, Var s_prev);

// Dense stack on row-major node matrices: x (N x in) -> (N x out), with
// W_k (in x out) and b_k (1 x out). ReLU between layers, identity at the end.
void init_mlp(ParameterStore& store, const std::string& prefix, const std::vector<std::size_t>& dims, Rng& rng);
Var mlp_forward(Tape& tape, const ParameterStore& store, const std::string& prefix, std::size_t layers, Var x);

}  // namespace qmeta::nn
