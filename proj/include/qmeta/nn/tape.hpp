#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "qmeta/matrix.hpp"

namespace qmeta::nn {

/// Named trainable tensors. std::map keeps iteration order fixed, which the
/// optimizer and checkpoint writer rely on for reproducibility.
class ParameterStore {
 public:
  /// Adds a new parameter; names must be unique.
  Matrix& add(const std::string& name, Matrix value);
  bool contains(const std::string& name) const { return params_.count(name) != 0; }
  Matrix& at(const std::string& name);
  const Matrix& at(const std::string& name) const;
  /// Overwrites the values of an existing parameter; the shape must match.
  void assign(const std::string& name, const Matrix& value);

  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const;
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }
  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }

  bool operator==(const ParameterStore&) const = default;

 private:
  std::map<std::string, Matrix> params_;
};

using GradientMap = std::map<std::string, Matrix>;

/// Zero gradients shaped like every parameter in the store.
GradientMap zero_gradients(const ParameterStore& store);
/// acc += g, entry by entry (shapes must match).
void accumulate(GradientMap& acc, const GradientMap& g, double scale = 1.0);

class Tape;

/// Handle to a node recorded on a tape.
struct Var {
  Tape* tape = nullptr;
  int id = -1;

  const Matrix& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  double scalar() const;
};

/// Reverse-mode recorder. Nodes are appended in evaluation order, so the
/// reverse sweep is simply the node list walked backwards.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  /// Leaf bound to a named parameter. Repeated calls for the same name return
  /// the same node, so gradients from every use accumulate in one place.
  Var param(const ParameterStore& store, const std::string& name);

  using Backward = std::function<void(Tape&, const Matrix& out_grad)>;
  Var record(Matrix value, Backward backward);

  const Matrix& value(Var v) const { return nodes_[v.id].value; }
  /// Gradient slot of a node, allocated as zeros on first use.
  Matrix& grad(Var v);

  /// Seeds d(loss)/d(loss) = 1 and sweeps all nodes in reverse.
  void backward(Var loss);

  /// Gradients for every parameter in the store; parameters that were never
  /// touched on this tape get zeros.
  GradientMap parameter_gradients(const ParameterStore& store) const;

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    Backward backward;
  };
  std::vector<Node> nodes_;
  std::map<std::string, int> param_ids_;
};

// Differentiable primitives. All shapes are checked and mismatches throw
// std::invalid_argument.
Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var hadamard(Var a, Var b);
Var scale(Var a, double s);
Var add_scalar(Var a, double s);
Var sigmoid(Var a);
Var tanh(Var a);
Var relu(Var a);
/// Stacks parts top to bottom (same column count).
Var concat_rows(const std::vector<Var>& parts);
/// Places parts side by side (same row count).
Var concat_cols(const std::vector<Var>& parts);
Var slice_rows(Var a, std::size_t begin, std::size_t count);
/// Sum of all entries, as a 1x1 node.
Var sum(Var a);
/// Mean over rows: (r x c) -> (1 x c).
Var mean_rows(Var a);
/// Adds a 1 x c row to every row of a.
Var add_row_broadcast(Var a, Var row);
/// Product with a constant sparse matrix given as (row, col, weight) triples.
struct SparseEntry {
  std::size_t row, col;
  double weight;
};
struct SparseMatrix {
  std::size_t rows = 0, cols = 0;
  std::vector<SparseEntry> entries;
};
Var spmm(const SparseMatrix& s, Var x);
/// x' Q x for a column vector x and constant square Q, as a 1x1 node.
Var quad_form(Var x, const Matrix& q);
/// Scalar node whose value and gradient w.r.t. x are supplied by the caller
/// (used to splice the simulator's adjoint gradient into the tape).
Var external_scalar(Var x, double value, Matrix grad_wrt_x);

}  // namespace qmeta::nn
