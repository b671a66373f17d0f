#include "qmeta/nn/tape.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace qmeta::nn {

namespace {

[[noreturn]] void shape_error(const char* op, const Matrix& a, const Matrix& b) {
  throw std::invalid_argument(std::string(op) + ": shape mismatch " + a.shape_string() + " vs " + b.shape_string());
}

void check_same(const char* op, const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) shape_error(op, a, b);
}

#ifndef NDEBUG
void assert_finite(const Matrix& m) {
  for (double v : m.values()) assert(std::isfinite(v));
}
#else
void assert_finite(const Matrix&) {}
#endif

// c += a * b
void gemm_acc(const Matrix& a, const Matrix& b, Matrix& c) {
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a(i, p);
      if (av == 0.0) continue;
      for (std::size_t j = 0; j < m; ++j) c(i, j) += av * b(p, j);
    }
}

// c += a * b'
void gemm_nt_acc(const Matrix& a, const Matrix& b, Matrix& c) {
  const std::size_t n = a.rows(), k = a.cols(), m = b.rows();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += a(i, p) * b(j, p);
      c(i, j) += s;
    }
}

// c += a' * b
void gemm_tn_acc(const Matrix& a, const Matrix& b, Matrix& c) {
  const std::size_t k = a.rows(), n = a.cols(), m = b.cols();
  for (std::size_t p = 0; p < k; ++p)
    for (std::size_t i = 0; i < n; ++i) {
      const double av = a(p, i);
      if (av == 0.0) continue;
      for (std::size_t j = 0; j < m; ++j) c(i, j) += av * b(p, j);
    }
}

Tape& tape_of(Var a) {
  if (!a.tape) throw std::invalid_argument("Var is not attached to a tape");
  return *a.tape;
}

Tape& tape_of(Var a, Var b) {
  if (a.tape != b.tape) throw std::invalid_argument("Vars belong to different tapes");
  return tape_of(a);
}

}  // namespace

Matrix& ParameterStore::add(const std::string& name, Matrix value) {
  auto [it, inserted] = params_.emplace(name, std::move(value));
  if (!inserted) throw std::invalid_argument("duplicate parameter name: " + name);
  return it->second;
}

Matrix& ParameterStore::at(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw std::out_of_range("unknown parameter: " + name);
  return it->second;
}

const Matrix& ParameterStore::at(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw std::out_of_range("unknown parameter: " + name);
  return it->second;
}

void ParameterStore::assign(const std::string& name, const Matrix& value) {
  Matrix& m = at(name);
  check_same("ParameterStore::assign", m, value);
  m = value;
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [name, m] : params_) n += m.size();
  return n;
}

GradientMap zero_gradients(const ParameterStore& store) {
  GradientMap g;
  for (const auto& [name, m] : store) g.emplace(name, Matrix(m.rows(), m.cols()));
  return g;
}

void accumulate(GradientMap& acc, const GradientMap& g, double scale) {
  for (const auto& [name, m] : g) {
    auto it = acc.find(name);
    if (it == acc.end()) {
      Matrix z(m.rows(), m.cols());
      it = acc.emplace(name, std::move(z)).first;
    }
    check_same("accumulate", it->second, m);
    for (std::size_t i = 0; i < m.size(); ++i) it->second[i] += scale * m[i];
  }
}

const Matrix& Var::value() const { return tape->value(*this); }

double Var::scalar() const {
  const Matrix& m = value();
  if (m.size() != 1) throw std::invalid_argument("Var::scalar on " + m.shape_string());
  return m[0];
}

Var Tape::constant(Matrix value) { return record(std::move(value), nullptr); }

Var Tape::param(const ParameterStore& store, const std::string& name) {
  auto it = param_ids_.find(name);
  if (it != param_ids_.end()) return Var{this, it->second};
  Var v = record(store.at(name), nullptr);
  param_ids_.emplace(name, v.id);
  return v;
}

Var Tape::record(Matrix value, Backward backward) {
  assert_finite(value);
  nodes_.push_back(Node{std::move(value), Matrix(), std::move(backward)});
  return Var{this, static_cast<int>(nodes_.size() - 1)};
}

Matrix& Tape::grad(Var v) {
  Node& n = nodes_[v.id];
  if (n.grad.empty() && !n.value.empty()) n.grad = Matrix(n.value.rows(), n.value.cols());
  return n.grad;
}

void Tape::backward(Var loss) {
  if (loss.tape != this) throw std::invalid_argument("backward: loss is on another tape");
  if (value(loss).size() != 1) throw std::invalid_argument("backward: loss must be scalar");
  for (auto& n : nodes_) n.grad = Matrix();
  grad(loss)[0] = 1.0;
  for (int i = loss.id; i >= 0; --i) {
    Node& n = nodes_[i];
    if (!n.backward || n.grad.empty()) continue;
    n.backward(*this, n.grad);
  }
}

GradientMap Tape::parameter_gradients(const ParameterStore& store) const {
  GradientMap out = zero_gradients(store);
  for (const auto& [name, id] : param_ids_) {
    auto it = out.find(name);
    if (it == out.end()) continue;
    const Matrix& g = nodes_[id].grad;
    if (!g.empty()) it->second = g;
  }
  return out;
}

Var matmul(Var a, Var b) {
  Tape& t = tape_of(a, b);
  const Matrix &av = t.value(a), &bv = t.value(b);
  if (av.cols() != bv.rows()) shape_error("matmul", av, bv);
  Matrix out(av.rows(), bv.cols());
  gemm_acc(av, bv, out);
  return t.record(std::move(out), [a, b](Tape& tp, const Matrix& g) {
    gemm_nt_acc(g, tp.value(b), tp.grad(a));
    gemm_tn_acc(tp.value(a), g, tp.grad(b));
  });
}

Var add(Var a, Var b) {
  Tape& t = tape_of(a, b);
  check_same("add", t.value(a), t.value(b));
  Matrix out = t.value(a);
  const Matrix& bv = t.value(b);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  return t.record(std::move(out), [a, b](Tape& tp, const Matrix& g) {
    Matrix& ga = tp.grad(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    Matrix& gb = tp.grad(b);
    for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
  });
}

Var sub(Var a, Var b) {
  Tape& t = tape_of(a, b);
  check_same("sub", t.value(a), t.value(b));
  Matrix out = t.value(a);
  const Matrix& bv = t.value(b);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
  return t.record(std::move(out), [a, b](Tape& tp, const Matrix& g) {
    Matrix& ga = tp.grad(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    Matrix& gb = tp.grad(b);
    for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
  });
}

Var hadamard(Var a, Var b) {
  Tape& t = tape_of(a, b);
  check_same("hadamard", t.value(a), t.value(b));
  Matrix out = t.value(a);
  const Matrix& bv = t.value(b);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  return t.record(std::move(out), [a, b](Tape& tp, const Matrix& g) {
    const Matrix &av = tp.value(a), &bv = tp.value(b);
    Matrix& ga = tp.grad(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
    Matrix& gb = tp.grad(b);
    for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
  });
}

Var scale(Var a, double s) {
  Tape& t = tape_of(a);
  Matrix out = t.value(a);
  for (double& v : out.values()) v *= s;
  return t.record(std::move(out), [a, s](Tape& tp, const Matrix& g) {
    Matrix& ga = tp.grad(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += s * g[i];
  });
}

Var add_scalar(Var a, double s) {
  Tape& t = tape_of(a);
  Matrix out = t.value(a);
  for (double& v : out.values()) v += s;
  return t.record(std::move(out), [a](Tape& tp, const Matrix& g) {
    Matrix& ga = tp.grad(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
  });
}

namespace {

// Pointwise op whose derivative is expressed through its own output.
template <class F, class D>
Var pointwise(Var a, F f, D d_from_out) {
  Tape& t = tape_of(a);
  Matrix out = t.value(a);
  for (double& v : out.values()) v = f(v);
  const int out_id = static_cast<int>(t.size());
  return t.record(std::move(out), [a, out_id, d_from_out](Tape& tp, const Matrix& g) {
    const Matrix& y = tp.value(Var{&tp, out_id});
    Matrix& ga = tp.grad(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * d_from_out(y[i]);
  });
}

}  // namespace

Var sigmoid(Var a) {
  return pointwise(
      a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); }, [](double y) { return y * (1.0 - y); });
}

Var tanh(Var a) {
  return pointwise(
      a, [](double x) { return std::tanh(x); }, [](double y) { return 1.0 - y * y; });
}

Var relu(Var a) {
  return pointwise(
      a, [](double x) { return x > 0.0 ? x : 0.0; }, [](double y) { return y > 0.0 ? 1.0 : 0.0; });
}

Var concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_rows: no inputs");
  Tape& t = tape_of(parts[0]);
  const std::size_t cols = t.value(parts[0]).cols();
  std::size_t rows = 0;
  for (Var p : parts) {
    tape_of(parts[0], p);
    if (t.value(p).cols() != cols) shape_error("concat_rows", t.value(parts[0]), t.value(p));
    rows += t.value(p).rows();
  }
  Matrix out(rows, cols);
  std::size_t off = 0;
  for (Var p : parts) {
    const Matrix& v = t.value(p);
    for (std::size_t i = 0; i < v.size(); ++i) out[off + i] = v[i];
    off += v.size();
  }
  return t.record(std::move(out), [parts](Tape& tp, const Matrix& g) {
    std::size_t off = 0;
    for (Var p : parts) {
      Matrix& gp = tp.grad(p);
      for (std::size_t i = 0; i < gp.size(); ++i) gp[i] += g[off + i];
      off += gp.size();
    }
  });
}

Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: no inputs");
  Tape& t = tape_of(parts[0]);
  const std::size_t rows = t.value(parts[0]).rows();
  std::size_t cols = 0;
  for (Var p : parts) {
    tape_of(parts[0], p);
    if (t.value(p).rows() != rows) shape_error("concat_cols", t.value(parts[0]), t.value(p));
    cols += t.value(p).cols();
  }
  Matrix out(rows, cols);
  std::size_t off = 0;
  for (Var p : parts) {
    const Matrix& v = t.value(p);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < v.cols(); ++c) out(r, off + c) = v(r, c);
    off += v.cols();
  }
  return t.record(std::move(out), [parts](Tape& tp, const Matrix& g) {
    std::size_t off = 0;
    for (Var p : parts) {
      Matrix& gp = tp.grad(p);
      for (std::size_t r = 0; r < gp.rows(); ++r)
        for (std::size_t c = 0; c < gp.cols(); ++c) gp(r, c) += g(r, off + c);
      off += gp.cols();
    }
  });
}

Var slice_rows(Var a, std::size_t begin, std::size_t count) {
  Tape& t = tape_of(a);
  const Matrix& v = t.value(a);
  if (begin + count > v.rows()) throw std::invalid_argument("slice_rows: range outside " + v.shape_string());
  const std::size_t cols = v.cols();
  std::vector<double> data(v.storage().begin() + begin * cols, v.storage().begin() + (begin + count) * cols);
  return t.record(Matrix(count, cols, std::move(data)), [a, begin, cols](Tape& tp, const Matrix& g) {
    Matrix& ga = tp.grad(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga[begin * cols + i] += g[i];
  });
}

Var sum(Var a) {
  Tape& t = tape_of(a);
  double s = 0.0;
  for (double v : t.value(a).values()) s += v;
  return t.record(Matrix(1, 1, s), [a](Tape& tp, const Matrix& g) {
    Matrix& ga = tp.grad(a);
    for (double& v : ga.values()) v += g[0];
  });
}

Var mean_rows(Var a) {
  Tape& t = tape_of(a);
  const Matrix& v = t.value(a);
  if (v.rows() == 0) throw std::invalid_argument("mean_rows: no rows");
  Matrix out(1, v.cols());
  for (std::size_t r = 0; r < v.rows(); ++r)
    for (std::size_t c = 0; c < v.cols(); ++c) out(0, c) += v(r, c);
  const double inv = 1.0 / static_cast<double>(v.rows());
  for (double& x : out.values()) x *= inv;
  return t.record(std::move(out), [a, inv](Tape& tp, const Matrix& g) {
    Matrix& ga = tp.grad(a);
    for (std::size_t r = 0; r < ga.rows(); ++r)
      for (std::size_t c = 0; c < ga.cols(); ++c) ga(r, c) += inv * g(0, c);
  });
}

Var add_row_broadcast(Var a, Var row) {
  Tape& t = tape_of(a, row);
  const Matrix &av = t.value(a), &rv = t.value(row);
  if (rv.rows() != 1 || rv.cols() != av.cols()) shape_error("add_row_broadcast", av, rv);
  Matrix out = av;
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) += rv(0, c);
  return t.record(std::move(out), [a, row](Tape& tp, const Matrix& g) {
    Matrix& ga = tp.grad(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    Matrix& gr = tp.grad(row);
    for (std::size_t r = 0; r < g.rows(); ++r)
      for (std::size_t c = 0; c < g.cols(); ++c) gr(0, c) += g(r, c);
  });
}

Var spmm(const SparseMatrix& s, Var x) {
  Tape& t = tape_of(x);
  const Matrix& xv = t.value(x);
  if (s.cols != xv.rows()) throw std::invalid_argument("spmm: sparse cols do not match " + xv.shape_string());
  Matrix out(s.rows, xv.cols());
  for (const auto& e : s.entries)
    for (std::size_t c = 0; c < xv.cols(); ++c) out(e.row, c) += e.weight * xv(e.col, c);
  return t.record(std::move(out), [s, x](Tape& tp, const Matrix& g) {
    Matrix& gx = tp.grad(x);
    for (const auto& e : s.entries)
      for (std::size_t c = 0; c < g.cols(); ++c) gx(e.col, c) += e.weight * g(e.row, c);
  });
}

Var quad_form(Var x, const Matrix& q) {
  Tape& t = tape_of(x);
  const Matrix& xv = t.value(x);
  if (xv.cols() != 1 || q.rows() != xv.rows() || q.cols() != xv.rows()) shape_error("quad_form", xv, q);
  const std::size_t n = xv.rows();
  double val = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) val += xv[i] * q(i, j) * xv[j];
  return t.record(Matrix(1, 1, val), [x, q](Tape& tp, const Matrix& g) {
    const Matrix& xv = tp.value(x);
    Matrix& gx = tp.grad(x);
    const std::size_t n = xv.rows();
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += (q(i, j) + q(j, i)) * xv[j];
      gx[i] += g[0] * s;
    }
  });
}

Var external_scalar(Var x, double value, Matrix grad_wrt_x) {
  Tape& t = tape_of(x);
  check_same("external_scalar", t.value(x), grad_wrt_x);
  return t.record(Matrix(1, 1, value), [x, gx = std::move(grad_wrt_x)](Tape& tp, const Matrix& g) {
    Matrix& out = tp.grad(x);
    for (std::size_t i = 0; i < gx.size(); ++i) out[i] += g[0] * gx[i];
  });
}

}  // namespace qmeta::nn
