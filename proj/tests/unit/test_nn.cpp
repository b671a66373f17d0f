#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>

#include "qmeta/nn/adam.hpp"
#include "qmeta/nn/checkpoint.hpp"
#include "qmeta/nn/layers.hpp"

using namespace qmeta;
using namespace qmeta::nn;

namespace {

using LossFn = std::function<Var(Tape&, const ParameterStore&)>;

double eval_loss(const LossFn& f, const ParameterStore& store) {
  Tape t;
  return f(t, store).scalar();
}

// Max relative error between tape gradients and central differences over
// every scalar in the store.
double gradient_check(const LossFn& f, ParameterStore store, double h = 1e-5) {
  Tape tape;
  Var loss = f(tape, store);
  tape.backward(loss);
  auto grads = tape.parameter_gradients(store);
  double worst = 0.0;
  for (auto& [name, m] : store) {
    for (std::size_t i = 0; i < m.size(); ++i) {
      const double orig = m[i];
      m[i] = orig + h;
      const double up = eval_loss(f, store);
      m[i] = orig - h;
      const double dn = eval_loss(f, store);
      m[i] = orig;
      const double fd = (up - dn) / (2 * h);
      const double an = grads.at(name)[i];
      const double rel = std::abs(fd - an) / std::max(1e-6, std::abs(fd) + std::abs(an));
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

ParameterStore random_store(Rng& rng, std::initializer_list<std::pair<const char*, std::pair<int, int>>> shapes) {
  ParameterStore s;
  for (auto& [name, shape] : shapes) s.add(name, uniform_matrix(shape.first, shape.second, 1.0, rng));
  return s;
}

double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

TEST_CASE("shape errors are reported") {
  Tape t;
  Var a = t.constant(Matrix(2, 3));
  Var b = t.constant(Matrix(2, 2));
  CHECK_THROWS_AS(matmul(a, b), std::invalid_argument);
  CHECK_THROWS_AS(add(a, b), std::invalid_argument);
  CHECK_THROWS_AS(hadamard(a, b), std::invalid_argument);
  CHECK_THROWS_AS(concat_rows({a, b}), std::invalid_argument);
  CHECK_THROWS_AS(slice_rows(a, 1, 2), std::invalid_argument);
  CHECK_THROWS_AS(t.backward(a), std::invalid_argument);
  ParameterStore s;
  s.add("w", Matrix(2, 2));
  CHECK_THROWS(s.add("w", Matrix(1, 1)));
  CHECK_THROWS(s.assign("w", Matrix(3, 1)));
}

TEST_CASE("linear loss gradient is the outer product with ones") {
  ParameterStore s;
  s.add("W", Matrix(2, 3, std::vector<double>{1, 2, 3, 4, 5, 6}));
  s.add("unused", Matrix(2, 2, 1.0));
  Tape t;
  Var x = t.constant(Matrix::column({0.5, -1.0, 2.0}));
  Var loss = sum(matmul(t.param(s, "W"), x));
  t.backward(loss);
  auto g = t.parameter_gradients(s);
  CHECK(g.at("W") == Matrix(2, 3, std::vector<double>{0.5, -1.0, 2.0, 0.5, -1.0, 2.0}));
  CHECK(g.at("unused") == Matrix(2, 2));
}

TEST_CASE("every primitive passes a finite-difference check") {
  Rng rng(3);
  SUBCASE("matmul / add / sub / hadamard / scale") {
    auto s = random_store(rng, {{"A", {3, 4}}, {"B", {4, 2}}, {"C", {3, 2}}});
    CHECK(gradient_check(
              [](Tape& t, const ParameterStore& st) {
                Var ab = matmul(t.param(st, "A"), t.param(st, "B"));
                Var c = t.param(st, "C");
                return sum(hadamard(sub(add(ab, c), scale(c, 0.3)), add_scalar(ab, 0.7)));
              },
              s) < 1e-4);
  }
  SUBCASE("sigmoid / tanh / relu") {
    auto s = random_store(rng, {{"x", {5, 3}}});
    CHECK(gradient_check(
              [](Tape& t, const ParameterStore& st) {
                Var x = t.param(st, "x");
                return sum(hadamard(add(sigmoid(x), tanh(scale(x, 1.3))), add_scalar(relu(x), 0.2)));
              },
              s) < 1e-4);
  }
  SUBCASE("concat / slice / mean / broadcast") {
    auto s = random_store(rng, {{"a", {2, 3}}, {"b", {4, 3}}, {"r", {1, 3}}, {"c", {6, 2}}});
    CHECK(gradient_check(
              [](Tape& t, const ParameterStore& st) {
                Var stacked = concat_rows({t.param(st, "a"), t.param(st, "b")});
                Var wide = concat_cols({stacked, t.param(st, "c")});
                Var part = slice_rows(wide, 1, 4);
                Var m = mean_rows(tanh(part));
                Var bc = add_row_broadcast(stacked, t.param(st, "r"));
                return add(sum(hadamard(m, m)), sum(tanh(bc)));
              },
              s) < 1e-4);
  }
  SUBCASE("spmm / quad_form / external_scalar") {
    auto s = random_store(rng, {{"x", {4, 2}}, {"v", {3, 1}}});
    SparseMatrix sp{3, 4, {{0, 1, 0.5}, {0, 3, -1.0}, {2, 0, 2.0}, {1, 1, 1.5}}};
    Matrix q(3, 3, std::vector<double>{0, 1, -2, 1, 0, 0.5, -2, 0.5, 0});
    CHECK(gradient_check(
              [&](Tape& t, const ParameterStore& st) {
                Var y = spmm(sp, t.param(st, "x"));
                Var v = t.param(st, "v");
                Var qf = quad_form(v, q);
                // f(v) = sum(v^3), supplied externally
                double val = 0;
                Matrix gv(3, 1);
                for (std::size_t i = 0; i < 3; ++i) {
                  val += std::pow(v.value()[i], 3);
                  gv[i] = 3 * v.value()[i] * v.value()[i];
                }
                return add(add(sum(tanh(y)), qf), external_scalar(v, val, gv));
              },
              s) < 1e-4);
  }
}

TEST_CASE("LSTM cell with zero weights") {
  ParameterStore s;
  s.add("l.W_x", Matrix(8, 3));
  s.add("l.W_h", Matrix(8, 2));
  s.add("l.b", Matrix(8, 1));
  Tape t;
  auto p = bind_lstm(t, s, "l");
  const Matrix sprev = Matrix::column({0.8, -2.0});
  auto out = lstm_cell(p, t.constant(Matrix::column({1, 2, 3})), t.constant(Matrix::column({0.3, 0.1})),
                       t.constant(sprev));
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(out.s.value()[k] == doctest::Approx(0.5 * sprev[k]));
    CHECK(out.h.value()[k] == doctest::Approx(0.5 * std::tanh(0.5 * sprev[k])));
  }
  auto zero = lstm_cell(p, t.constant(Matrix(3, 1)), t.constant(Matrix(2, 1)), t.constant(Matrix(2, 1)));
  CHECK(zero.h.value() == Matrix(2, 1));
  CHECK(zero.s.value() == Matrix(2, 1));
}

TEST_CASE("LSTM init uses the forget bias and the 1/sqrt(H) bound") {
  ParameterStore s;
  Rng rng(1);
  init_lstm(s, "l", 5, 4, rng);
  const Matrix& b = s.at("l.b");
  for (std::size_t k = 0; k < 16; ++k) CHECK(b[k] == (k >= 4 && k < 8 ? 1.0 : 0.0));
  for (double v : s.at("l.W_x").values()) CHECK(std::abs(v) <= 0.5);
  CHECK(s.at("l.W_h").rows() == 16);
}

TEST_CASE("LSTM forward matches a scalar re-implementation") {
  Rng rng(5);
  ParameterStore s;
  init_lstm(s, "l", 3, 4, rng);
  s.at("l.b") = uniform_matrix(16, 1, 1.0, rng);
  const Matrix z = uniform_matrix(3, 1, 1.0, rng), h0 = uniform_matrix(4, 1, 1.0, rng),
               s0 = uniform_matrix(4, 1, 1.0, rng);
  Tape t;
  auto out = lstm_cell(bind_lstm(t, s, "l"), t.constant(z), t.constant(h0), t.constant(s0));

  const Matrix &wx = s.at("l.W_x"), &wh = s.at("l.W_h"), &b = s.at("l.b");
  for (int k = 0; k < 4; ++k) {
    double gate[4];
    for (int g = 0; g < 4; ++g) {
      const int row = g * 4 + k;
      double a = b(row, 0);
      for (int j = 0; j < 3; ++j) a += wx(row, j) * z[j];
      for (int j = 0; j < 4; ++j) a += wh(row, j) * h0[j];
      gate[g] = a;
    }
    const double i = sig(gate[0]), f = sig(gate[1]), c = std::tanh(gate[2]), o = sig(gate[3]);
    const double sn = f * s0[k] + i * c;
    CHECK(std::abs(out.s.value()[k] - sn) < 1e-12);
    CHECK(std::abs(out.h.value()[k] - o * std::tanh(sn)) < 1e-12);
  }
}

TEST_CASE("LSTM unrolled over three steps agrees with finite differences") {
  Rng rng(8);
  ParameterStore s;
  init_lstm(s, "l", 3, 4, rng);
  s.add("W_out", uniform_matrix(2, 4, 0.5, rng));
  std::vector<Matrix> inputs;
  for (int k = 0; k < 3; ++k) inputs.push_back(uniform_matrix(3, 1, 1.0, rng));
  auto f = [&](Tape& t, const ParameterStore& st) {
    auto p = bind_lstm(t, st, "l");
    LstmState state{t.constant(Matrix(4, 1)), t.constant(Matrix(4, 1))};
    Var w = t.param(st, "W_out");
    Var loss = t.constant(Matrix(1, 1));
    for (int k = 0; k < 3; ++k) {
      state = lstm_cell(p, t.constant(inputs[k]), state.h, state.s);
      Var y = matmul(w, state.h);
      loss = add(loss, scale(sum(hadamard(y, y)), (k + 1) / 10.0));
    }
    return loss;
  };
  CHECK(gradient_check(f, s) < 1e-4);
}

TEST_CASE("MLP forward") {
  Rng rng(2);
  SUBCASE("zero weights give the output bias") {
    ParameterStore s;
    init_mlp(s, "m", {3, 5, 2}, rng);
    for (auto& [name, m] : s) m.fill(0.0);
    s.at("m.b1") = Matrix(1, 2, std::vector<double>{0.25, -1.5});
    Tape t;
    Var y = mlp_forward(t, s, "m", 2, t.constant(uniform_matrix(4, 3, 1.0, rng)));
    for (std::size_t r = 0; r < 4; ++r) {
      CHECK(y.value()(r, 0) == 0.25);
      CHECK(y.value()(r, 1) == -1.5);
    }
  }
  SUBCASE("a single layer is affine") {
    ParameterStore s;
    s.add("m.W0", Matrix(2, 2, std::vector<double>{1, 2, 3, 4}));
    s.add("m.b0", Matrix(1, 2, std::vector<double>{0.5, -0.5}));
    Tape t;
    Var y = mlp_forward(t, s, "m", 1, t.constant(Matrix(1, 2, std::vector<double>{1, -1})));
    CHECK(y.value() == Matrix(1, 2, std::vector<double>{-1.5, -2.5}));
  }
  SUBCASE("gradient check") {
    ParameterStore s;
    init_mlp(s, "m", {3, 6, 2}, rng);
    for (auto& [name, m] : s)
      for (double& v : m.values()) v += 0.1;
    const Matrix x = uniform_matrix(5, 3, 1.0, rng);
    CHECK(gradient_check([&](Tape& t, const ParameterStore& st) { return sum(tanh(mlp_forward(t, st, "m", 2, t.constant(x)))); },
                         s) < 1e-4);
  }
}

TEST_CASE("tape replay is bit-identical") {
  Rng rng(11);
  ParameterStore s;
  init_lstm(s, "l", 3, 5, rng);
  auto run = [&] {
    Tape t;
    auto p = bind_lstm(t, s, "l");
    LstmState st{t.constant(Matrix(5, 1)), t.constant(Matrix(5, 1))};
    for (int k = 0; k < 4; ++k) st = lstm_cell(p, t.constant(Matrix::column({0.1 * k, -0.2, 0.3})), st.h, st.s);
    Var loss = sum(st.h);
    t.backward(loss);
    return std::make_pair(loss.scalar(), t.parameter_gradients(s));
  };
  auto a = run(), b = run();
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);
}

TEST_CASE("Adam") {
  ParameterStore s;
  s.add("w", Matrix::column({1.0, -2.0, 0.5}));
  SUBCASE("zero gradient leaves parameters unchanged") {
    Adam adam(AdamConfig{.lr = 0.01});
    adam.step(s, zero_gradients(s));
    CHECK(s.at("w") == Matrix::column({1.0, -2.0, 0.5}));
    CHECK(adam.steps() == 1);
  }
  SUBCASE("first step is -lr * sign(g)") {
    Adam adam(AdamConfig{.lr = 0.01});
    adam.step(s, GradientMap{{"w", Matrix::column({3.0, -0.2, 1e-3})}});
    CHECK(s.at("w")[0] == doctest::Approx(1.0 - 0.01).epsilon(1e-8));
    CHECK(s.at("w")[1] == doctest::Approx(-2.0 + 0.01).epsilon(1e-8));
    CHECK(s.at("w")[2] == doctest::Approx(0.5 - 0.01).epsilon(1e-6));
  }
  SUBCASE("constant gradient steps tend to lr * sign(g)") {
    Adam adam(AdamConfig{.lr = 0.001});
    Matrix prev = s.at("w");
    for (int k = 0; k < 5000; ++k) {
      prev = s.at("w");
      adam.step(s, GradientMap{{"w", Matrix::column({2.0, -5.0, 0.1})}});
    }
    CHECK(s.at("w")[0] - prev[0] == doctest::Approx(-0.001).epsilon(1e-6));
    CHECK(s.at("w")[1] - prev[1] == doctest::Approx(0.001).epsilon(1e-6));
    CHECK(s.at("w")[2] - prev[2] == doctest::Approx(-0.001).epsilon(1e-6));
  }
  SUBCASE("shape mismatch throws") {
    Adam adam;
    CHECK_THROWS_AS(adam.step(s, GradientMap{{"w", Matrix(2, 1)}}), std::invalid_argument);
  }
}

TEST_CASE("checkpoint round trip") {
  Rng rng(4);
  Checkpoint c;
  init_lstm(c.params, "lstm", 9, 6, rng);
  c.params.add("W_out", uniform_matrix(8, 6, 1.0, rng));
  c.params.at("W_out")[0] = -0.0;
  c.global_step = 1234;
  c.config_hash = "abcdef0123456789";
  c.metadata["class"] = "maxcut";
  const auto stem = std::filesystem::temp_directory_path() / "qmeta_ckpt_test" / "model";
  save_checkpoint(stem, c);
  REQUIRE(checkpoint_exists(stem));
  auto back = load_checkpoint(stem);
  CHECK(back.params == c.params);
  CHECK(std::signbit(back.params.at("W_out")[0]));
  CHECK(back.global_step == 1234);
  CHECK(back.config_hash == c.config_hash);
  CHECK(back.metadata == c.metadata);
  CHECK(std::filesystem::file_size(stem.string() + ".bin") == 8 * c.params.scalar_count());

  // first eight bytes of the blob are the first value of the first tensor
  std::ifstream bin(stem.string() + ".bin", std::ios::binary);
  unsigned char bytes[8];
  bin.read(reinterpret_cast<char*>(bytes), 8);
  std::uint64_t bits = 0;
  for (int k = 0; k < 8; ++k) bits |= static_cast<std::uint64_t>(bytes[k]) << (8 * k);
  CHECK(std::bit_cast<double>(bits) == c.params.begin()->second[0]);
  std::filesystem::remove_all(stem.parent_path());
  CHECK_THROWS(load_checkpoint(stem));
}
