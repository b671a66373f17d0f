#include "qmeta/meta/rollout.hpp"

#include <stdexcept>

#include "qmeta/nn/layers.hpp"

namespace qmeta::meta {

using nn::Tape;
using nn::Var;

namespace {

struct Recorded {
  Rollout rollout;
  std::vector<Var> normalized;
};

Recorded record(Tape& t, const MetaOptimizerModel& model, const CostHamiltonian& h, std::span<const double> g,
                const RolloutOptions& opt, bool with_gradient) {
  const MetaConfig& cfg = model.config;
  const int T = opt.T > 0 ? opt.T : cfg.T;
  const std::size_t dim = 2 * static_cast<std::size_t>(cfg.p);
  if (!g.empty() && g.size() != cfg.embed_dim)
    throw std::invalid_argument("rollout: embedding has " + std::to_string(g.size()) + " entries, model expects " +
                                std::to_string(cfg.embed_dim));
  if (opt.feedback && opt.feedback->size() != static_cast<std::size_t>(T))
    throw std::invalid_argument("rollout: feedback override must have T entries");
  const double l1 = h.l1_norm();

  auto lstm = nn::bind_lstm(t, model.params, "lstm");
  Var w_out = t.param(model.params, "W_out");
  std::optional<Var> bias;
  if (!g.empty()) {
    Var proj = t.param(model.params, "P_embed");
    bias = matmul(proj, t.constant(Matrix::column({g.begin(), g.end()})));
  }

  Recorded rec;
  rec.rollout.initial_normalized = normalized_energy(expectation(prepare_plus_state(h.num_qubits()), h), h);
  nn::LstmState state{t.constant(Matrix(cfg.hidden, 1)), t.constant(Matrix(cfg.hidden, 1))};
  Var theta = t.constant(Matrix(dim, 1));
  double prev = rec.rollout.initial_normalized;
  for (int step = 0; step < T; ++step) {
    const double fed = opt.feedback ? (*opt.feedback)[step] : prev;
    Var z = nn::concat_rows({t.constant(Matrix(1, 1, fed)), theta});
    state = nn::lstm_cell(lstm, z, state.h, state.s);
    Var h_tilde = bias ? add(state.h, *bias) : state.h;
    theta = matmul(w_out, h_tilde);

    const auto angles = ParameterVector::from_flat(theta.value().values());
    double energy;
    Matrix grad(dim, 1);
    if (with_gradient) {
      auto eg = energy_and_gradient(h, angles);
      energy = eg.energy;
      for (std::size_t k = 0; k < dim; ++k) grad[k] = eg.grad[k] / l1;
    } else {
      energy = qaoa_energy(h, angles);
    }
    const double norm = normalized_energy(energy, h);
    rec.normalized.push_back(external_scalar(theta, norm, std::move(grad)));
    rec.rollout.thetas.push_back(angles);
    rec.rollout.energies.push_back(energy);
    rec.rollout.normalized.push_back(norm);
    prev = norm;
  }
  return rec;
}

}  // namespace

std::vector<double> default_loss_weights(int T) {
  std::vector<double> w(T);
  for (int t = 1; t <= T; ++t) w[t - 1] = t / 10.0;
  return w;
}

double meta_loss(const Rollout& r, const std::vector<double>& omega) {
  if (omega.size() != r.normalized.size()) throw std::invalid_argument("meta_loss: weight/trajectory length mismatch");
  double s = 0.0;
  for (std::size_t t = 0; t < omega.size(); ++t) s += omega[t] * r.normalized[t];
  return s;
}

Rollout rollout(const MetaOptimizerModel& model, const CostHamiltonian& h, std::span<const double> g,
                const RolloutOptions& opt) {
  Tape t;
  return record(t, model, h, g, opt, false).rollout;
}

LossAndGradient meta_loss_and_gradient(const MetaOptimizerModel& model, const CostHamiltonian& h,
                                       std::span<const double> g, const std::vector<double>& omega,
                                       const RolloutOptions& opt) {
  Tape t;
  auto rec = record(t, model, h, g, opt, true);
  if (omega.size() != rec.normalized.size()) throw std::invalid_argument("meta_loss: weight/trajectory length mismatch");
  Var loss = t.constant(Matrix(1, 1));
  for (std::size_t k = 0; k < omega.size(); ++k) loss = add(loss, scale(rec.normalized[k], omega[k]));
  t.backward(loss);
  LossAndGradient out;
  out.loss = meta_loss(rec.rollout, omega);
  out.grad = t.parameter_gradients(model.params);
  out.rollout = std::move(rec.rollout);
  return out;
}

}  // namespace qmeta::meta
