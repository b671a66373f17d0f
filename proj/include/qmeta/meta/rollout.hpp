#pragma once

#include <optional>
#include <span>
#include <vector>

#include "qmeta/meta/model.hpp"
#include "qmeta/qaoa.hpp"

namespace qmeta::meta {

struct Rollout {
  double initial_normalized = 0;       // E~_0 of the uniform superposition
  std::vector<ParameterVector> thetas;  // theta_1..theta_T
  std::vector<double> energies;         // E_t
  std::vector<double> normalized;       // E~_t = E_t / ||H||_1
};

/// omega_t = t / 10 for t = 1..T.
std::vector<double> default_loss_weights(int T);

/// sum_t omega_t E~_t.
double meta_loss(const Rollout& r, const std::vector<double>& omega);

struct RolloutOptions {
  int T = 0;  // 0: use the model's horizon
  // When set, the energy fed back as input at step t is taken from here
  // (length T, entry t-1 is E~_{t-1}) instead of from the simulator. With
  // the values of an unperturbed rollout this freezes the feedback path,
  // which is what finite-difference checks of the training gradient need.
  std::optional<std::vector<double>> feedback;
};

/// Forward rollout. `g` is the conditioning embedding, empty for none.
Rollout rollout(const MetaOptimizerModel& model, const CostHamiltonian& h, std::span<const double> g,
                const RolloutOptions& opt = {});

struct LossAndGradient {
  Rollout rollout;
  double loss = 0;
  nn::GradientMap grad;
};

/// Rollout plus d(meta_loss)/d(params). Gradients flow through the network
/// and through the simulator (adjoint), but not through the fed-back energy.
LossAndGradient meta_loss_and_gradient(const MetaOptimizerModel& model, const CostHamiltonian& h,
                                       std::span<const double> g, const std::vector<double>& omega,
                                       const RolloutOptions& opt = {});

}  // namespace qmeta::meta
