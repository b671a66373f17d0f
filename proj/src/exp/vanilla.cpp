#include "qmeta/exp/vanilla.hpp"

#include <cmath>
#include <numbers>

#include "qmeta/nn/adam.hpp"

namespace qmeta::exp {

ParameterVector random_initial_angles(int p, Rng& rng) {
  ParameterVector theta(p);
  for (double& g : theta.gamma) g = rng.uniform(-std::numbers::pi, std::numbers::pi);
  for (double& b : theta.beta) b = rng.uniform(-std::numbers::pi / 2, std::numbers::pi / 2);
  return theta;
}

VanillaResult optimize_from(const CostHamiltonian& h, ParameterVector init, const VanillaConfig& cfg) {
  std::vector<double> x = init.flat();
  nn::AdamVector adam(x.size(), nn::AdamConfig{.lr = cfg.lr});
  auto eg = energy_and_gradient(h, init);
  VanillaResult res;
  res.energy_trace.push_back(eg.energy);
  for (int step = 1; step <= cfg.max_steps; ++step) {
    adam.step(x, eg.grad);
    eg = energy_and_gradient(h, ParameterVector::from_flat(x));
    res.energy_trace.push_back(eg.energy);
    res.steps_used = step;
    if (std::abs(eg.energy - res.energy_trace[res.energy_trace.size() - 2]) < cfg.tolerance) break;
  }
  res.theta = ParameterVector::from_flat(x);
  res.final_state = run_qaoa(h, res.theta);
  return res;
}

}  // namespace qmeta::exp
