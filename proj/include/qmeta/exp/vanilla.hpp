#pragma once

#include <vector>

#include "qmeta/qaoa.hpp"

namespace qmeta::exp {

struct VanillaConfig {
  int max_steps = 500;
  double lr = 0.01;
  double tolerance = 1e-8;  // on |E_t - E_{t-1}|
};

struct VanillaResult {
  ParameterVector theta;
  int steps_used = 0;
  std::vector<double> energy_trace;  // E_0 (at the initial angles) .. E_steps
  StateVector final_state = StateVector::basis(1, 0);
};

/// gamma ~ U[-pi, pi), beta ~ U[-pi/2, pi/2).
ParameterVector random_initial_angles(int p, Rng& rng);

/// Adam on the raw energy from `init`.
VanillaResult optimize_from(const CostHamiltonian& h, ParameterVector init, const VanillaConfig& cfg = {});

inline VanillaResult run_vanilla_qaoa(const CostHamiltonian& h, int p, Rng& rng, const VanillaConfig& cfg = {}) {
  return optimize_from(h, random_initial_angles(p, rng), cfg);
}

}  // namespace qmeta::exp
