#pragma once

#include <cstdint>
#include <vector>

#include "qmeta/meta/rollout.hpp"

namespace qmeta::meta {

struct TrainInstance {
  CostHamiltonian h;
  std::vector<double> g;  // empty when unconditioned
};

struct TrainConfig {
  int batch = 32;
  int epochs = 100;
  double lr = 1e-3;
  std::uint64_t seed = 0;
};

struct EpochLog {
  int epoch = 0;
  double mean_loss = 0;          // mean per-instance meta_loss over the epoch's batches
  double mean_final_energy = 0;  // mean E~_T over the training set after the epoch
};

struct TrainResult {
  MetaOptimizerModel model;  // the epoch with the lowest mean_final_energy
  int best_epoch = 0;
  long global_step = 0;
  std::vector<EpochLog> history;
};

/// Mean of per-instance losses and gradients, reduced in instance order so
/// the result does not depend on the worker count.
LossAndGradient batch_loss_and_gradient(const MetaOptimizerModel& model, const std::vector<const TrainInstance*>& batch,
                                        const std::vector<double>& omega);

/// Mean final-step normalized energy of forward rollouts.
double mean_final_energy(const MetaOptimizerModel& model, const std::vector<TrainInstance>& data);

TrainResult train(MetaOptimizerModel model, const std::vector<TrainInstance>& data, const TrainConfig& cfg);

/// Copy of `model` after `steps` Adam updates on the single-instance loss.
MetaOptimizerModel fine_tune(const MetaOptimizerModel& model, const TrainInstance& instance, int steps = 5,
                             double lr = 1e-3);

}  // namespace qmeta::meta
