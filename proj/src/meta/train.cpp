#include "qmeta/meta/train.hpp"

#include <numeric>
#include <stdexcept>

#include "qmeta/nn/adam.hpp"
#include "qmeta/parallel.hpp"

namespace qmeta::meta {

LossAndGradient batch_loss_and_gradient(const MetaOptimizerModel& model, const std::vector<const TrainInstance*>& batch,
                                        const std::vector<double>& omega) {
  if (batch.empty()) throw std::invalid_argument("batch_loss_and_gradient: empty batch");
  std::vector<LossAndGradient> parts(batch.size());
  parallel_for(batch.size(), [&](std::size_t i) {
    parts[i] = meta_loss_and_gradient(model, batch[i]->h, batch[i]->g, omega);
  });
  LossAndGradient out;
  out.grad = nn::zero_gradients(model.params);
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (const auto& p : parts) {
    out.loss += p.loss * inv;
    nn::accumulate(out.grad, p.grad, inv);
  }
  return out;
}

double mean_final_energy(const MetaOptimizerModel& model, const std::vector<TrainInstance>& data) {
  std::vector<double> finals(data.size());
  parallel_for(data.size(), [&](std::size_t i) { finals[i] = rollout(model, data[i].h, data[i].g).normalized.back(); });
  double s = 0.0;
  for (double v : finals) s += v;
  return s / static_cast<double>(data.size());
}

TrainResult train(MetaOptimizerModel model, const std::vector<TrainInstance>& data, const TrainConfig& cfg) {
  if (data.empty()) throw std::invalid_argument("train: empty dataset");
  if (cfg.batch < 1) throw std::invalid_argument("train: batch must be positive");
  const auto omega = default_loss_weights(model.config.T);
  nn::Adam adam(nn::AdamConfig{.lr = cfg.lr});
  Rng rng(derive_seed(cfg.seed, 0x7a11));

  TrainResult res;
  double best = 0.0;
  std::vector<std::size_t> order(data.size());
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i - 1)))]);

    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch));
      std::vector<const TrainInstance*> batch;
      for (std::size_t k = start; k < stop; ++k) batch.push_back(&data[order[k]]);
      auto lg = batch_loss_and_gradient(model, batch, omega);
      loss_sum += lg.loss * static_cast<double>(batch.size());
      adam.step(model.params, lg.grad);
      ++res.global_step;
    }
    EpochLog log{epoch, loss_sum / static_cast<double>(data.size()), mean_final_energy(model, data)};
    res.history.push_back(log);
    if (epoch == 1 || log.mean_final_energy < best) {
      best = log.mean_final_energy;
      res.best_epoch = epoch;
      res.model = model;
    }
  }
  if (cfg.epochs < 1) res.model = model;
  return res;
}

MetaOptimizerModel fine_tune(const MetaOptimizerModel& model, const TrainInstance& instance, int steps, double lr) {
  MetaOptimizerModel adapted = model;
  nn::Adam adam(nn::AdamConfig{.lr = lr});
  const auto omega = default_loss_weights(model.config.T);
  for (int s = 0; s < steps; ++s) {
    auto lg = meta_loss_and_gradient(adapted, instance.h, instance.g, omega);
    adam.step(adapted.params, lg.grad);
  }
  return adapted;
}

}  // namespace qmeta::meta
