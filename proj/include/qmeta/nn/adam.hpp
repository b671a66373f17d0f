#pragma once

#include "qmeta/nn/tape.hpp"

namespace qmeta::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam with bias correction. Moments are created lazily per parameter name.
class Adam {
 public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

  /// One update of every parameter that has an entry in `grads`.
  void step(ParameterStore& params, const GradientMap& grads);

  long steps() const { return t_; }
  const AdamConfig& config() const { return cfg_; }

 private:
  struct Moments {
    Matrix m, v;
  };
  AdamConfig cfg_;
  long t_ = 0;
  std::map<std::string, Moments> moments_;
};

/// Plain-vector form for the vanilla QAOA baseline.
class AdamVector {
 public:
  explicit AdamVector(std::size_t n, AdamConfig cfg = {}) : cfg_(cfg), m_(n, 0.0), v_(n, 0.0) {}
  void step(std::vector<double>& x, const std::vector<double>& g);
  long steps() const { return t_; }

 private:
  AdamConfig cfg_;
  long t_ = 0;
  std::vector<double> m_, v_;
};

}  // namespace qmeta::nn
