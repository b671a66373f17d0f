#include "qmeta/nn/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace qmeta::nn {

namespace {

void update(double* x, const double* g, double* m, double* v, std::size_t n, const AdamConfig& c, long t) {
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
    v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g[i] * g[i];
    const double mhat = m[i] / bc1;
    const double vhat = v[i] / bc2;
    x[i] -= c.lr * mhat / (std::sqrt(vhat) + c.eps);
  }
}

}  // namespace

void Adam::step(ParameterStore& params, const GradientMap& grads) {
  for (const auto& [name, g] : grads) {
    const Matrix& p = params.at(name);
    if (!p.same_shape(g))
      throw std::invalid_argument("Adam: gradient for " + name + " is " + g.shape_string() + ", parameter is " +
                                  p.shape_string());
  }
  ++t_;
  for (const auto& [name, g] : grads) {
    Matrix& p = params.at(name);
    auto it = moments_.find(name);
    if (it == moments_.end())
      it = moments_.emplace(name, Moments{Matrix(p.rows(), p.cols()), Matrix(p.rows(), p.cols())}).first;
    update(p.values().data(), g.values().data(), it->second.m.values().data(), it->second.v.values().data(), p.size(),
           cfg_, t_);
  }
}

void AdamVector::step(std::vector<double>& x, const std::vector<double>& g) {
  if (x.size() != m_.size() || g.size() != m_.size()) throw std::invalid_argument("AdamVector: size mismatch");
  ++t_;
  update(x.data(), g.data(), m_.data(), v_.data(), x.size(), cfg_, t_);
}

}  // namespace qmeta::nn
