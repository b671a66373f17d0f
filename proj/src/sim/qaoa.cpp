#include "qmeta/qaoa.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qmeta/simd/kernels.hpp"

namespace qmeta {

ParameterVector::ParameterVector(std::vector<double> g, std::vector<double> b) : gamma(std::move(g)), beta(std::move(b)) {
  if (gamma.size() != beta.size()) throw std::invalid_argument("ParameterVector: gamma/beta length mismatch");
}

std::vector<double> ParameterVector::flat() const {
  std::vector<double> out(gamma);
  out.insert(out.end(), beta.begin(), beta.end());
  return out;
}

ParameterVector ParameterVector::from_flat(std::span<const double> theta) {
  if (theta.size() % 2 != 0) throw std::invalid_argument("ParameterVector::from_flat: odd length");
  const std::size_t p = theta.size() / 2;
  return ParameterVector(std::vector<double>(theta.begin(), theta.begin() + p),
                         std::vector<double>(theta.begin() + p, theta.end()));
}

StateVector::StateVector(int num_qubits, std::vector<cplx> amplitudes) : n_(num_qubits), amps_(std::move(amplitudes)) {
  if (n_ < 1 || n_ > kMaxQubits) throw std::invalid_argument("StateVector: qubit count out of range");
  if (amps_.size() != (std::size_t{1} << n_)) throw std::invalid_argument("StateVector: amplitude count != 2^n");
}

double StateVector::norm_squared() const { return simd::active_kernels().norm2(amps_.data(), amps_.size()); }

StateVector StateVector::basis(int num_qubits, std::uint64_t index) {
  std::vector<cplx> a(std::size_t{1} << num_qubits);
  a.at(index) = 1.0;
  return StateVector(num_qubits, std::move(a));
}

StateVector prepare_plus_state(int n) {
  if (n < 1 || n > kMaxQubits) throw std::invalid_argument("prepare_plus_state: n out of range");
  const std::size_t dim = std::size_t{1} << n;
  return StateVector(n, std::vector<cplx>(dim, cplx(std::pow(2.0, -0.5 * n), 0.0)));
}

namespace {

void check_dims(const StateVector& psi, const CostHamiltonian& h) {
  if (psi.num_qubits() != h.num_qubits()) throw std::invalid_argument("state/Hamiltonian qubit count mismatch");
}

/// exp(-i gamma H(x)) for every basis state, one sincos per distinct level.
void build_phases(const CostHamiltonian& h, double gamma, std::vector<cplx>& out, std::vector<cplx>& level_phase) {
  const auto& levels = h.levels();
  level_phase.resize(levels.size());
  for (std::size_t k = 0; k < levels.size(); ++k) level_phase[k] = std::polar(1.0, -gamma * levels[k]);
  const auto& idx = h.level_index();
  out.resize(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = level_phase[idx[i]];
}

}  // namespace

void apply_cost_layer(StateVector& psi, const CostHamiltonian& h, double gamma) {
  check_dims(psi, h);
  std::vector<cplx> phases, scratch;
  build_phases(h, gamma, phases, scratch);
  simd::active_kernels().mul_phase(psi.amplitudes().data(), phases.data(), phases.size(), false);
}

void apply_mixer_layer(StateVector& psi, double beta) {
  simd::active_kernels().rx_all(psi.amplitudes().data(), psi.num_qubits(), std::cos(beta), std::sin(beta));
}

StateVector run_qaoa(const CostHamiltonian& h, const ParameterVector& theta) {
  if (theta.depth() < 1) throw std::invalid_argument("run_qaoa: depth must be >= 1");
  const auto& k = simd::active_kernels();
  StateVector psi = prepare_plus_state(h.num_qubits());
  std::vector<cplx> phases, scratch;
  for (int l = 0; l < theta.depth(); ++l) {
    build_phases(h, theta.gamma[l], phases, scratch);
    k.mul_phase(psi.amplitudes().data(), phases.data(), phases.size(), false);
    k.rx_all(psi.amplitudes().data(), psi.num_qubits(), std::cos(theta.beta[l]), std::sin(theta.beta[l]));
  }
  return psi;
}

double expectation(const StateVector& psi, const CostHamiltonian& h) {
  check_dims(psi, h);
  return simd::active_kernels().expect_diag(psi.amplitudes().data(), h.diagonal().data(), psi.dimension());
}

EnergyGradient energy_and_gradient(const CostHamiltonian& h, const ParameterVector& theta) {
  const int p = theta.depth();
  if (p < 1) throw std::invalid_argument("energy_and_gradient: depth must be >= 1");
  const auto& k = simd::active_kernels();
  const int n = h.num_qubits();
  const std::size_t dim = h.dimension();
  const double* diag = h.diagonal().data();

  StateVector state = prepare_plus_state(n);
  cplx* psi = state.amplitudes().data();
  std::vector<std::vector<cplx>> phases(p);
  std::vector<cplx> scratch;
  for (int l = 0; l < p; ++l) {
    build_phases(h, theta.gamma[l], phases[l], scratch);
    k.mul_phase(psi, phases[l].data(), dim, false);
    k.rx_all(psi, n, std::cos(theta.beta[l]), std::sin(theta.beta[l]));
  }

  EnergyGradient out;
  out.energy = k.expect_diag(psi, diag, dim);
  out.grad.assign(2 * p, 0.0);

  // Co-state lambda = H psi, walked back through the inverse layers together
  // with psi. dE/dtheta = 2 Im <lambda| G |psi> at each generator G.
  std::vector<cplx> lambda(dim);
  k.apply_diag(psi, diag, lambda.data(), dim);
  for (int l = p - 1; l >= 0; --l) {
    out.grad[p + l] = 2.0 * k.im_inner_xsum(lambda.data(), psi, n);
    const double c = std::cos(theta.beta[l]), s = std::sin(theta.beta[l]);
    k.rx_all(psi, n, c, -s);
    k.rx_all(lambda.data(), n, c, -s);

    out.grad[l] = 2.0 * k.im_inner_diag(lambda.data(), diag, psi, dim);
    k.mul_phase(psi, phases[l].data(), dim, true);
    k.mul_phase(lambda.data(), phases[l].data(), dim, true);
  }
  return out;
}

std::vector<double> exact_probabilities(const StateVector& psi) {
  std::vector<double> p(psi.dimension());
  simd::active_kernels().probabilities(psi.amplitudes().data(), p.data(), p.size());
  return p;
}

SampleSet sample(const StateVector& psi, std::int64_t shots, Rng& rng) {
  if (shots < 1) throw std::invalid_argument("sample: shots must be >= 1");
  const auto probs = exact_probabilities(psi);
  std::vector<double> cdf(probs.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) cdf[i] = (acc += probs[i]);
  SampleSet out;
  out.shots = shots;
  for (std::int64_t s = 0; s < shots; ++s) {
    const double u = rng.uniform() * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    std::size_t idx = static_cast<std::size_t>(it - cdf.begin());
    if (idx >= cdf.size()) idx = cdf.size() - 1;
    // skip zero-probability states that share a cdf plateau
    while (probs[idx] == 0.0 && idx > 0) --idx;
    ++out.counts[idx];
  }
  return out;
}

}  // namespace qmeta
