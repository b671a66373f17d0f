#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "qmeta/hamiltonian.hpp"
#include "qmeta/rng.hpp"

namespace qmeta {

using cplx = std::complex<double>;

inline constexpr int kMaxQubits = 20;

/// QAOA angles for depth p. The flat layout is (gamma_1..gamma_p, beta_1..beta_p).
struct ParameterVector {
  std::vector<double> gamma;
  std::vector<double> beta;

  ParameterVector() = default;
  explicit ParameterVector(int depth) : gamma(depth, 0.0), beta(depth, 0.0) {}
  ParameterVector(std::vector<double> g, std::vector<double> b);

  int depth() const { return static_cast<int>(gamma.size()); }
  std::vector<double> flat() const;
  static ParameterVector from_flat(std::span<const double> theta);
};

class StateVector {
 public:
  StateVector(int num_qubits, std::vector<cplx> amplitudes);

  int num_qubits() const { return n_; }
  std::size_t dimension() const { return amps_.size(); }
  const std::vector<cplx>& amplitudes() const { return amps_; }
  std::vector<cplx>& amplitudes() { return amps_; }
  double norm_squared() const;

  static StateVector basis(int num_qubits, std::uint64_t index);

 private:
  int n_;
  std::vector<cplx> amps_;
};

StateVector prepare_plus_state(int n);

/// Cost layer exp(-i gamma H_C): elementwise phase over the stored diagonal.
void apply_cost_layer(StateVector& psi, const CostHamiltonian& h, double gamma);
/// Mixer layer exp(-i beta X) on every qubit.
void apply_mixer_layer(StateVector& psi, double beta);

/// prod_l [U_mixer(beta_l) U_cost(gamma_l)] |+>^n
StateVector run_qaoa(const CostHamiltonian& h, const ParameterVector& theta);

double expectation(const StateVector& psi, const CostHamiltonian& h);

struct EnergyGradient {
  double energy = 0.0;
  std::vector<double> grad;  // flat layout, matches ParameterVector::flat()
};

/// Energy and exact gradient from one forward pass and one adjoint sweep.
EnergyGradient energy_and_gradient(const CostHamiltonian& h, const ParameterVector& theta);

inline double qaoa_energy(const CostHamiltonian& h, const ParameterVector& theta) {
  return expectation(run_qaoa(h, theta), h);
}

struct SampleSet {
  std::map<std::uint64_t, std::int64_t> counts;  // basis index -> occurrences
  std::int64_t shots = 0;
};

std::vector<double> exact_probabilities(const StateVector& psi);
SampleSet sample(const StateVector& psi, std::int64_t shots, Rng& rng);

}  // namespace qmeta
