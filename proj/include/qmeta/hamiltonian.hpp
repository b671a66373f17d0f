#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "qmeta/graph.hpp"
#include "qmeta/problem.hpp"

namespace qmeta {

/// coefficient * prod_{i in support} Z_i; an empty support is the identity.
struct PauliTerm {
  double coefficient = 0.0;
  std::vector<int> support;  // ascending qubit indices

  bool operator==(const PauliTerm&) const = default;
};

/// Diagonal Z-polynomial cost Hamiltonian with its dense diagonal.
///
/// diagonal()[idx] is H_C evaluated on the basis state whose bit i (LSB = 0)
/// is x_i, using Z_i -> 1 - 2 x_i.
class CostHamiltonian {
 public:
  CostHamiltonian(int num_qubits, std::vector<PauliTerm> terms);

  int num_qubits() const { return n_; }
  std::size_t dimension() const { return diagonal_.size(); }
  const std::vector<PauliTerm>& terms() const { return terms_; }
  const std::vector<double>& diagonal() const { return diagonal_; }
  double l1_norm() const { return l1_norm_; }
  double min_value() const { return min_; }
  double max_value() const { return max_; }

  /// Distinct diagonal values (ascending) and, per basis state, the index of
  /// its value in that list. Lets the cost layer evaluate one phase per level.
  const std::vector<double>& levels() const { return levels_; }
  const std::vector<std::uint32_t>& level_index() const { return level_index_; }

 private:
  int n_;
  std::vector<PauliTerm> terms_;
  std::vector<double> diagonal_;
  std::vector<double> levels_;
  std::vector<std::uint32_t> level_index_;
  double l1_norm_ = 0.0;
  double min_ = 0.0;
  double max_ = 0.0;
};

/// Merges like terms (by support) and drops zero coefficients. Output sorted
/// by (support size, support).
std::vector<PauliTerm> simplify_terms(const std::vector<PauliTerm>& terms);

/// MaxCut:    1/2 sum_E (Z_u Z_v - I)
/// MIS:       3 sum_E (Z_u Z_v - Z_u - Z_v) + sum_V Z_i
/// MaxClique: the MIS form over the complement edges
/// MVC:       3 sum_E (Z_u Z_v + Z_u + Z_v) - sum_V Z_i
CostHamiltonian build_cost_hamiltonian(ProblemClass c, const GraphInstance& g);

/// Sum of |coefficient| including the identity term.
double pauli_l1_norm(const CostHamiltonian& h);

/// E / ||alpha||_1. Throws when the norm is zero.
double normalized_energy(double energy, const CostHamiltonian& h);

/// Value of sum_j alpha_j prod (1 - 2 x_i) computed directly from the terms.
double evaluate_terms(const std::vector<PauliTerm>& terms, std::uint64_t basis_index);

/// Checks, for all 2^n bitstrings, the exact affine identities linking the
/// diagonal to the classical objective and penalty counts:
///   MaxCut     H(x) = -cut(x)
///   MIS        H(x) = n - 3|E| - 2|x| + 12 * #{edges with both ends selected}
///   MaxClique  as MIS over the complement
///   MVC        H(x) = -n - 3|E| + 2|x| + 12 * #{uncovered edges}
bool hamiltonian_objective_identity_check(ProblemClass c, const GraphInstance& g);

/// Writes "bitstring,value" rows (bitstring in vertex order x_0..x_{n-1}).
void write_diagonal_csv(const CostHamiltonian& h, const std::filesystem::path& path);

}  // namespace qmeta
