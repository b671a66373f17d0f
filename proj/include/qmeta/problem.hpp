#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "qmeta/graph.hpp"
#include "qmeta/matrix.hpp"

namespace qmeta {

enum class ProblemClass { MaxCut, MIS, MaxClique, MVC };
enum class Sense { Maximize, Minimize };

inline constexpr std::array<ProblemClass, 4> kAllClasses = {ProblemClass::MaxCut, ProblemClass::MIS,
                                                            ProblemClass::MaxClique, ProblemClass::MVC};

constexpr Sense sense_of(ProblemClass c) { return c == ProblemClass::MVC ? Sense::Minimize : Sense::Maximize; }
constexpr bool is_constrained(ProblemClass c) { return c != ProblemClass::MaxCut; }

/// Lower-case tag: "maxcut", "mis", "maxclique", "mvc".
std::string_view to_string(ProblemClass c);
ProblemClass parse_problem_class(std::string_view s);

/// x[i] is the selection bit of vertex i. In statevector indexing vertex i
/// is qubit i, the i-th least significant bit of the basis index.
using Bitstring = std::vector<std::uint8_t>;

Bitstring bitstring_from_index(std::uint64_t index, int n);
std::uint64_t index_from_bitstring(const Bitstring& x);
/// "x_0 x_1 ... x_{n-1}" as characters, e.g. "10" selects vertex 0 only.
std::string to_string(const Bitstring& x);
Bitstring parse_bitstring(std::string_view s);

double objective_value(ProblemClass c, const GraphInstance& g, const Bitstring& x);
bool is_feasible(ProblemClass c, const GraphInstance& g, const Bitstring& x);

/// Objective and feasibility of every basis state (n <= 20).
struct ClassicalTable {
  std::vector<double> objective;
  std::vector<std::uint8_t> feasible;
};
ClassicalTable classical_table(ProblemClass c, const GraphInstance& g);

struct OracleResult {
  double optimal_value = 0.0;
  std::vector<std::uint64_t> optimizers;  // basis indices, ascending
  std::size_t feasible_count = 0;

  std::vector<Bitstring> optimizer_bitstrings(int n) const;
};

inline constexpr int kMaxEnumerationQubits = 20;

OracleResult brute_force_optimum(ProblemClass c, const GraphInstance& g);

/// min x'Qx + c'x  s.t.  Ax <= b. Q has a zero diagonal; on binary x this is
/// the same value as the QUBO form x'Q~x with Q~ = Q + diag(c).
struct QpForm {
  Matrix Q;
  std::vector<double> c;
  Matrix A;  // m x n, m may be 0
  std::vector<double> b;

  int num_vars() const { return static_cast<int>(c.size()); }
  int num_constraints() const { return static_cast<int>(b.size()); }
};

struct QuboForm {
  Matrix Qtilde;
  Matrix A;
  std::vector<double> b;

  int num_vars() const { return static_cast<int>(Qtilde.rows()); }
  int num_constraints() const { return static_cast<int>(b.size()); }
};

QpForm to_qp(ProblemClass c, const GraphInstance& g);
QuboForm qp_to_qubo(const QpForm& qp);
inline QuboForm to_qubo(ProblemClass c, const GraphInstance& g) { return qp_to_qubo(to_qp(c, g)); }

/// x'Q~x for a binary or relaxed x.
double qubo_value(const QuboForm& q, std::span<const double> x);

}  // namespace qmeta
