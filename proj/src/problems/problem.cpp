#include "qmeta/problem.hpp"

#include <bit>
#include <limits>
#include <stdexcept>

namespace qmeta {

std::string_view to_string(ProblemClass c) {
  switch (c) {
    case ProblemClass::MaxCut: return "maxcut";
    case ProblemClass::MIS: return "mis";
    case ProblemClass::MaxClique: return "maxclique";
    case ProblemClass::MVC: return "mvc";
  }
  return "?";
}

ProblemClass parse_problem_class(std::string_view s) {
  for (auto c : kAllClasses)
    if (to_string(c) == s) return c;
  throw std::invalid_argument("unknown problem class '" + std::string(s) + "'");
}

Bitstring bitstring_from_index(std::uint64_t index, int n) {
  Bitstring x(n);
  for (int i = 0; i < n; ++i) x[i] = (index >> i) & 1ULL;
  return x;
}

std::uint64_t index_from_bitstring(const Bitstring& x) {
  std::uint64_t idx = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i]) idx |= 1ULL << i;
  return idx;
}

std::string to_string(const Bitstring& x) {
  std::string s;
  for (auto b : x) s.push_back(b ? '1' : '0');
  return s;
}

Bitstring parse_bitstring(std::string_view s) {
  Bitstring x;
  for (char ch : s) {
    if (ch != '0' && ch != '1') throw std::invalid_argument("parse_bitstring: expected 0/1");
    x.push_back(ch == '1');
  }
  return x;
}

namespace {

void check_length(const GraphInstance& g, const Bitstring& x) {
  if (static_cast<int>(x.size()) != g.num_vertices())
    throw std::invalid_argument("bitstring length " + std::to_string(x.size()) + " does not match n=" +
                                std::to_string(g.num_vertices()));
}

// Bitmask forms; mask bit i = x_i.
double objective_mask(ProblemClass c, const GraphInstance& g, std::uint64_t mask) {
  if (c == ProblemClass::MaxCut) {
    int cut = 0;
    for (auto [u, v] : g.edges()) cut += ((mask >> u) ^ (mask >> v)) & 1ULL;
    return cut;
  }
  return std::popcount(mask);
}

bool feasible_mask(ProblemClass c, const GraphInstance& g, std::uint64_t mask) {
  switch (c) {
    case ProblemClass::MaxCut: return true;
    case ProblemClass::MIS:
      for (std::uint64_t m = mask; m; m &= m - 1)
        if (g.neighbor_mask(std::countr_zero(m)) & mask) return false;
      return true;
    case ProblemClass::MaxClique:
      for (std::uint64_t m = mask; m; m &= m - 1) {
        const int v = std::countr_zero(m);
        const std::uint64_t others = mask & ~(1ULL << v);
        if ((g.neighbor_mask(v) & others) != others) return false;
      }
      return true;
    case ProblemClass::MVC:
      for (auto [u, v] : g.edges())
        if (!(((mask >> u) | (mask >> v)) & 1ULL)) return false;
      return true;
  }
  return false;
}

}  // namespace

double objective_value(ProblemClass c, const GraphInstance& g, const Bitstring& x) {
  check_length(g, x);
  return objective_mask(c, g, index_from_bitstring(x));
}

bool is_feasible(ProblemClass c, const GraphInstance& g, const Bitstring& x) {
  check_length(g, x);
  return feasible_mask(c, g, index_from_bitstring(x));
}

ClassicalTable classical_table(ProblemClass c, const GraphInstance& g) {
  const int n = g.num_vertices();
  if (n > kMaxEnumerationQubits) throw std::invalid_argument("classical_table: n exceeds enumeration bound");
  const std::size_t dim = std::size_t{1} << n;
  ClassicalTable t{std::vector<double>(dim), std::vector<std::uint8_t>(dim)};
  for (std::uint64_t m = 0; m < dim; ++m) {
    t.objective[m] = objective_mask(c, g, m);
    t.feasible[m] = feasible_mask(c, g, m);
  }
  return t;
}

std::vector<Bitstring> OracleResult::optimizer_bitstrings(int n) const {
  std::vector<Bitstring> out;
  out.reserve(optimizers.size());
  for (auto idx : optimizers) out.push_back(bitstring_from_index(idx, n));
  return out;
}

OracleResult brute_force_optimum(ProblemClass c, const GraphInstance& g) {
  if (g.num_vertices() > kMaxEnumerationQubits)
    throw std::invalid_argument("brute_force_optimum: n=" + std::to_string(g.num_vertices()) + " exceeds bound " +
                                std::to_string(kMaxEnumerationQubits));
  const auto table = classical_table(c, g);
  const bool maximize = sense_of(c) == Sense::Maximize;
  OracleResult r;
  r.optimal_value = maximize ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
  for (std::uint64_t m = 0; m < table.objective.size(); ++m) {
    if (!table.feasible[m]) continue;
    ++r.feasible_count;
    const double v = table.objective[m];
    const bool better = maximize ? v > r.optimal_value : v < r.optimal_value;
    if (better) {
      r.optimal_value = v;
      r.optimizers.clear();
    }
    if (v == r.optimal_value) r.optimizers.push_back(m);
  }
  return r;
}

QpForm to_qp(ProblemClass c, const GraphInstance& g) {
  const int n = g.num_vertices();
  QpForm qp{Matrix(n, n), std::vector<double>(n, 0.0), Matrix(0, n), {}};
  std::vector<Edge> rows;
  double rhs = 1.0, coeff = 1.0;
  switch (c) {
    case ProblemClass::MaxCut:
      // -cut(x) = sum_E 2 x_u x_v - sum_u deg(u) x_u
      for (auto [u, v] : g.edges()) {
        qp.Q(u, v) = 1.0;
        qp.Q(v, u) = 1.0;
      }
      for (int u = 0; u < n; ++u) qp.c[u] = -g.degree(u);
      return qp;
    case ProblemClass::MIS:
      for (auto& ci : qp.c) ci = -1.0;
      rows = g.edges();
      break;
    case ProblemClass::MaxClique:
      for (auto& ci : qp.c) ci = -1.0;
      rows = complement(g).edges();
      break;
    case ProblemClass::MVC:
      // x_u + x_v >= 1 standardised to -x_u - x_v <= -1
      for (auto& ci : qp.c) ci = 1.0;
      rows = g.edges();
      rhs = -1.0;
      coeff = -1.0;
      break;
  }
  qp.A = Matrix(rows.size(), n);
  qp.b.assign(rows.size(), rhs);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    qp.A(r, rows[r].first) = coeff;
    qp.A(r, rows[r].second) = coeff;
  }
  return qp;
}

QuboForm qp_to_qubo(const QpForm& qp) {
  QuboForm q{qp.Q, qp.A, qp.b};
  for (int i = 0; i < qp.num_vars(); ++i) q.Qtilde(i, i) += qp.c[i];
  return q;
}

double qubo_value(const QuboForm& q, std::span<const double> x) {
  const std::size_t n = q.Qtilde.rows();
  if (x.size() != n) throw std::invalid_argument("qubo_value: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) s += x[i] * q.Qtilde(i, j) * x[j];
  return s;
}

}  // namespace qmeta
