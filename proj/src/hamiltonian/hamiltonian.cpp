#include "qmeta/hamiltonian.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>

namespace qmeta {

std::vector<PauliTerm> simplify_terms(const std::vector<PauliTerm>& terms) {
  std::map<std::vector<int>, double> merged;
  for (const auto& t : terms) {
    auto support = t.support;
    std::sort(support.begin(), support.end());
    // Z_i Z_i = I: cancel repeated indices in pairs.
    std::vector<int> reduced;
    for (std::size_t i = 0; i < support.size();) {
      std::size_t j = i;
      while (j < support.size() && support[j] == support[i]) ++j;
      if ((j - i) % 2 == 1) reduced.push_back(support[i]);
      i = j;
    }
    merged[reduced] += t.coefficient;
  }
  std::vector<PauliTerm> out;
  for (auto& [support, coeff] : merged)
    if (coeff != 0.0) out.push_back({coeff, support});
  std::stable_sort(out.begin(), out.end(),
                   [](const PauliTerm& a, const PauliTerm& b) { return a.support.size() < b.support.size(); });
  return out;
}

double evaluate_terms(const std::vector<PauliTerm>& terms, std::uint64_t basis_index) {
  double v = 0.0;
  for (const auto& t : terms) {
    int parity = 0;
    for (int q : t.support) parity ^= static_cast<int>((basis_index >> q) & 1ULL);
    v += parity ? -t.coefficient : t.coefficient;
  }
  return v;
}

CostHamiltonian::CostHamiltonian(int num_qubits, std::vector<PauliTerm> terms)
    : n_(num_qubits), terms_(simplify_terms(terms)) {
  if (n_ < 1 || n_ > kMaxEnumerationQubits) throw std::invalid_argument("CostHamiltonian: qubit count out of range");
  for (const auto& t : terms_)
    for (int q : t.support)
      if (q < 0 || q >= n_) throw std::invalid_argument("CostHamiltonian: term acts outside the register");

  const std::size_t dim = std::size_t{1} << n_;
  diagonal_.assign(dim, 0.0);
  // Term-major accumulation: each term flips sign on the parity of its mask.
  for (const auto& t : terms_) {
    std::uint64_t mask = 0;
    for (int q : t.support) mask |= 1ULL << q;
    for (std::uint64_t idx = 0; idx < dim; ++idx)
      diagonal_[idx] += (std::popcount(idx & mask) & 1) ? -t.coefficient : t.coefficient;
    l1_norm_ += std::abs(t.coefficient);
  }
  auto [lo, hi] = std::minmax_element(diagonal_.begin(), diagonal_.end());
  min_ = *lo;
  max_ = *hi;

  levels_ = diagonal_;
  std::sort(levels_.begin(), levels_.end());
  levels_.erase(std::unique(levels_.begin(), levels_.end()), levels_.end());
  level_index_.resize(dim);
  for (std::size_t idx = 0; idx < dim; ++idx)
    level_index_[idx] = static_cast<std::uint32_t>(
        std::lower_bound(levels_.begin(), levels_.end(), diagonal_[idx]) - levels_.begin());
}

namespace {

std::vector<PauliTerm> penalty_form(const std::vector<Edge>& edges, int n, double edge_sign, double vertex_coeff) {
  std::vector<PauliTerm> terms;
  for (auto [u, v] : edges) {
    terms.push_back({3.0, {u, v}});
    terms.push_back({3.0 * edge_sign, {u}});
    terms.push_back({3.0 * edge_sign, {v}});
  }
  for (int i = 0; i < n; ++i) terms.push_back({vertex_coeff, {i}});
  return terms;
}

}  // namespace

CostHamiltonian build_cost_hamiltonian(ProblemClass c, const GraphInstance& g) {
  const int n = g.num_vertices();
  std::vector<PauliTerm> terms;
  switch (c) {
    case ProblemClass::MaxCut:
      for (auto [u, v] : g.edges()) {
        terms.push_back({0.5, {u, v}});
        terms.push_back({-0.5, {}});
      }
      break;
    case ProblemClass::MIS: terms = penalty_form(g.edges(), n, -1.0, 1.0); break;
    case ProblemClass::MaxClique: terms = penalty_form(complement(g).edges(), n, -1.0, 1.0); break;
    case ProblemClass::MVC: terms = penalty_form(g.edges(), n, 1.0, -1.0); break;
  }
  return CostHamiltonian(n, std::move(terms));
}

double pauli_l1_norm(const CostHamiltonian& h) { return h.l1_norm(); }

double normalized_energy(double energy, const CostHamiltonian& h) {
  if (h.l1_norm() == 0.0) throw std::domain_error("normalized_energy: Hamiltonian has zero Pauli norm");
  return energy / h.l1_norm();
}

bool hamiltonian_objective_identity_check(ProblemClass c, const GraphInstance& g) {
  const int n = g.num_vertices();
  const auto h = build_cost_hamiltonian(c, g);
  const std::vector<Edge> pen_edges = c == ProblemClass::MaxClique ? complement(g).edges() : g.edges();
  const double m = static_cast<double>(pen_edges.size());
  for (std::uint64_t idx = 0; idx < h.dimension(); ++idx) {
    const double ones = std::popcount(idx);
    double expected = 0.0;
    switch (c) {
      case ProblemClass::MaxCut: {
        int cut = 0;
        for (auto [u, v] : g.edges()) cut += ((idx >> u) ^ (idx >> v)) & 1ULL;
        expected = -cut;
        break;
      }
      case ProblemClass::MIS:
      case ProblemClass::MaxClique: {
        int both = 0;
        for (auto [u, v] : pen_edges) both += (idx >> u) & (idx >> v) & 1ULL;
        expected = n - 3.0 * m - 2.0 * ones + 12.0 * both;
        break;
      }
      case ProblemClass::MVC: {
        int uncovered = 0;
        for (auto [u, v] : pen_edges) uncovered += !(((idx >> u) | (idx >> v)) & 1ULL);
        expected = -n - 3.0 * m + 2.0 * ones + 12.0 * uncovered;
        break;
      }
    }
    if (h.diagonal()[idx] != expected) return false;
  }
  return true;
}

void write_diagonal_csv(const CostHamiltonian& h, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  f << "bitstring,value\n";
  for (std::uint64_t idx = 0; idx < h.dimension(); ++idx)
    f << to_string(bitstring_from_index(idx, h.num_qubits())) << ',' << h.diagonal()[idx] << '\n';
}

}  // namespace qmeta
