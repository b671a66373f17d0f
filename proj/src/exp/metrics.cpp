#include "qmeta/exp/metrics.hpp"

#include <stdexcept>

namespace qmeta::exp {

namespace {

// Accumulates weighted outcomes; weights are shot counts or probabilities.
struct Tally {
  double total = 0, feasible = 0, optimal = 0, objective_feasible = 0, objective_all = 0;

  void add(ProblemClass c, const GraphInstance& g, std::uint64_t idx, double w, const OracleResult& oracle) {
    const auto x = bitstring_from_index(idx, g.num_vertices());
    const double value = objective_value(c, g, x);
    const bool ok = is_feasible(c, g, x);
    total += w;
    objective_all += w * value;
    if (!ok) return;
    feasible += w;
    objective_feasible += w * value;
    if (value == oracle.optimal_value) optimal += w;
  }

  MetricsReport report(ProblemClass c, double optimum) const {
    if (total <= 0) throw std::invalid_argument("metrics: empty sample");
    MetricsReport r;
    r.p_opt_hit = optimal / total;
    if (c == ProblemClass::MaxCut) {
      r.ar = objective_all / total / optimum;
      return r;
    }
    r.fr = feasible / total;
    if (feasible > 0) {
      const double ratio = objective_feasible / feasible / optimum;
      r.ar = c == ProblemClass::MVC ? ratio - 1.0 : ratio;
    }
    return r;
  }
};

}  // namespace

MetricsReport metrics_from_counts(ProblemClass c, const GraphInstance& g, const SampleSet& samples,
                                  const OracleResult& oracle) {
  Tally t;
  for (const auto& [idx, count] : samples.counts) t.add(c, g, idx, static_cast<double>(count), oracle);
  return t.report(c, oracle.optimal_value);
}

MetricsReport evaluate_metrics(ProblemClass c, const GraphInstance& g, const StateVector& psi, std::int64_t shots,
                               Rng& rng, const OracleResult& oracle) {
  return metrics_from_counts(c, g, sample(psi, shots, rng), oracle);
}

ExactMetrics exact_metrics(ProblemClass c, const GraphInstance& g, const std::vector<double>& probabilities,
                           const OracleResult& oracle) {
  if (probabilities.size() != (std::size_t{1} << g.num_vertices()))
    throw std::invalid_argument("exact_metrics: distribution size does not match the graph");
  Tally t;
  for (std::uint64_t idx = 0; idx < probabilities.size(); ++idx)
    if (probabilities[idx] > 0) t.add(c, g, idx, probabilities[idx], oracle);
  ExactMetrics out{t.report(c, oracle.optimal_value), std::nullopt};
  if (c == ProblemClass::MaxCut) {
    out.ar_literal = out.report.ar;
  } else {
    const double ratio = t.objective_feasible / t.total / oracle.optimal_value;
    out.ar_literal = c == ProblemClass::MVC ? ratio - 1.0 : ratio;
  }
  return out;
}

}  // namespace qmeta::exp
