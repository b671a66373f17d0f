#pragma once

#include <optional>
#include <vector>

#include "qmeta/qaoa.hpp"

namespace qmeta::exp {

/// All rates are fractions. For MVC `ar` holds AR - 1 (relative gap above
/// the optimum). MaxCut has no feasibility rate and its AR uses every shot;
/// for the constrained classes AR is the mean objective over feasible shots
/// divided by C*, and is absent when no shot is feasible.
struct MetricsReport {
  double p_opt_hit = 0;
  std::optional<double> ar;
  std::optional<double> fr;
  double steps = 0;
};

MetricsReport metrics_from_counts(ProblemClass c, const GraphInstance& g, const SampleSet& samples,
                                  const OracleResult& oracle);

/// Samples `shots` bitstrings from psi and scores them.
MetricsReport evaluate_metrics(ProblemClass c, const GraphInstance& g, const StateVector& psi, std::int64_t shots,
                               Rng& rng, const OracleResult& oracle);

/// Shots -> infinity: the same definitions applied to the full distribution.
/// `ar_literal` is the feasible-weighted objective without renormalizing by
/// the feasible mass (the report's `ar` is the renormalized reading).
struct ExactMetrics {
  MetricsReport report;
  std::optional<double> ar_literal;
};
ExactMetrics exact_metrics(ProblemClass c, const GraphInstance& g, const std::vector<double>& probabilities,
                           const OracleResult& oracle);

}  // namespace qmeta::exp
