#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qmeta/exp/config.hpp"
#include "qmeta/exp/diversity.hpp"
#include "qmeta/exp/metrics.hpp"
#include "qmeta/meta/train.hpp"

namespace qmeta::exp {

/// A model the requested cell needs was never trained or pre-trained.
struct MissingCheckpoint : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Where a run directory keeps its artifacts.
struct Layout {
  std::filesystem::path root;

  std::filesystem::path checkpoint(Method m, ProblemClass c, int p) const;
  std::filesystem::path gnn_checkpoint() const { return root / "checkpoints" / "unihetco"; }
  std::filesystem::path train_log(Method m, ProblemClass c, int p) const;
};

/// Seed for a named stream of one run; streams never depend on thread count.
std::uint64_t stream_seed(std::uint64_t master, const std::string& name);

/// Conditioning vector for one instance: empty (none), WL features, or the
/// UniHetCO embedding of the (class, graph) heterogeneous graph.
std::vector<double> instance_embedding(Backend b, ProblemClass c, const GraphInstance& g,
                                       const nn::ParameterStore* gnn);
std::size_t embedding_dim(Backend b);

std::vector<meta::TrainInstance> make_instances(Backend b, ProblemClass c, const std::vector<GraphInstance>& graphs,
                                                const nn::ParameterStore* gnn);

meta::MetaOptimizerModel fresh_model(const ExperimentConfig& cfg, Backend b, ProblemClass c, int p);
meta::TrainResult train_meta_model(const ExperimentConfig& cfg, Backend b, ProblemClass c, int p,
                                   const std::vector<meta::TrainInstance>& data);

/// Mean over instances; AR averages the instances where it is defined.
struct AggregateMetrics {
  double p_opt_hit = 0;
  std::optional<double> ar, fr;
  double steps = 0;
  int n_instances = 0;
};
AggregateMetrics aggregate(const std::vector<MetricsReport>& reports);

/// Shot-sampled (or exact, per config) metrics of a final state.
MetricsReport score_state(const ExperimentConfig& cfg, ProblemClass c, const GraphInstance& g, const StateVector& psi,
                          std::uint64_t sample_seed);

/// One (class, p, method) cell over the test graphs. `model` is required for
/// the meta methods and ignored for vanilla.
AggregateMetrics evaluate_cell(const ExperimentConfig& cfg, Method m, ProblemClass c, int p,
                               const std::vector<GraphInstance>& test, const meta::MetaOptimizerModel* model,
                               const nn::ParameterStore* gnn);

struct ResultRow {
  ProblemClass cls;
  int depth;
  Method method;
  AggregateMetrics metrics;
  std::uint64_t seed;
};
/// class,depth,method,p_opt_hit,ar,fr,steps,n_instances,seed. Rates in
/// percent with two decimals; missing values are left empty.
void write_results_csv(const std::filesystem::path& path, const std::vector<ResultRow>& rows);

struct TransferCell {
  ProblemClass source, target;
  int depth;
};
/// Every ordered pair of distinct classes at every depth, sources outermost.
std::vector<TransferCell> transfer_grid(const std::vector<ProblemClass>& classes, const std::vector<int>& depths);

struct TransferResult {
  TransferCell cell;
  Method method;
  AggregateMetrics metrics;
  double loss_before = 0, loss_after = 0;  // mean meta_loss before / after fine-tuning
  double improved = 0;                     // fraction of instances whose meta_loss decreased
  std::uint64_t seed;
};
/// Fine-tunes the source model on each target instance, then rolls out and
/// scores it. Throws when the model depth differs from the cell's.
TransferResult evaluate_transfer(const ExperimentConfig& cfg, Method m, const TransferCell& cell,
                                 const meta::MetaOptimizerModel& source_model, const std::vector<GraphInstance>& test,
                                 const nn::ParameterStore* gnn);
/// source,target,depth,method,p_opt_hit,ar,fr,steps,n_instances,loss_before,loss_after,improved,seed
void write_transfer_csv(const std::filesystem::path& path, const std::vector<TransferResult>& rows);

/// theta_1..theta_T of every test instance.
Trajectories collect_trajectories(const meta::MetaOptimizerModel& model, const std::vector<meta::TrainInstance>& data);

void write_training_log(const std::filesystem::path& path, const meta::TrainResult& res);

/// Loads `stem` or throws MissingCheckpoint naming the cell.
meta::MetaOptimizerModel load_meta_model(const Layout& layout, Method m, ProblemClass c, int p);
nn::ParameterStore load_gnn(const Layout& layout);

}  // namespace qmeta::exp
