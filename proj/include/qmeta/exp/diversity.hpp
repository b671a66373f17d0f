#pragma once

#include <filesystem>
#include <vector>

#include "qmeta/qaoa.hpp"

namespace qmeta::exp {

/// trajectories[i][t] is instance i's angles at step t+1.
using Trajectories = std::vector<std::vector<ParameterVector>>;

struct TrajectoryStats {
  std::vector<double> msd_gamma;  // per step
  std::vector<double> msd_beta;
  // variance[t][k]: population variance over instances of flat coordinate k
  // (gamma_1..gamma_p, beta_1..beta_p) at step t.
  std::vector<std::vector<double>> variance;
};

/// Mean squared deviation from the instance-mean trajectory, averaged over
/// the gamma (resp. beta) coordinates. Needs at least two trajectories of
/// equal length and depth.
TrajectoryStats trajectory_diversity(const Trajectories& trajectories);

/// step,msd_gamma,msd_beta
void write_diversity_csv(const std::filesystem::path& path, const TrajectoryStats& s);
/// step,angle,layer,variance (long format, one row per coordinate)
void write_variance_csv(const std::filesystem::path& path, const TrajectoryStats& s);

}  // namespace qmeta::exp
