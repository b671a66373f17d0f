#include "qmeta/exp/diversity.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace qmeta::exp {

TrajectoryStats trajectory_diversity(const Trajectories& trajectories) {
  if (trajectories.size() < 2) throw std::invalid_argument("trajectory_diversity: need at least two trajectories");
  const std::size_t T = trajectories.front().size();
  if (T == 0) throw std::invalid_argument("trajectory_diversity: empty trajectories");
  const int p = trajectories.front().front().depth();
  for (const auto& tr : trajectories) {
    if (tr.size() != T) throw std::invalid_argument("trajectory_diversity: trajectories differ in length");
    for (const auto& th : tr)
      if (th.depth() != p || static_cast<int>(th.beta.size()) != p)
        throw std::invalid_argument("trajectory_diversity: trajectories differ in depth");
  }

  const double N = static_cast<double>(trajectories.size());
  const std::size_t dim = 2 * static_cast<std::size_t>(p);
  TrajectoryStats s;
  s.variance.assign(T, std::vector<double>(dim, 0.0));
  for (std::size_t t = 0; t < T; ++t) {
    std::vector<double> mean(dim, 0.0);
    for (const auto& tr : trajectories) {
      const auto x = tr[t].flat();
      for (std::size_t k = 0; k < dim; ++k) mean[k] += x[k];
    }
    for (double& m : mean) m /= N;
    for (const auto& tr : trajectories) {
      const auto x = tr[t].flat();
      for (std::size_t k = 0; k < dim; ++k) s.variance[t][k] += (x[k] - mean[k]) * (x[k] - mean[k]);
    }
    double g = 0, b = 0;
    for (std::size_t k = 0; k < dim; ++k) {
      s.variance[t][k] /= N;
      (k < static_cast<std::size_t>(p) ? g : b) += s.variance[t][k];
    }
    s.msd_gamma.push_back(g / p);
    s.msd_beta.push_back(b / p);
  }
  return s;
}

namespace {

std::ofstream open_csv(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_diversity_csv(const std::filesystem::path& path, const TrajectoryStats& s) {
  auto out = open_csv(path);
  out << "step,msd_gamma,msd_beta\n";
  for (std::size_t t = 0; t < s.msd_gamma.size(); ++t)
    out << t + 1 << ',' << num(s.msd_gamma[t]) << ',' << num(s.msd_beta[t]) << '\n';
}

void write_variance_csv(const std::filesystem::path& path, const TrajectoryStats& s) {
  auto out = open_csv(path);
  out << "step,angle,layer,variance\n";
  for (std::size_t t = 0; t < s.variance.size(); ++t) {
    const std::size_t p = s.variance[t].size() / 2;
    for (std::size_t k = 0; k < s.variance[t].size(); ++k)
      out << t + 1 << ',' << (k < p ? "gamma" : "beta") << ',' << k % p + 1 << ',' << num(s.variance[t][k]) << '\n';
  }
}

}  // namespace qmeta::exp
