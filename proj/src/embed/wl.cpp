#include "qmeta/embed/wl.hpp"

#include <cmath>
#include <stdexcept>

namespace qmeta::embed {

std::vector<double> wl_embed(const GraphInstance& g, int dim, int iterations) {
  if (dim <= 0 || iterations < 0) throw std::invalid_argument("wl_embed: bad dimension or iteration count");
  std::vector<double> v(dim, 0.0);
  for (int it = 0; it <= iterations; ++it)
    for (std::uint64_t color : wl_colors(g, it))
      v[mix64(color ^ mix64(static_cast<std::uint64_t>(it))) % static_cast<std::uint64_t>(dim)] += 1.0;
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

}  // namespace qmeta::embed
