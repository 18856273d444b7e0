#include "catmouse/catmouse.hpp"

namespace catmouse {

FiniteChain cm_kernel(const FiniteChain& base, std::size_t cap) {
  const std::size_t n = base.size();
  if (n > cap)
    throw ChainError("cm_kernel: base has " + std::to_string(n) + " states, above the product cap " +
                     std::to_string(cap) + "; use Monte Carlo simulation instead");
  const auto m = static_cast<Eigen::Index>(n * n);
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(m, m);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = 0; y < n; ++y) {
      const auto row = static_cast<Eigen::Index>(pair_index(x, y, n));
      if (x != y) {
        for (std::size_t z = 0; z < n; ++z)
          Q(row, static_cast<Eigen::Index>(pair_index(z, y, n))) = base.p(x, z);
      } else {
        for (std::size_t z = 0; z < n; ++z)
          for (std::size_t w = 0; w < n; ++w)
            Q(row, static_cast<Eigen::Index>(pair_index(z, w, n))) = base.p(y, z) * base.p(y, w);
      }
    }
  }
  for (Eigen::Index r = 0; r < m; ++r) Q.row(r) /= Q.row(r).sum();
  std::vector<std::string> labels;
  labels.reserve(n * n);
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = 0; y < n; ++y) labels.push_back("(" + base.label(x) + "," + base.label(y) + ")");
  return FiniteChain(std::move(Q), ChainOptions{.allow_loops = true, .allow_periodic = true}, std::move(labels));
}

}  // namespace catmouse
