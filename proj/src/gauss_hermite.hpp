#pragma once

#include <vector>

namespace hgsqz::detail {

// Gauss-Hermite rule for weight exp(-s^2). Weights are stored as logarithms
// so that rules with a few hundred points stay representable.
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> log_weights;
};

inline constexpr int kMaxQuadraturePoints = 512;

// Cached, thread-safe. n in [1, kMaxQuadraturePoints].
const GaussHermiteRule& gauss_hermite(int n);

}  // namespace hgsqz::detail
