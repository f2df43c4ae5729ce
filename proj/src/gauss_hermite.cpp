#include "gauss_hermite.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace hgsqz::detail {
namespace {

// Newton iteration on the orthonormal Hermite recurrence, with the usual
// asymptotic starting guesses for the largest roots.
GaussHermiteRule build_rule(int n) {
  constexpr double kEps = 1e-15;
  constexpr int kMaxIter = 100;
  const double pim4 = 1.0 / std::pow(std::numbers::pi, 0.25);

  GaussHermiteRule rule;
  rule.nodes.assign(n, 0.0);
  rule.log_weights.assign(n, 0.0);

  const int half = (n + 1) / 2;
  double z = 0.0;
  for (int i = 0; i < half; ++i) {
    if (i == 0) {
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
    } else if (i == 1) {
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * rule.nodes[0];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * rule.nodes[1];
    } else {
      z = 2.0 * z - rule.nodes[i - 2];
    }

    double pp = 0.0;
    int iter = 0;
    for (; iter < kMaxIter; ++iter) {
      double p1 = pim4;
      double p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= kEps * std::max(1.0, std::abs(z))) break;
    }
    if (iter == kMaxIter) {
      throw std::runtime_error("gauss_hermite: root iteration did not converge");
    }

    const double log_w = std::log(2.0) - 2.0 * std::log(std::abs(pp));
    rule.nodes[i] = z;
    rule.nodes[n - 1 - i] = -z;
    rule.log_weights[i] = log_w;
    rule.log_weights[n - 1 - i] = log_w;
  }
  if (n % 2 == 1) rule.nodes[half - 1] = 0.0;
  return rule;
}

}  // namespace

const GaussHermiteRule& gauss_hermite(int n) {
  if (n < 1 || n > kMaxQuadraturePoints) {
    throw std::out_of_range("gauss_hermite: unsupported number of points");
  }
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<GaussHermiteRule>> cache;

  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<GaussHermiteRule>(build_rule(n));
  return *slot;
}

}  // namespace hgsqz::detail
