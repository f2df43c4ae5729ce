#pragma once

#include <cmath>
#include <utility>

namespace hgsqz {

struct LineMinimum {
  double x = 0.0;
  double value = 0.0;
};

// Golden-section search for a minimum of a unimodal f on [lo, hi]. Stops once
// the bracket is narrower than tol (absolute) or after max_iter shrinks.
template <typename F>
LineMinimum golden_section_minimize(F&& f, double lo, double hi, double tol = 1e-12, int max_iter = 200) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  if (hi < lo) std::swap(lo, hi);
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = f(c);
  double fd = f(d);
  for (int i = 0; i < max_iter && (hi - lo) > tol; ++i) {
    if (fc <= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = f(d);
    }
  }
  return fc <= fd ? LineMinimum{c, fc} : LineMinimum{d, fd};
}

}  // namespace hgsqz
