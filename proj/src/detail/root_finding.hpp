#pragma once

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "fnmcop/errors.hpp"

namespace fnmcop::detail {

inline double logit_clamped(double u) {
  if (u <= 0.0) return -745.0;
  if (u >= 1.0) return 37.0;
  return std::log(u) - std::log1p(-u);
}

// Solves h(u2) = q on (0, 1) for an increasing conditional cdf h with
// derivative dens. Newton steps are kept inside the current bracket; when a
// step leaves it, the bracket is bisected on the logit scale so that roots
// near 0 or 1 are reached in a bounded number of steps.
template <class H, class D>
double invert_increasing(H&& h, D&& dens, double q, double tol, const std::string& what,
                         double u1) {
  double lo = 0.0, hi = 1.0;
  double u = q;
  double best_u = u, best_gap = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < 400; ++iter) {
    const double g = h(u) - q;
    if (std::abs(g) < best_gap) {
      best_gap = std::abs(g);
      best_u = u;
    }
    if (std::abs(g) <= 0.01 * tol) return u;
    if (g < 0.0) lo = u; else hi = u;
    // Bracket down to a few ulps: the best representable answer.
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) return best_u;
    double next = std::numeric_limits<double>::quiet_NaN();
    const double d = dens(u);
    if (std::isfinite(d) && d > 0.0) next = u - g / d;
    if (!(next > lo && next < hi)) {
      const double t = 0.5 * (logit_clamped(lo) + logit_clamped(hi));
      next = 1.0 / (1.0 + std::exp(-t));
    }
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    u = next;
  }
  if (best_gap <= tol) return best_u;
  std::ostringstream msg;
  msg << what << ": conditional inverse did not converge at q=" << q << ", u1=" << u1
      << " (residual " << best_gap << ")";
  throw NumericError(msg.str());
}

}  // namespace fnmcop::detail
