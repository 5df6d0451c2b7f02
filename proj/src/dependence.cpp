#include "fnmcop/dependence.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <sstream>

#include "fnmcop/errors.hpp"
#include "fnmcop/fnm.hpp"

namespace fnmcop {

namespace {

struct Region {
  double cx, cy, hx, hy;  // center and half widths
  double value, error;
  int split_axis;
  std::size_t order;  // creation index; keeps the queue order deterministic
};

struct ByError {
  bool operator()(const Region& a, const Region& b) const {
    return a.error < b.error || (a.error == b.error && a.order > b.order);
  }
};

// Two-dimensional Genz-Malik degree-7 rule with an embedded degree-5 rule.
template <class F>
Region genz_malik(F& f, double cx, double cy, double hx, double hy, std::size_t order) {
  static const double l2 = std::sqrt(9.0 / 70.0), l3 = std::sqrt(9.0 / 10.0), l5 = std::sqrt(9.0 / 19.0);
  constexpr double w1 = -3816.0 / 19683.0, w2 = 980.0 / 6561.0, w3 = 1020.0 / 19683.0, w4 = 200.0 / 19683.0,
                   w5 = 6859.0 / 19683.0 / 4.0;
  constexpr double v1 = -971.0 / 729.0, v2 = 245.0 / 486.0, v3 = 65.0 / 1458.0, v4 = 25.0 / 729.0;

  const double f0 = f(cx, cy);
  const double a2x = f(cx - l2 * hx, cy) + f(cx + l2 * hx, cy);
  const double a2y = f(cx, cy - l2 * hy) + f(cx, cy + l2 * hy);
  const double a3x = f(cx - l3 * hx, cy) + f(cx + l3 * hx, cy);
  const double a3y = f(cx, cy - l3 * hy) + f(cx, cy + l3 * hy);
  const double s4 = f(cx - l3 * hx, cy - l3 * hy) + f(cx + l3 * hx, cy - l3 * hy) + f(cx - l3 * hx, cy + l3 * hy) +
                    f(cx + l3 * hx, cy + l3 * hy);
  const double s5 = f(cx - l5 * hx, cy - l5 * hy) + f(cx + l5 * hx, cy - l5 * hy) + f(cx - l5 * hx, cy + l5 * hy) +
                    f(cx + l5 * hx, cy + l5 * hy);
  const double vol = 4.0 * hx * hy;
  const double i7 = vol * (w1 * f0 + w2 * (a2x + a2y) + w3 * (a3x + a3y) + w4 * s4 + w5 * s5);
  const double i5 = vol * (v1 * f0 + v2 * (a2x + a2y) + v3 * (a3x + a3y) + v4 * s4);
  const double ratio = (l2 * l2) / (l3 * l3);
  const double dx = std::abs(a2x - 2.0 * f0 - ratio * (a3x - 2.0 * f0));
  const double dy = std::abs(a2y - 2.0 * f0 - ratio * (a3y - 2.0 * f0));
  return {cx, cy, hx, hy, i7, std::abs(i7 - i5), dx >= dy ? 0 : 1, order};
}

constexpr std::size_t kRulePoints = 17;

}  // namespace

TauEstimate kendall_tau_numeric(const Copula& cop, const CubatureOptions& options) {
  const double eps = options.boundary;
  if (!(eps > 0.0 && eps < 0.25)) throw DomainError("cubature boundary must lie in (0, 0.25)");
  const auto* fnm = dynamic_cast<const FnmCopula*>(&cop);
  std::size_t evaluations = 0;
  auto integrand = [&](double u1, double u2) {
    ++evaluations;
    double v;
    if (fnm) {
      const double q1 = fnm->uni_quantile(u1, 1), q2 = fnm->uni_quantile(u2, 2);
      v = fnm->biv_cdf(q1, q2) * std::exp(fnm->log_pdf_latent(q1, q2));
    } else {
      v = cop.cdf(u1, u2) * cop.pdf(u1, u2);
    }
    if (!std::isfinite(v)) {
      std::ostringstream msg;
      msg << cop.name() << ": C * c is not finite at (" << u1 << ", " << u2 << ")";
      throw NumericError(msg.str());
    }
    return v;
  };

  // Target accuracy on the integral is a quarter of the tau tolerance.
  const double tol = options.abs_tol / 4.0;
  std::size_t order = 0;
  std::priority_queue<Region, std::vector<Region>, ByError> queue;
  // Start from a 4 x 4 partition so that early error estimates are not fooled by symmetry.
  const double h = (1.0 - 2.0 * eps) / 8.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) queue.push(genz_malik(integrand, eps + (2 * i + 1) * h, eps + (2 * j + 1) * h, h, h, order++));

  double total = 0.0, error = 0.0;
  const auto totals = [&] {
    auto copy = queue;
    std::vector<Region> all;
    while (!copy.empty()) {
      all.push_back(copy.top());
      copy.pop();
    }
    // Fixed summation order (by creation index) so the result does not depend on heap layout.
    std::sort(all.begin(), all.end(), [](const Region& a, const Region& b) { return a.order < b.order; });
    total = error = 0.0;
    for (const auto& r : all) {
      total += r.value;
      error += r.error;
    }
  };
  totals();
  std::size_t since_refresh = 0;
  while (error > tol) {
    if (evaluations + 2 * kRulePoints > options.max_evaluations) {
      std::ostringstream msg;
      msg << "Kendall's tau cubature for " << cop.name() << " did not converge within " << options.max_evaluations
          << " evaluations; error estimate " << 4.0 * error;
      throw NumericError(msg.str());
    }
    const Region r = queue.top();
    queue.pop();
    Region a, b;
    if (r.split_axis == 0) {
      a = genz_malik(integrand, r.cx - r.hx / 2, r.cy, r.hx / 2, r.hy, order++);
      b = genz_malik(integrand, r.cx + r.hx / 2, r.cy, r.hx / 2, r.hy, order++);
    } else {
      a = genz_malik(integrand, r.cx, r.cy - r.hy / 2, r.hx, r.hy / 2, order++);
      b = genz_malik(integrand, r.cx, r.cy + r.hy / 2, r.hx, r.hy / 2, order++);
    }
    error += a.error + b.error - r.error;
    total += a.value + b.value - r.value;
    queue.push(a);
    queue.push(b);
    // Running sums drift; recompute exactly now and then and before stopping.
    if (++since_refresh == 256 || error <= tol) {
      totals();
      since_refresh = 0;
    }
  }
  // C * c <= c, and c puts mass eps on each excluded strip.
  const double excluded = 4.0 * eps;
  TauEstimate est;
  est.tau = std::clamp(-1.0 + 4.0 * total, -1.0, 1.0);
  est.abs_error_estimate = 4.0 * (error + excluded);
  est.evaluations = evaluations;
  return est;
}

namespace {

// Number of pairs tied within runs of equal values of a sorted sequence.
template <class Eq>
double tied_pairs(std::size_t n, Eq&& equal_prev) {
  double total = 0.0, run = 1.0;
  for (std::size_t i = 1; i <= n; ++i) {
    if (i < n && equal_prev(i)) {
      run += 1.0;
    } else {
      total += run * (run - 1.0) / 2.0;
      run = 1.0;
    }
  }
  return total;
}

// Merge sort of y counting exchanges (pairs out of order).
double sort_count_swaps(std::vector<double>& y, std::vector<double>& buf, std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0.0;
  const std::size_t mid = lo + (hi - lo) / 2;
  double swaps = sort_count_swaps(y, buf, lo, mid) + sort_count_swaps(y, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (y[j] < y[i]) {
      swaps += static_cast<double>(mid - i);
      buf[k++] = y[j++];
    } else {
      buf[k++] = y[i++];
    }
  }
  while (i < mid) buf[k++] = y[i++];
  while (j < hi) buf[k++] = y[j++];
  std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo), buf.begin() + static_cast<std::ptrdiff_t>(hi),
            y.begin() + static_cast<std::ptrdiff_t>(lo));
  return swaps;
}

}  // namespace

double kendall_tau_empirical(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (y.size() != n) throw InputError("Kendall's tau needs columns of equal length");
  if (n < 2) throw InputError("Kendall's tau needs at least two observations");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]); });
  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = x[idx[i]];
    ys[i] = y[idx[i]];
  }
  const double n1 = tied_pairs(n, [&](std::size_t i) { return xs[i] == xs[i - 1]; });
  const double n3 = tied_pairs(n, [&](std::size_t i) { return xs[i] == xs[i - 1] && ys[i] == ys[i - 1]; });
  std::vector<double> buf(n);
  const double swaps = sort_count_swaps(ys, buf, 0, n);
  const double n2 = tied_pairs(n, [&](std::size_t i) { return ys[i] == ys[i - 1]; });
  const double n0 = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  const double denom = std::sqrt((n0 - n1) * (n0 - n2));
  if (denom == 0.0) return 0.0;
  return (n0 - n1 - n2 + n3 - 2.0 * swaps) / denom;
}

double kendall_tau_empirical(const PseudoObservations& u) { return kendall_tau_empirical(u.u1, u.u2); }

std::vector<double> tail_probe(const Copula& cop, TailSide side, const std::vector<double>& levels) {
  std::vector<double> out;
  out.reserve(levels.size());
  for (double u : levels) {
    if (!(u > 0.0 && u <= 0.1)) throw DomainError("tail probe levels must lie in (0, 0.1]");
    if (side == TailSide::lower) {
      out.push_back(cop.cdf(u, u) / u);
    } else {
      const double v = 1.0 - u;
      out.push_back((2.0 * u - 1.0 + cop.cdf(v, v)) / u);
    }
  }
  return out;
}

}  // namespace fnmcop
