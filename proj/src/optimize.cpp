#include "fnmcop/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fnmcop/errors.hpp"

namespace fnmcop {

namespace {
double safe(const Objective& f, const Eigen::VectorXd& x) {
  const double v = f(x);
  return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}
}  // namespace

Eigen::VectorXd numeric_gradient(const Objective& f, const Eigen::VectorXd& x, double step) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd y = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = step * std::max(1.0, std::abs(x[i]));
    y[i] = x[i] + h;
    const double fp = f(y);
    y[i] = x[i] - h;
    const double fm = f(y);
    y[i] = x[i];
    if (std::isfinite(fp) && std::isfinite(fm)) {
      g[i] = (fp - fm) / (2.0 * h);
    } else {
      // One side left the domain of the objective; fall back to a one-sided difference.
      const double f0 = f(x);
      g[i] = std::isfinite(fp) ? (fp - f0) / h : std::isfinite(fm) ? (f0 - fm) / h : fp - fm;
    }
  }
  return g;
}

Eigen::MatrixXd numeric_hessian(const Objective& f, const Eigen::VectorXd& x, double step) {
  const Eigen::Index n = x.size();
  Eigen::MatrixXd H(n, n);
  Eigen::VectorXd h(n);
  for (Eigen::Index i = 0; i < n; ++i) h[i] = step * std::max(1.0, std::abs(x[i]));
  const double f0 = f(x);
  Eigen::VectorXd y = x;
  for (Eigen::Index i = 0; i < n; ++i) {
    y[i] = x[i] + h[i];
    const double fp = f(y);
    y[i] = x[i] - h[i];
    const double fm = f(y);
    y[i] = x[i];
    H(i, i) = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
    for (Eigen::Index j = 0; j < i; ++j) {
      double acc = 0.0;
      for (int si : {1, -1}) {
        for (int sj : {1, -1}) {
          y[i] = x[i] + si * h[i];
          y[j] = x[j] + sj * h[j];
          acc += si * sj * f(y);
        }
      }
      y[i] = x[i];
      y[j] = x[j];
      H(i, j) = H(j, i) = acc / (4.0 * h[i] * h[j]);
    }
  }
  return H;
}

OptimResult bfgs_minimize(const Objective& f, const Eigen::VectorXd& x0, const OptimOptions& opt) {
  const Eigen::Index n = x0.size();
  OptimResult res;
  res.x = x0;
  res.value = safe(f, x0);
  if (!std::isfinite(res.value)) throw OptimizationError("objective is not finite at the starting point");
  const auto grad = [&](const Eigen::VectorXd& x) { return numeric_gradient(f, x, opt.fd_step); };
  Eigen::VectorXd g = grad(res.x);
  Eigen::MatrixXd Hinv = Eigen::MatrixXd::Identity(n, n);
  bool scaled = false;
  int flat_steps = 0;
  res.message = "maximum iterations reached";
  for (int it = 0; it < opt.max_iter; ++it) {
    res.iterations = it;
    if (!g.allFinite()) {
      res.message = "non-finite gradient";
      break;
    }
    if (g.norm() < opt.gtol) {
      res.converged = true;
      res.message = "gradient norm below tolerance";
      break;
    }
    Eigen::VectorXd p = -Hinv * g;
    double slope = g.dot(p);
    if (!(slope < 0.0)) {
      Hinv.setIdentity();
      p = -g;
      slope = g.dot(p);
    }
    const double len = p.norm();
    if (len > opt.max_step) {
      p *= opt.max_step / len;
      slope *= opt.max_step / len;
    }
    double t = 1.0, fnew = 0.0;
    Eigen::VectorXd xnew;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      xnew = res.x + t * p;
      fnew = safe(f, xnew);
      if (fnew <= res.value + 1e-4 * t * slope) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      if (Hinv.isIdentity()) {
        res.message = "line search failed";
        break;
      }
      Hinv.setIdentity();
      continue;
    }
    const Eigen::VectorXd gnew = grad(xnew);
    const Eigen::VectorXd s = xnew - res.x;
    const Eigen::VectorXd y = gnew - g;
    const double fold = res.value;
    res.x = xnew;
    res.value = fnew;
    g = gnew;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (!scaled) {
        Hinv *= sy / y.dot(y);
        scaled = true;
      }
      const double r = 1.0 / sy;
      const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
      Hinv = (I - r * s * y.transpose()) * Hinv * (I - r * y * s.transpose()) + r * s * s.transpose();
    }
    flat_steps = std::abs(fold - fnew) <= opt.ftol * (std::abs(fold) + opt.ftol) ? flat_steps + 1 : 0;
    if (flat_steps >= 3) {
      res.iterations = it + 1;
      res.converged = g.norm() < opt.gtol;
      res.message = "relative objective change below tolerance";
      break;
    }
    res.iterations = it + 1;
  }
  res.gradient = g;
  res.gradient_norm = g.norm();
  if (res.gradient_norm < opt.gtol) res.converged = true;
  return res;
}

}  // namespace fnmcop
