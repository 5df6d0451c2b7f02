#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace fnmcop {

using UniformPair = std::pair<double, double>;

/// Common surface of every bivariate copula in the library.
///
/// pdf/log_pdf are defined on the open unit square, cdf on the closed one.
/// h(u2 | u1) is the conditional cdf dC(u1, u2)/du1 and h_inverse its inverse
/// in u2.
class Copula {
 public:
  virtual ~Copula() = default;

  virtual double log_pdf(double u1, double u2) const = 0;
  virtual double cdf(double u1, double u2) const = 0;
  virtual double h(double u2, double u1) const = 0;
  virtual double h_inverse(double q, double u1) const;
  virtual std::string name() const = 0;

  double pdf(double u1, double u2) const;

  /// n pairs by conditional inversion; deterministic given seed.
  virtual std::vector<UniformPair> sample(std::size_t n, std::uint64_t seed) const;
};

/// Numerical inverse of h(. | u1) by safeguarded Newton on u2 (derivative =
/// pdf). Throws NumericError if |h - q| cannot be brought below tol.
double invert_conditional(const Copula& cop, double q, double u1, double tol = 1e-12);

}  // namespace fnmcop
