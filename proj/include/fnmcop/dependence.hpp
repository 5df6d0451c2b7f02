#pragma once

#include <cstddef>
#include <vector>

#include "fnmcop/copula.hpp"
#include "fnmcop/estimation.hpp"

namespace fnmcop {

struct TauEstimate {
  double tau = 0.0;
  double abs_error_estimate = 0.0;
  std::size_t evaluations = 0;
};

struct CubatureOptions {
  double abs_tol = 1e-5;  // on tau
  double boundary = 1e-8;
  std::size_t max_evaluations = 1'000'000;
};

/// Kendall's tau as -1 + 4 * integral of C dC, by adaptive Genz-Malik
/// cubature over [eps, 1 - eps]^2. Throws NumericError with the achieved
/// error estimate when the evaluation budget runs out.
TauEstimate kendall_tau_numeric(const Copula& cop, const CubatureOptions& options = {});

/// Sample Kendall's tau-b in O(n log n).
double kendall_tau_empirical(const std::vector<double>& x, const std::vector<double>& y);
double kendall_tau_empirical(const PseudoObservations& u);

enum class TailSide { lower, upper };

/// C(u, u) / u (lower) or P(U1 > 1 - u, U2 > 1 - u) / u (upper) for each level in (0, 0.1].
std::vector<double> tail_probe(const Copula& cop, TailSide side, const std::vector<double>& levels);

}  // namespace fnmcop
