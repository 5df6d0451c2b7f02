#pragma once

#include <cstddef>
#include <vector>

namespace fnmcop {

/// Gauss-Legendre nodes and weights on (0, 1). Weights sum to one.
struct QuadratureRule {
  std::vector<double> nodes;    // strictly increasing
  std::vector<double> weights;  // positive

  std::size_t size() const noexcept { return nodes.size(); }
};

/// n-point Gauss-Legendre rule on [-1, 1] (weights sum to 2).
QuadratureRule legendre_rule(std::size_t n);

/// n-point Gauss-Legendre rule mapped to (0, 1). Requires n >= 2.
QuadratureRule gl_rule(std::size_t n);

}  // namespace fnmcop
