#include "fnmcop/copula.hpp"

#include <cmath>
#include <random>

#include "fnmcop/errors.hpp"
#include "detail/root_finding.hpp"

namespace fnmcop {

double Copula::pdf(double u1, double u2) const { return std::exp(log_pdf(u1, u2)); }

double Copula::h_inverse(double q, double u1) const { return invert_conditional(*this, q, u1); }

std::vector<UniformPair> Copula::sample(std::size_t n, std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const auto draw = [&] {
    double u;
    do u = unif(rng); while (u <= 0.0);
    return u;
  };
  std::vector<UniformPair> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u1 = draw();
    const double q = draw();
    out.emplace_back(u1, h_inverse(q, u1));
  }
  return out;
}

double invert_conditional(const Copula& cop, double q, double u1, double tol) {
  if (!(q > 0.0 && q < 1.0 && u1 > 0.0 && u1 < 1.0))
    throw DomainError("conditional inverse: arguments must lie in (0, 1)");
  return detail::invert_increasing([&](double u) { return cop.h(u, u1); },
                                   [&](double u) { return cop.pdf(u1, u); }, q, tol, cop.name(), u1);
}

}  // namespace fnmcop
