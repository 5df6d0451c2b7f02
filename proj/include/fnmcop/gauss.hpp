#pragma once

// Scalar normal and Student-t primitives. All functions are pure and
// thread-safe.

namespace fnmcop {

/// Correlation coefficient strictly inside (-1, 1).
class Correlation {
 public:
  explicit Correlation(double value);
  double value() const noexcept { return value_; }

 private:
  double value_;
};

/// Degrees of freedom of a Student-t distribution, nu > 0.
class DegreesOfFreedom {
 public:
  explicit DegreesOfFreedom(double nu);
  double value() const noexcept { return nu_; }

 private:
  double nu_;
};

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSqrt2 = 1.41421356237309504880;
inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;

double norm_pdf(double z);
double norm_log_pdf(double z);
/// P(Z <= z). Saturates to 0/1 beyond the double range; stays positive for z >= -37.5.
double norm_cdf(double z);
/// log P(Z <= z), accurate deep into the lower tail.
double norm_log_cdf(double z);
/// Inverse of norm_cdf; throws DomainError unless 0 < p < 1.
double norm_quantile(double p);
/// Inverse of the upper tail: z with P(Z > z) = q.
double norm_quantile_upper(double q);

/// Standard bivariate normal density with correlation rho.
double bvn_pdf(double z1, double z2, Correlation rho);
double bvn_log_pdf(double z1, double z2, Correlation rho);
/// P(Z1 <= z1, Z2 <= z2) under correlation rho (Drezner-Wesolowsky/Genz).
double bvn_cdf(double z1, double z2, Correlation rho);

double t_pdf(double x, DegreesOfFreedom nu);
double t_log_pdf(double x, DegreesOfFreedom nu);
double t_cdf(double x, DegreesOfFreedom nu);
/// Throws DomainError unless 0 < p < 1.
double t_quantile(double p, DegreesOfFreedom nu);

/// P(T1 <= x, T2 <= y) for the standard bivariate t with integer nu, by
/// Dunnett's finite series (Genz's bvtl). Throws DomainError for non-integer nu.
double bvt_cdf_integer(double x, double y, Correlation rho, int nu);

}  // namespace fnmcop
