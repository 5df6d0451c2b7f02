#pragma once

#include <cstdint>
#include <vector>

#include "fnmcop/copula.hpp"

namespace fnmcop {

/// Reduced parameter vector of the identifiable K-component finite normal
/// mixture copula: K-1 mixing weights, K-1 second-coordinate means and K
/// component correlations. The last weight is implied.
class FnmParams {
 public:
  /// Validates and throws DomainError on any violation.
  FnmParams(int K, std::vector<double> pi, std::vector<double> theta, std::vector<double> rho);

  /// pi_k = 1/K, theta_k = 0, rho_k = 0; has copula density identically one.
  static FnmParams independence(int K);
  /// Unpacks the natural-coordinate vector (pi..., theta..., rho...).
  static FnmParams from_vector(int K, const std::vector<double>& natural);

  int K() const noexcept { return K_; }
  const std::vector<double>& pi() const noexcept { return pi_; }
  const std::vector<double>& theta() const noexcept { return theta_; }
  const std::vector<double>& rho() const noexcept { return rho_; }
  /// All K weights, including the implied last one.
  std::vector<double> weights() const;
  std::vector<double> to_vector() const;
  /// 3K - 2.
  int free_parameter_count() const noexcept { return 3 * K_ - 2; }

  friend bool operator==(const FnmParams&, const FnmParams&) = default;

 private:
  int K_;
  std::vector<double> pi_;
  std::vector<double> theta_;
  std::vector<double> rho_;
};

/// One unit-variance bivariate normal component of the mixture.
struct FnmComponent {
  double weight;
  double mean1;
  double mean2;
  double rho;
};

/// Component means under the identifiability pattern: first coordinates
/// (K-1, -1, ..., -1), second coordinates (theta_1, ..., theta_{K-1}, -sum theta).
std::vector<FnmComponent> expand(const FnmParams& params);

struct CovarianceSummary {
  double delta11;
  double delta12;
  double delta22;
  double pearson_rho;
};

/// Latent covariance matrix of the mixture from the reduced closed forms.
CovarianceSummary covariance_summary(const FnmParams& params);
double pearson_rho(const FnmParams& params);

/// The K-FNM copula with its latent univariate and bivariate mixture
/// distributions. Immutable; safe to share across threads.
class FnmCopula final : public Copula {
 public:
  explicit FnmCopula(FnmParams params);

  const FnmParams& params() const noexcept { return params_; }
  const std::vector<FnmComponent>& components() const noexcept { return comps_; }

  // Latent mixture margins; dim is 1 or 2.
  double uni_cdf(double y, int dim) const;
  double uni_sf(double y, int dim) const;
  double uni_pdf(double y, int dim) const;
  double uni_log_pdf(double y, int dim) const;
  /// Throws DomainError unless 0 < p < 1.
  double uni_quantile(double p, int dim) const;
  /// Vectorized uni_quantile; warm-starts each root from its sorted neighbour.
  std::vector<double> uni_quantiles(const std::vector<double>& p, int dim) const;

  double biv_cdf(double y1, double y2) const;
  double biv_pdf(double y1, double y2) const;
  double biv_log_pdf(double y1, double y2) const;

  double log_pdf(double u1, double u2) const override;
  double cdf(double u1, double u2) const override;
  double h(double u2, double u1) const override;
  double h_inverse(double q, double u1) const override;
  std::string name() const override;

  /// Copula density from precomputed latent quantiles.
  double log_pdf_latent(double q1, double q2) const;

  /// Latent draw (component by categorical draw, then correlated normal pair)
  /// pushed through the mixture margins.
  std::vector<UniformPair> sample(std::size_t n, std::uint64_t seed) const override;

 private:
  double latent_h(double q2, double q1) const;

  FnmParams params_;
  std::vector<FnmComponent> comps_;
  std::vector<double> log_weight_;
  std::vector<double> sd_cond_;  // sqrt(1 - rho^2)
  bool independent_ = false;
};

}  // namespace fnmcop
