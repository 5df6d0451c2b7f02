#pragma once

#include <vector>

#include <Eigen/Core>

#include "fnmcop/copula.hpp"
#include "fnmcop/kl.hpp"

namespace fnmcop {

enum class Link { probit, logit };

double link_cdf(Link link, double z);
double link_quantile(Link link, double p);

/// Two ordinal regressions on a scalar covariate sharing their cutpoints:
/// P(Y_j <= y | x) = G(alpha_{y+1} + beta_j x).
struct OrdinalSpec {
  int categories = 2;
  std::vector<double> cutpoints;  // alpha_1 < ... < alpha_{categories-1}
  double beta1 = 1.0;
  double beta2 = 0.7;
  Link link = Link::logit;
  std::vector<double> grid;  // covariate values

  /// Cutpoints G^{-1}(y / categories), so categories are equiprobable at x = 0,
  /// and grid_size covariate values equally spaced on [-1, 1].
  static OrdinalSpec equally_weighted(int categories, int grid_size = 5, double beta1 = 1.0, double beta2 = 0.7,
                                      Link link = Link::logit);
  /// Throws DomainError on unordered cutpoints, fewer than 2 categories or an empty grid.
  void validate() const;
  /// G(alpha_y + beta_j x) for y = 0..categories, with the 0 and 1 end values exact.
  std::vector<double> cumulative(double x, int margin) const;
};

double ordinal_pmf(int y, double x, const OrdinalSpec& spec, int margin);
double biv_pmf(int y1, int y2, double x, const OrdinalSpec& spec, const Copula& cop);

/// One categories x categories matrix f(y1, y2 | x) per grid value.
struct DiscretePmfTable {
  std::vector<double> x;
  std::vector<Eigen::MatrixXd> pmf;
};

/// Rectangle probabilities; throws NumericError if one is below -1e-12.
DiscretePmfTable pmf_table(const OrdinalSpec& spec, const Copula& cop);

struct DiscreteKlMoments {
  /// Average over the covariate grid of KL(f(.|x), g(.|x)).
  double kl = 0.0;
  /// The same terms summed instead of averaged.
  double kl_sum = 0.0;
  /// Variance of log(f/g) under f with x uniform on the grid.
  double sigma2 = 0.0;
};

DiscreteKlMoments kl_discrete_moments(const DiscretePmfTable& f, const DiscretePmfTable& g);
/// Grid-averaged discrete KL.
double kl_discrete(const OrdinalSpec& spec, const Copula& f, const Copula& g);

/// Sample size from the grid-averaged KL and variance, as for continuous data.
double discrete_sample_size(const DiscreteKlMoments& m, SampleSizeForm form = SampleSizeForm::squared);

/// K-FNM copula whose discretized model is closest in KL to the discretized target.
KlReport kl_discrete_minimize(const CopulaFamily& target, const OrdinalSpec& spec, int K,
                              const KlOptions& options = {});
/// Parallel sweep with the same ordering and seeding contract as kl_table.
std::vector<KlReport> kl_discrete_table(const std::vector<CopulaFamily>& targets, const OrdinalSpec& spec, int K,
                                        const KlOptions& options = {});

}  // namespace fnmcop
