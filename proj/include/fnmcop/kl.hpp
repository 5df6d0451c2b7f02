#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fnmcop/families.hpp"
#include "fnmcop/fnm.hpp"
#include "fnmcop/optimize.hpp"
#include "fnmcop/quadrature.hpp"

namespace fnmcop {

struct KlMoments {
  double kl = 0.0;
  double sigma2 = 0.0;
};

/// KL(c1, c2) and the variance of log(c1/c2) under c1, by product
/// Gauss-Legendre nodes pushed through the conditional inverse of c1.
KlMoments kl_moments(const Copula& c1, const Copula& c2, const QuadratureRule& rule);

/// Dependent nodes and log c1 values of a target copula, reusable across many
/// candidate densities c2.
class KlTarget {
 public:
  KlTarget(const Copula& c1, const QuadratureRule& rule);

  KlMoments moments(const Copula& c2) const;
  /// Same as moments(FnmCopula(params)) but with vectorized latent quantiles.
  KlMoments moments_fnm(const FnmParams& params) const;

  const std::vector<double>& u1() const noexcept { return u1_; }
  const std::vector<double>& u2() const noexcept { return u2_; }
  const std::vector<double>& weights() const noexcept { return w_; }

 private:
  KlMoments reduce(const std::vector<double>& log_c2) const;

  std::vector<double> u1_, u2_, w_, log_c1_;
};

enum class SampleSizeForm {
  printed,   // z * (sigma / kl)^2
  squared,   // (z * sigma / kl)^2
};

/// Sample size needed to discriminate the two densities at the 95% level.
/// Throws DomainError when kl <= 0.
double kl_sample_size(double kl, double sigma2, SampleSizeForm form = SampleSizeForm::squared);

struct KlOptions {
  int n_starts = 10;
  std::uint64_t seed = 20240611;
  SampleSizeForm form = SampleSizeForm::squared;
  /// Local optima are compared on a finer rule (0 selects 2 nq + 1) so that
  /// spikes placed between coarse nodes do not win.
  std::size_t refine_nq = 0;
  /// The independence-like start is kept unless another start lowers the
  /// refined KL by more than this.
  double default_margin = 2e-3;
  OptimOptions optim{.max_iter = 500, .gtol = 1e-5, .ftol = 1e-10, .max_step = 1.0, .fd_step = 1e-6};
};

struct KlReport {
  CopulaFamily target{};
  int K = 0;
  /// Number of ordinal categories for discrete comparisons, 0 for continuous.
  int categories = 0;
  double tau = 0.0;
  double lambda_L = 0.0;
  double lambda_U = 0.0;
  double kl = 0.0;
  double sigma2 = 0.0;
  /// NaN when kl <= 0.
  double sample_size = 0.0;
  std::optional<FnmParams> fnm;
  bool converged = false;
  double gradient_norm = 0.0;
  int starts = 0;
  /// Non-empty when the row failed; the numeric fields are then NaN.
  std::string error;
};

/// K-FNM copula closest in KL to the target; deterministic given options.seed.
KlReport kl_minimize(const CopulaFamily& target, int K, const QuadratureRule& rule, const KlOptions& options = {});

/// One kl_minimize per target, run in parallel and returned in input order.
/// Failed rows carry the error message instead of throwing.
std::vector<KlReport> kl_table(const std::vector<CopulaFamily>& targets, int K, const QuadratureRule& rule,
                               const KlOptions& options = {});
/// Targets from tau_to_param for each tau.
std::vector<KlReport> kl_table(FamilyTag tag, const std::vector<double>& taus, int K, const QuadratureRule& rule,
                               const KlOptions& options = {}, bool survival = false);

/// Seed key of a table cell; the same cell gets the same seed in any run.
std::string kl_task_key(const CopulaFamily& target, int K, int categories = 0);

/// Independence-like start with equal weights, zero means and rho_k = 1e-3.
FnmParams symmetric_start(int K);

/// Fills in tau and the tail coefficients of report.target.
void describe_target(KlReport& report);

}  // namespace fnmcop
