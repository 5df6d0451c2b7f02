#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fnmcop/families.hpp"
#include "fnmcop/fnm.hpp"
#include "fnmcop/optimize.hpp"

namespace fnmcop {

/// Rank-based uniform scores r / (n + 1), one vector per coordinate.
struct PseudoObservations {
  std::vector<double> u1;
  std::vector<double> u2;

  std::size_t size() const noexcept { return u1.size(); }
};

/// Average ranks divided by n + 1. Throws InputError if n < 2 or a value is not finite.
std::vector<double> rank_scores(const std::vector<double>& column);
PseudoObservations pseudo_obs(const std::vector<double>& x, const std::vector<double>& y);

/// Sum of log copula densities; -infinity if any density underflows.
double loglik_fnm(const FnmParams& params, const PseudoObservations& u);
double loglik_family(const CopulaFamily& fam, const PseudoObservations& u);
double loglik(const Copula& cop, const PseudoObservations& u);

/// What to fit: a K-FNM copula or a parametric family (tag and survival flag).
struct ModelSpec {
  bool fnm = true;
  int K = 2;
  FamilyTag tag = FamilyTag::bvn;
  bool survival = false;

  static ModelSpec fnm_model(int K) { return {true, K, FamilyTag::bvn, false}; }
  static ModelSpec family_model(FamilyTag tag, bool survival = false) { return {false, 0, tag, survival}; }
  std::string name() const;
  int parameter_count() const;
};

struct FitOptions {
  /// Starts including the default one; 0 selects 5 for K >= 2 and 1 otherwise.
  int n_restarts = 0;
  /// Natural-coordinate starting values for the default start.
  std::optional<std::vector<double>> init;
  std::uint64_t seed = 20240611;
  bool compute_se = true;
  OptimOptions optim{};
};

struct FitResult {
  std::string model;
  std::optional<FnmParams> fnm;
  std::optional<CopulaFamily> family;
  std::vector<std::string> parameter_names;
  std::vector<double> estimates;
  std::vector<double> standard_errors;  // NaN when unavailable
  bool se_available = false;
  double loglik = 0.0;
  double aic = 0.0;
  int parameter_count = 0;
  bool converged = false;
  int iterations = 0;
  double gradient_norm = 0.0;
  int restarts_used = 0;
};

/// -2 loglik + 2 p.
double aic(double loglik, int parameter_count);
double aic(const FitResult& fit);

/// Unconstrained coordinates used by the optimizer and their inverse maps.
Eigen::VectorXd fnm_to_free(const FnmParams& params);
FnmParams fnm_from_free(int K, const Eigen::VectorXd& z);
Eigen::VectorXd family_to_free(const CopulaFamily& fam);
CopulaFamily family_from_free(FamilyTag tag, bool survival, const Eigen::VectorXd& z);

/// Start point number `index` of `count`: index 0 resembles independence
/// (equal weights, zero means, correlations jittered by 1e-3); the others are
/// stratified random draws determined by seed.
FnmParams fnm_start(int K, int index, int count, std::uint64_t seed);

/// Maximum-likelihood fit on pseudo-observations. Throws OptimizationError if
/// the likelihood is not finite at every start.
FitResult fit_ml(const ModelSpec& model, const PseudoObservations& u, const FitOptions& options = {});

}  // namespace fnmcop
