#pragma once

#include <string>
#include <string_view>

#include "fnmcop/copula.hpp"

namespace fnmcop {

enum class FamilyTag { bvn, t, frank, clayton, gumbel, bb1, bb7 };

/// A parametric reference copula. Only the fields used by the tag matter:
/// theta always, delta for BB1/BB7, nu for t.
struct CopulaFamily {
  FamilyTag tag = FamilyTag::bvn;
  double theta = 0.0;
  double delta = 0.0;
  double nu = 0.0;
  bool survival = false;

  friend bool operator==(const CopulaFamily&, const CopulaFamily&) = default;
};

CopulaFamily make_bvn(double theta);
CopulaFamily make_t(double theta, double nu);
CopulaFamily make_frank(double theta);
CopulaFamily make_clayton(double theta);
CopulaFamily make_gumbel(double theta);
CopulaFamily make_bb1(double theta, double delta);
CopulaFamily make_bb7(double theta, double delta);

/// Throws DomainError when a parameter is outside the family's domain.
void validate(const CopulaFamily& fam);

std::string family_name(FamilyTag tag);
/// Case-insensitive; accepts a few aliases ("normal", "gaussian", "student").
FamilyTag parse_family_tag(std::string_view name);
/// "gumbel", "survival-gumbel", ...
std::string display_name(const CopulaFamily& fam);
/// 1 for one-parameter families, 2 for t, BB1 and BB7.
int parameter_count(FamilyTag tag);

/// Reflection (u1, u2) -> (1 - u1, 1 - u2); an involution.
CopulaFamily survival(CopulaFamily fam);

class FamilyCopula final : public Copula {
 public:
  explicit FamilyCopula(CopulaFamily fam);

  const CopulaFamily& family() const noexcept { return fam_; }

  double log_pdf(double u1, double u2) const override;
  double cdf(double u1, double u2) const override;
  double h(double u2, double u1) const override;
  double h_inverse(double q, double u1) const override;
  std::string name() const override;

 private:
  double base_log_pdf(double u1, double u2) const;
  double base_cdf(double u1, double u2) const;
  double base_h(double u2, double u1) const;
  double base_h_inverse(double q, double u1) const;

  CopulaFamily fam_;
  double log_norm_ = 0.0;  // t: log-density constant
};

struct TailSummary {
  double lambda_L;
  double lambda_U;
  double kappa_L;
  double kappa_U;
};

/// Kendall's tau. BB7 uses the one-dimensional Archimedean integral.
double tau_of(const CopulaFamily& fam);
TailSummary lambda_of(const CopulaFamily& fam);

/// Parameter theta of a one-parameter family (or the correlation of BVN/t)
/// attaining Kendall's tau. Throws DomainError if tau is unattainable.
double tau_to_param(FamilyTag tag, double tau);

/// Families matching a prescribed pair of tail-dependence coefficients.
CopulaFamily bb1_from_lambdas(double lambda_L, double lambda_U);
CopulaFamily bb7_from_lambdas(double lambda_L, double lambda_U);

}  // namespace fnmcop
