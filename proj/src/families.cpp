#include "fnmcop/families.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "detail/root_finding.hpp"
#include "fnmcop/errors.hpp"
#include "fnmcop/gauss.hpp"

namespace fnmcop {

CopulaFamily make_bvn(double theta) { return {FamilyTag::bvn, theta, 0.0, 0.0, false}; }
CopulaFamily make_t(double theta, double nu) { return {FamilyTag::t, theta, 0.0, nu, false}; }
CopulaFamily make_frank(double theta) { return {FamilyTag::frank, theta, 0.0, 0.0, false}; }
CopulaFamily make_clayton(double theta) { return {FamilyTag::clayton, theta, 0.0, 0.0, false}; }
CopulaFamily make_gumbel(double theta) { return {FamilyTag::gumbel, theta, 0.0, 0.0, false}; }
CopulaFamily make_bb1(double theta, double delta) { return {FamilyTag::bb1, theta, delta, 0.0, false}; }
CopulaFamily make_bb7(double theta, double delta) { return {FamilyTag::bb7, theta, delta, 0.0, false}; }

void validate(const CopulaFamily& fam) {
  const double th = fam.theta, de = fam.delta;
  const auto fail = [&](const char* what) {
    throw DomainError(family_name(fam.tag) + ": " + what);
  };
  if (!std::isfinite(th)) fail("theta must be finite");
  switch (fam.tag) {
    case FamilyTag::bvn:
      if (!(th > -1.0 && th < 1.0)) fail("theta must lie in (-1, 1)");
      break;
    case FamilyTag::t:
      if (!(th > -1.0 && th < 1.0)) fail("theta must lie in (-1, 1)");
      if (!(fam.nu > 0.0 && std::isfinite(fam.nu))) fail("nu must be positive");
      break;
    case FamilyTag::frank:
      if (th == 0.0) fail("theta must be nonzero");
      break;
    case FamilyTag::clayton:
      if (!(th > 0.0)) fail("theta must be positive");
      break;
    case FamilyTag::gumbel:
      if (!(th >= 1.0)) fail("theta must be at least 1");
      break;
    case FamilyTag::bb1:
      if (!(th > 0.0)) fail("theta must be positive");
      if (!(de >= 1.0 && std::isfinite(de))) fail("delta must be at least 1");
      break;
    case FamilyTag::bb7:
      if (!(th >= 1.0)) fail("theta must be at least 1");
      if (!(de > 0.0 && std::isfinite(de))) fail("delta must be positive");
      break;
  }
}

std::string family_name(FamilyTag tag) {
  switch (tag) {
    case FamilyTag::bvn: return "bvn";
    case FamilyTag::t: return "t";
    case FamilyTag::frank: return "frank";
    case FamilyTag::clayton: return "clayton";
    case FamilyTag::gumbel: return "gumbel";
    case FamilyTag::bb1: return "bb1";
    case FamilyTag::bb7: return "bb7";
  }
  return "unknown";
}

FamilyTag parse_family_tag(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "bvn" || s == "normal" || s == "gaussian") return FamilyTag::bvn;
  if (s == "t" || s == "student" || s == "student-t") return FamilyTag::t;
  if (s == "frank") return FamilyTag::frank;
  if (s == "clayton") return FamilyTag::clayton;
  if (s == "gumbel") return FamilyTag::gumbel;
  if (s == "bb1") return FamilyTag::bb1;
  if (s == "bb7") return FamilyTag::bb7;
  throw DomainError("unknown copula family '" + std::string(name) + "'");
}

std::string display_name(const CopulaFamily& fam) {
  return (fam.survival ? "survival-" : "") + family_name(fam.tag);
}

int parameter_count(FamilyTag tag) {
  switch (tag) {
    case FamilyTag::t:
    case FamilyTag::bb1:
    case FamilyTag::bb7:
      return 2;
    default:
      return 1;
  }
}

CopulaFamily survival(CopulaFamily fam) {
  fam.survival = !fam.survival;
  return fam;
}

namespace {

// log(expm1(a)) for a > 0 without overflow.
double log_expm1(double a) { return a > 30.0 ? a + std::log1p(-std::exp(-a)) : std::log(std::expm1(a)); }

// log(1 + exp(a)).
double log1p_exp(double a) { return a > 35.0 ? a + std::log1p(std::exp(-a)) : std::log1p(std::exp(a)); }

// log(e^{a1} + e^{a2} - 1) for a1, a2 >= 0.
double log_sum_exp_minus_one(double a1, double a2) {
  const double m = std::max(a1, a2);
  if (m < 30.0) return std::log1p(std::expm1(a1) + std::expm1(a2));
  const double lo = std::min(a1, a2);
  return m + std::log1p(std::exp(lo - m) - std::exp(-m));
}

// log(x^d + y^d) / d from log x, log y.
double log_power_mean(double lx, double ly, double d) {
  const double a = d * lx, b = d * ly;
  const double m = std::max(a, b);
  return (m + std::log1p(std::exp(std::min(a, b) - m))) / d;
}

void check_open(double u1, double u2) {
  if (!(u1 > 0.0 && u1 < 1.0 && u2 > 0.0 && u2 < 1.0))
    throw DomainError("copula density is defined on the open unit square");
}

double clamp_unit(double u) { return std::clamp(u, 0.0, 1.0); }

double clamp_open(double u) {
  return std::clamp(u, std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
}

// t-copula conditional scale of Y2 given Y1 = x.
double t_cond_scale(double x, double r, double nu) {
  return std::sqrt((nu + x * x) * (1.0 - r * r) / (nu + 1.0));
}

// expm1(-th) + expm1(-th u1) expm1(-th u2), rearranged so both terms share a
// sign and large |theta| does not cancel.
double frank_denominator(double th, double u1, double u2) {
  return std::exp(-th * u1) * std::expm1(-th * u2) + std::exp(-th * u2) * std::expm1(-th * (1.0 - u2));
}

// BB7 pieces in log space: log(1 - ubar^theta) and log(1 + z).
struct Bb7Point {
  double log_ubar;
  double log_one_minus_pow;  // log(1 - ubar^theta)
};

Bb7Point bb7_point(double u, double theta) {
  const double lub = std::log1p(-u);
  const double pw = std::exp(theta * lub);
  return {lub, pw < 0.5 ? std::log1p(-pw) : std::log(-std::expm1(theta * lub))};
}

}  // namespace

FamilyCopula::FamilyCopula(CopulaFamily fam) : fam_(fam) {
  validate(fam_);
  if (fam_.tag == FamilyTag::t) {
    const double nu = fam_.nu, r = fam_.theta;
    log_norm_ = std::lgamma(0.5 * (nu + 2.0)) - std::lgamma(0.5 * nu) - std::log(nu * kPi) -
                0.5 * std::log1p(-r * r);
  }
}

std::string FamilyCopula::name() const { return display_name(fam_); }

double FamilyCopula::base_log_pdf(double u1, double u2) const {
  const double th = fam_.theta, de = fam_.delta;
  switch (fam_.tag) {
    case FamilyTag::bvn: {
      const double x = norm_quantile(u1), y = norm_quantile(u2);
      const double omr2 = (1.0 - th) * (1.0 + th);
      return -0.5 * std::log(omr2) - (th * th * (x * x + y * y) - 2.0 * th * x * y) / (2.0 * omr2);
    }
    case FamilyTag::t: {
      const DegreesOfFreedom nu(fam_.nu);
      const double x = t_quantile(u1, nu), y = t_quantile(u2, nu);
      const double omr2 = (1.0 - th) * (1.0 + th);
      const double quad = (x * x - 2.0 * th * x * y + y * y) / (fam_.nu * omr2);
      return log_norm_ - 0.5 * (fam_.nu + 2.0) * std::log1p(quad) - t_log_pdf(x, nu) - t_log_pdf(y, nu);
    }
    case FamilyTag::frank:
      return std::log(-th * std::expm1(-th)) - th * (u1 + u2) - 2.0 * std::log(std::abs(frank_denominator(th, u1, u2)));
    case FamilyTag::clayton: {
      const double l1 = std::log(u1), l2 = std::log(u2);
      const double ls = log_sum_exp_minus_one(-th * l1, -th * l2);
      return std::log1p(th) - (th + 1.0) * (l1 + l2) - (2.0 + 1.0 / th) * ls;
    }
    case FamilyTag::gumbel: {
      const double x = -std::log(u1), y = -std::log(u2);
      const double lx = std::log(x), ly = std::log(y);
      const double la = log_power_mean(lx, ly, th);
      const double A = std::exp(la);
      return -A + x + y + (th - 1.0) * (lx + ly) + (1.0 - 2.0 * th) * la + std::log(A + th - 1.0);
    }
    case FamilyTag::bb1: {
      const double l1 = std::log(u1), l2 = std::log(u2);
      const double lx = log_expm1(-th * l1), ly = log_expm1(-th * l2);
      const double lw = log_power_mean(lx, ly, de);
      const double w = std::exp(lw);
      return -(th + 1.0) * (l1 + l2) + (de - 1.0) * (lx + ly) - (1.0 / th + 2.0) * log1p_exp(lw) +
             (1.0 - 2.0 * de) * lw + std::log(th * (de - 1.0) + (th * de + 1.0) * w);
    }
    case FamilyTag::bb7: {
      const Bb7Point p1 = bb7_point(u1, th), p2 = bb7_point(u2, th);
      const double L = log_sum_exp_minus_one(-de * p1.log_one_minus_pow, -de * p2.log_one_minus_pow);
      const double g = std::exp(-L / de);
      const double one_minus_g = -std::expm1(-L / de);
      const double log_psi2 = -std::log(th * de) + (1.0 / th - 2.0) * std::log(one_minus_g) -
                              (1.0 / de + 2.0) * L +
                              std::log((1.0 + 1.0 / de) * one_minus_g + (1.0 - 1.0 / th) * g / de);
      const auto log_dphi = [&](const Bb7Point& p) {
        return std::log(de * th) + (th - 1.0) * p.log_ubar - (de + 1.0) * p.log_one_minus_pow;
      };
      return log_psi2 + log_dphi(p1) + log_dphi(p2);
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double FamilyCopula::base_cdf(double u1, double u2) const {
  const double th = fam_.theta, de = fam_.delta;
  switch (fam_.tag) {
    case FamilyTag::bvn:
      return bvn_cdf(norm_quantile(u1), norm_quantile(u2), Correlation(th));
    case FamilyTag::t: {
      const DegreesOfFreedom nu(fam_.nu), nu1(fam_.nu + 1.0);
      const double x = t_quantile(u1, nu), y = t_quantile(u2, nu);
      if (fam_.nu == std::round(fam_.nu) && fam_.nu <= 1000.0)
        return bvt_cdf_integer(x, y, Correlation(th), static_cast<int>(fam_.nu));
      const auto integrand = [&](double s) {
        return t_pdf(s, nu) * t_cdf((y - th * s) / t_cond_scale(s, th, fam_.nu), nu1);
      };
      const double inf = std::numeric_limits<double>::infinity();
      return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, -inf, x, 15, 1e-13);
    }
    case FamilyTag::frank: {
      const double d = std::expm1(-th);
      const double r = std::expm1(-th * u1) * std::expm1(-th * u2) / d;
      if (std::abs(r) < 0.5) return -std::log1p(r) / th;
      return -std::log(frank_denominator(th, u1, u2) / d) / th;
    }
    case FamilyTag::clayton: {
      const double ls = log_sum_exp_minus_one(-th * std::log(u1), -th * std::log(u2));
      return std::exp(-ls / th);
    }
    case FamilyTag::gumbel: {
      const double la = log_power_mean(std::log(-std::log(u1)), std::log(-std::log(u2)), th);
      return std::exp(-std::exp(la));
    }
    case FamilyTag::bb1: {
      const double lx = log_expm1(-th * std::log(u1)), ly = log_expm1(-th * std::log(u2));
      return std::exp(-log1p_exp(log_power_mean(lx, ly, de)) / th);
    }
    case FamilyTag::bb7: {
      const Bb7Point p1 = bb7_point(u1, th), p2 = bb7_point(u2, th);
      const double L = log_sum_exp_minus_one(-de * p1.log_one_minus_pow, -de * p2.log_one_minus_pow);
      const double one_minus_g = -std::expm1(-L / de);
      return -std::expm1(std::log(one_minus_g) / th);
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double FamilyCopula::base_h(double u2, double u1) const {
  const double th = fam_.theta, de = fam_.delta;
  switch (fam_.tag) {
    case FamilyTag::bvn: {
      const double x = norm_quantile(u1), y = norm_quantile(u2);
      return norm_cdf((y - th * x) / std::sqrt((1.0 - th) * (1.0 + th)));
    }
    case FamilyTag::t: {
      const DegreesOfFreedom nu(fam_.nu);
      const double x = t_quantile(u1, nu), y = t_quantile(u2, nu);
      return t_cdf((y - th * x) / t_cond_scale(x, th, fam_.nu), DegreesOfFreedom(fam_.nu + 1.0));
    }
    case FamilyTag::frank:
      return std::exp(-th * u1) * std::expm1(-th * u2) / frank_denominator(th, u1, u2);
    case FamilyTag::clayton: {
      const double l1 = std::log(u1);
      const double ls = log_sum_exp_minus_one(-th * l1, -th * std::log(u2));
      return std::exp(-(th + 1.0) * l1 - (1.0 + 1.0 / th) * ls);
    }
    case FamilyTag::gumbel: {
      const double x = -std::log(u1);
      const double lx = std::log(x);
      const double la = log_power_mean(lx, std::log(-std::log(u2)), th);
      return std::exp(-std::exp(la) + x + (th - 1.0) * lx + (1.0 - th) * la);
    }
    case FamilyTag::bb1: {
      const double l1 = std::log(u1);
      const double lx = log_expm1(-th * l1), ly = log_expm1(-th * std::log(u2));
      const double lw = log_power_mean(lx, ly, de);
      return std::exp(-(1.0 / th + 1.0) * log1p_exp(lw) + (1.0 - de) * lw + (de - 1.0) * lx -
                      (th + 1.0) * l1);
    }
    case FamilyTag::bb7: {
      const Bb7Point p1 = bb7_point(u1, th), p2 = bb7_point(u2, th);
      const double L = log_sum_exp_minus_one(-de * p1.log_one_minus_pow, -de * p2.log_one_minus_pow);
      const double one_minus_g = -std::expm1(-L / de);
      return std::exp((1.0 / th - 1.0) * std::log(one_minus_g) - (1.0 / de + 1.0) * L -
                      (de + 1.0) * p1.log_one_minus_pow + (th - 1.0) * p1.log_ubar);
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double FamilyCopula::base_h_inverse(double q, double u1) const {
  const double th = fam_.theta;
  switch (fam_.tag) {
    case FamilyTag::bvn: {
      const double x = norm_quantile(u1);
      return norm_cdf(th * x + std::sqrt((1.0 - th) * (1.0 + th)) * norm_quantile(q));
    }
    case FamilyTag::t: {
      const DegreesOfFreedom nu(fam_.nu);
      const double x = t_quantile(u1, nu);
      const double y = th * x + t_cond_scale(x, th, fam_.nu) * t_quantile(q, DegreesOfFreedom(fam_.nu + 1.0));
      return t_cdf(y, nu);
    }
    case FamilyTag::frank: {
      const double e1 = std::exp(-th * u1);
      const double den = e1 * (1.0 - q) + q;
      const double b = q * std::expm1(-th) / den;
      if (b > -0.5) return -std::log1p(b) / th;
      // 1 + b without cancellation.
      return -(std::log(e1 * (1.0 - q) + q * std::exp(-th)) - std::log(den)) / th;
    }
    case FamilyTag::clayton: {
      const double t = std::expm1(-th / (1.0 + th) * std::log(q));
      const double lw = -th * std::log(u1) + std::log(t);
      return std::exp(-log1p_exp(lw) / th);
    }
    case FamilyTag::gumbel: {
      // Solve A - x + (theta - 1)(log A - log x) = -log q for a = log A;
      // convex increasing in a, so Newton from the right converges monotonically.
      const double x = -std::log(u1);
      const double lx = std::log(x), lq = std::log(q);
      double a = std::log(x - lq);
      for (int i = 0; i < 100; ++i) {
        const double ea = std::exp(a);
        const double f = ea - x + (th - 1.0) * (a - lx) + lq;
        const double step = f / (ea + th - 1.0);
        a -= step;
        if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(a))) break;
      }
      a = std::max(a, lx);
      // y = A (1 - (x/A)^theta)^(1/theta)
      const double ly = a + std::log(-std::expm1(th * (lx - a))) / th;
      return std::exp(-std::exp(ly));
    }
    case FamilyTag::bb1:
    case FamilyTag::bb7:
      return detail::invert_increasing([&](double u) { return base_h(u, u1); },
                                       [&](double u) { return std::exp(base_log_pdf(u1, u)); }, q,
                                       1e-12, name(), u1);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double FamilyCopula::log_pdf(double u1, double u2) const {
  check_open(u1, u2);
  return fam_.survival ? base_log_pdf(1.0 - u1, 1.0 - u2) : base_log_pdf(u1, u2);
}

double FamilyCopula::cdf(double u1, double u2) const {
  if (u1 <= 0.0 || u2 <= 0.0) return 0.0;
  if (u1 >= 1.0) return std::min(u2, 1.0);
  if (u2 >= 1.0) return u1;
  const double lower = std::max(0.0, u1 + u2 - 1.0), upper = std::min(u1, u2);
  const double c = fam_.survival ? u1 + u2 - 1.0 + base_cdf(1.0 - u1, 1.0 - u2) : base_cdf(u1, u2);
  return std::clamp(c, lower, upper);
}

double FamilyCopula::h(double u2, double u1) const {
  if (!(u1 > 0.0 && u1 < 1.0)) throw DomainError("conditional cdf: u1 must lie in (0, 1)");
  if (u2 <= 0.0) return 0.0;
  if (u2 >= 1.0) return 1.0;
  return clamp_unit(fam_.survival ? 1.0 - base_h(1.0 - u2, 1.0 - u1) : base_h(u2, u1));
}

double FamilyCopula::h_inverse(double q, double u1) const {
  if (!(q > 0.0 && q < 1.0 && u1 > 0.0 && u1 < 1.0))
    throw DomainError("conditional inverse: arguments must lie in (0, 1)");
  return clamp_open(fam_.survival ? 1.0 - base_h_inverse(1.0 - q, 1.0 - u1) : base_h_inverse(q, u1));
}

namespace {

double frank_tau(double th) {
  if (std::abs(th) < 1e-4) return th / 9.0 - th * th * th / 900.0;
  const auto f = [](double t) { return t == 0.0 ? 1.0 : t / std::expm1(t); };
  double err = 0.0;
  const double integral =
      boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, th, 15, 1e-14, &err);
  const double debye1 = integral / th;
  return 1.0 + 4.0 / th * (debye1 - 1.0);
}

double bb7_tau(double th, double de) {
  // 1 + 4 * int_0^1 phi / phi' with phi(u) = (1 - (1-u)^theta)^(-delta) - 1.
  const auto f = [&](double u) {
    if (u <= 0.0 || u >= 1.0) return 0.0;
    const double lub = std::log1p(-u);
    const double pw = std::exp(th * lub);
    const double lomp = pw < 0.5 ? std::log1p(-pw) : std::log(-std::expm1(th * lub));  // log(1 - ubar^theta)
    // (1 - ubar^th) - (1 - ubar^th)^(de+1) = (1 - ubar^th) * (1 - (1 - ubar^th)^de)
    const double num = std::exp(lomp) * -std::expm1(de * lomp);
    return -num / (de * th * std::exp((th - 1.0) * lub));
  };
  const double integral =
      boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, 1.0, 20, 1e-14);
  return 1.0 + 4.0 * integral;
}

TailSummary with_orders(double lL, double lU, double kL, double kU) {
  return {lL, lU, lL > 0.0 ? 1.0 : std::clamp(kL, 1.0, 2.0), lU > 0.0 ? 1.0 : std::clamp(kU, 1.0, 2.0)};
}

}  // namespace

double tau_of(const CopulaFamily& fam) {
  validate(fam);
  const double th = fam.theta, de = fam.delta;
  switch (fam.tag) {
    case FamilyTag::bvn:
    case FamilyTag::t:
      return 2.0 / kPi * std::asin(th);
    case FamilyTag::frank:
      return frank_tau(th);
    case FamilyTag::clayton:
      return th / (th + 2.0);
    case FamilyTag::gumbel:
      return 1.0 - 1.0 / th;
    case FamilyTag::bb1:
      return 1.0 - 2.0 / (de * (th + 2.0));
    case FamilyTag::bb7:
      return bb7_tau(th, de);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

TailSummary lambda_of(const CopulaFamily& fam) {
  validate(fam);
  const double th = fam.theta, de = fam.delta;
  TailSummary s{};
  switch (fam.tag) {
    case FamilyTag::bvn:
      s = with_orders(0.0, 0.0, 2.0 / (1.0 + th), 2.0 / (1.0 + th));
      break;
    case FamilyTag::t: {
      const double l = 2.0 * t_cdf(-std::sqrt((fam.nu + 1.0) * (1.0 - th) / (1.0 + th)),
                                   DegreesOfFreedom(fam.nu + 1.0));
      s = with_orders(l, l, 1.0, 1.0);
      break;
    }
    case FamilyTag::frank:
      s = with_orders(0.0, 0.0, 2.0, 2.0);
      break;
    case FamilyTag::clayton:
      s = with_orders(std::pow(2.0, -1.0 / th), 0.0, 1.0, 2.0);
      break;
    case FamilyTag::gumbel:
      s = with_orders(0.0, 2.0 - std::pow(2.0, 1.0 / th), std::pow(2.0, 1.0 / th), 2.0);
      break;
    case FamilyTag::bb1:
      s = with_orders(std::pow(2.0, -1.0 / (th * de)), 2.0 - std::pow(2.0, 1.0 / de), 1.0, 2.0);
      break;
    case FamilyTag::bb7:
      s = with_orders(std::pow(2.0, -1.0 / de), 2.0 - std::pow(2.0, 1.0 / th), 1.0, 2.0);
      break;
  }
  if (fam.survival) {
    std::swap(s.lambda_L, s.lambda_U);
    std::swap(s.kappa_L, s.kappa_U);
  }
  return s;
}

double tau_to_param(FamilyTag tag, double tau) {
  const auto unattainable = [&] {
    throw DomainError(family_name(tag) + ": Kendall's tau " + std::to_string(tau) + " is not attainable");
  };
  if (!(tau > -1.0 && tau < 1.0)) unattainable();
  switch (tag) {
    case FamilyTag::bvn:
    case FamilyTag::t:
      return std::sin(kPi * tau / 2.0);
    case FamilyTag::clayton:
      if (!(tau > 0.0)) unattainable();
      return 2.0 * tau / (1.0 - tau);
    case FamilyTag::gumbel:
      if (!(tau >= 0.0)) unattainable();
      return 1.0 / (1.0 - tau);
    case FamilyTag::frank: {
      if (tau == 0.0) unattainable();
      const double target = std::abs(tau);
      const auto f = [&](double th) { return frank_tau(th) - target; };
      double lo = 1e-8, hi = 8.0 / (1.0 - target) + 10.0;
      boost::uintmax_t iters = 200;
      const auto r = boost::math::tools::toms748_solve(f, lo, hi, boost::math::tools::eps_tolerance<double>(52),
                                                       iters);
      const double th = 0.5 * (r.first + r.second);
      return tau > 0.0 ? th : -th;
    }
    case FamilyTag::bb1:
    case FamilyTag::bb7:
      throw DomainError(family_name(tag) + " has two parameters; use the tail-dependence constructors");
  }
  unattainable();
  return 0.0;
}

CopulaFamily bb1_from_lambdas(double lambda_L, double lambda_U) {
  if (!(lambda_L > 0.0 && lambda_L < 1.0 && lambda_U >= 0.0 && lambda_U < 1.0))
    throw DomainError("bb1: tail dependence coefficients must satisfy 0 < lambda_L < 1, 0 <= lambda_U < 1");
  const double delta = 1.0 / std::log2(2.0 - lambda_U);
  const double theta = -1.0 / (delta * std::log2(lambda_L));
  return make_bb1(theta, delta);
}

CopulaFamily bb7_from_lambdas(double lambda_L, double lambda_U) {
  if (!(lambda_L > 0.0 && lambda_L < 1.0 && lambda_U >= 0.0 && lambda_U < 1.0))
    throw DomainError("bb7: tail dependence coefficients must satisfy 0 < lambda_L < 1, 0 <= lambda_U < 1");
  return make_bb7(1.0 / std::log2(2.0 - lambda_U), -1.0 / std::log2(lambda_L));
}

}  // namespace fnmcop
