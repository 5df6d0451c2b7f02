#include "fnmcop/gauss.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/erf.hpp>

#include "fnmcop/errors.hpp"
#include "fnmcop/quadrature.hpp"

namespace fnmcop {

Correlation::Correlation(double value) : value_(value) {
  if (!(value > -1.0 && value < 1.0))
    throw DomainError("correlation must lie strictly inside (-1, 1)");
}

DegreesOfFreedom::DegreesOfFreedom(double nu) : nu_(nu) {
  if (!(nu > 0.0) || !std::isfinite(nu))
    throw DomainError("degrees of freedom must be positive and finite");
}

double norm_pdf(double z) { return std::exp(norm_log_pdf(z)); }

double norm_log_pdf(double z) { return -0.5 * z * z - kLogSqrt2Pi; }

double norm_cdf(double z) { return 0.5 * std::erfc(-z / kSqrt2); }

double norm_log_cdf(double z) {
  if (z > -37.0) return std::log(norm_cdf(z));
  // Mills-ratio asymptotic series; truncation error below 1e-16 for z <= -37.
  const double z2 = 1.0 / (z * z);
  const double series =
      1.0 - z2 * (1.0 - 3.0 * z2 * (1.0 - 5.0 * z2 * (1.0 - 7.0 * z2)));
  return norm_log_pdf(z) - std::log(-z) + std::log(series);
}

double norm_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw DomainError("norm_quantile: p must lie in (0, 1)");
  if (p < 0.5) return -kSqrt2 * boost::math::erfc_inv(2.0 * p);
  return kSqrt2 * boost::math::erfc_inv(2.0 * (1.0 - p));
}

double norm_quantile_upper(double q) {
  if (!(q > 0.0 && q < 1.0))
    throw DomainError("norm_quantile_upper: q must lie in (0, 1)");
  return -norm_quantile(q);
}

double bvn_log_pdf(double z1, double z2, Correlation rho) {
  const double r = rho.value();
  const double omr2 = (1.0 - r) * (1.0 + r);
  const double quad = (z1 * z1 - 2.0 * r * z1 * z2 + z2 * z2) / omr2;
  return -0.5 * quad - 2.0 * kLogSqrt2Pi - 0.5 * std::log(omr2);
}

double bvn_pdf(double z1, double z2, Correlation rho) {
  return std::exp(bvn_log_pdf(z1, z2, rho));
}

namespace {

// Node sets (x < 0 half) of the 6-, 12- and 20-point Gauss-Legendre rules.
struct HalfRule {
  std::array<double, 10> x{};
  std::array<double, 10> w{};
  int count = 0;
};

const std::array<HalfRule, 3>& genz_rules() {
  static const std::array<HalfRule, 3> rules = [] {
    std::array<HalfRule, 3> out;
    const std::array<std::size_t, 3> sizes{6, 12, 20};
    for (std::size_t k = 0; k < 3; ++k) {
      const QuadratureRule full = legendre_rule(sizes[k]);
      out[k].count = static_cast<int>(sizes[k] / 2);
      for (int i = 0; i < out[k].count; ++i) {
        out[k].x[i] = full.nodes[i];
        out[k].w[i] = full.weights[i];
      }
    }
    return out;
  }();
  return rules;
}

// P(X > h, Y > k) for standard bivariate normal with correlation r.
double bvn_upper(double h, double k, double r) {
  constexpr double two_pi = 2.0 * kPi;
  const auto& rules = genz_rules();
  const HalfRule& rule =
      std::abs(r) < 0.3 ? rules[0] : (std::abs(r) < 0.75 ? rules[1] : rules[2]);
  double hk = h * k;
  double bvn = 0.0;
  if (std::abs(r) < 0.925) {
    const double hs = 0.5 * (h * h + k * k);
    const double asr = std::asin(r);
    for (int i = 0; i < rule.count; ++i) {
      for (double sign : {-1.0, 1.0}) {
        const double sn = std::sin(0.5 * asr * (sign * rule.x[i] + 1.0));
        bvn += rule.w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
      }
    }
    return bvn * asr / (2.0 * two_pi) + norm_cdf(-h) * norm_cdf(-k);
  }
  if (r < 0.0) {
    k = -k;
    hk = -hk;
  }
  if (std::abs(r) < 1.0) {
    const double as = (1.0 - r) * (1.0 + r);
    double a = std::sqrt(as);
    const double bs = (h - k) * (h - k);
    const double c = (4.0 - hk) / 8.0;
    const double d = (12.0 - hk) / 16.0;
    bvn = a * std::exp(-0.5 * (bs / as + hk)) *
          (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as * as / 5.0);
    if (hk > -160.0) {
      const double b = std::sqrt(bs);
      bvn -= std::exp(-0.5 * hk) * std::sqrt(two_pi) * norm_cdf(-b / a) * b *
             (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
    }
    a *= 0.5;
    for (int i = 0; i < rule.count; ++i) {
      for (double sign : {-1.0, 1.0}) {
        const double xs = std::pow(a * (sign * rule.x[i] + 1.0), 2);
        const double rs = std::sqrt(1.0 - xs);
        const double asr = -0.5 * (bs / xs + hk);
        if (asr > -100.0) {
          bvn += a * rule.w[i] * std::exp(asr) *
                 (std::exp(-hk * xs / (2.0 * (1.0 + rs) * (1.0 + rs))) / rs -
                  (1.0 + c * xs * (1.0 + d * xs)));
        }
      }
    }
    bvn = -bvn / two_pi;
  }
  if (r > 0.0) return bvn + norm_cdf(-std::max(h, k));
  if (h >= k) return -bvn;
  const double band = h < 0.0 ? norm_cdf(k) - norm_cdf(h) : norm_cdf(-h) - norm_cdf(-k);
  return band - bvn;
}

}  // namespace

double bvn_cdf(double z1, double z2, Correlation rho) {
  const double p = bvn_upper(-z1, -z2, rho.value());
  return std::clamp(p, 0.0, 1.0);
}

namespace {
boost::math::students_t_distribution<double> t_dist(DegreesOfFreedom nu) {
  return boost::math::students_t_distribution<double>(nu.value());
}
}  // namespace

double t_log_pdf(double x, DegreesOfFreedom nu) {
  const double v = nu.value();
  return std::lgamma(0.5 * (v + 1.0)) - std::lgamma(0.5 * v) -
         0.5 * std::log(v * kPi) - 0.5 * (v + 1.0) * std::log1p(x * x / v);
}

double t_pdf(double x, DegreesOfFreedom nu) { return std::exp(t_log_pdf(x, nu)); }

double t_cdf(double x, DegreesOfFreedom nu) {
  if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
  return boost::math::cdf(t_dist(nu), x);
}

double t_quantile(double p, DegreesOfFreedom nu) {
  if (!(p > 0.0 && p < 1.0))
    throw DomainError("t_quantile: p must lie in (0, 1)");
  if (p > 0.5) return -boost::math::quantile(t_dist(nu), 1.0 - p);
  return boost::math::quantile(t_dist(nu), p);
}

}  // namespace fnmcop

namespace fnmcop {

double bvt_cdf_integer(double dh, double dk, Correlation rho, int nu) {
  if (nu < 1) throw DomainError("bvt_cdf_integer needs nu >= 1");
  const double r = rho.value();
  const double dnu = nu, snu = std::sqrt(dnu);
  const double ors = 1.0 - r * r;
  const double hrk = dh - r * dk, krh = dk - r * dh;
  double xnhk = 0.0, xnkh = 0.0;
  if (std::abs(hrk) + ors > 0.0) {
    xnhk = hrk * hrk / (hrk * hrk + ors * (dnu + dk * dk));
    xnkh = krh * krh / (krh * krh + ors * (dnu + dh * dh));
  }
  const double hs = hrk < 0.0 ? -1.0 : 1.0, ks = krh < 0.0 ? -1.0 : 1.0;
  double bvt;
  if (nu % 2 == 0) {
    bvt = std::atan2(std::sqrt(ors), -r) / (2.0 * kPi);
    double gmph = dh / std::sqrt(16.0 * (dnu + dh * dh));
    double gmpk = dk / std::sqrt(16.0 * (dnu + dk * dk));
    double btnckh = 2.0 * std::atan2(std::sqrt(xnkh), std::sqrt(1.0 - xnkh)) / kPi;
    double btpdkh = 2.0 * std::sqrt(xnkh * (1.0 - xnkh)) / kPi;
    double btnchk = 2.0 * std::atan2(std::sqrt(xnhk), std::sqrt(1.0 - xnhk)) / kPi;
    double btpdhk = 2.0 * std::sqrt(xnhk * (1.0 - xnhk)) / kPi;
    for (int j = 1; j <= nu / 2; ++j) {
      bvt += gmph * (1.0 + ks * btnckh) + gmpk * (1.0 + hs * btnchk);
      btnckh += btpdkh;
      btpdkh = 2.0 * j * btpdkh * (1.0 - xnkh) / (2.0 * j + 1.0);
      btnchk += btpdhk;
      btpdhk = 2.0 * j * btpdhk * (1.0 - xnhk) / (2.0 * j + 1.0);
      gmph = gmph * (2.0 * j - 1.0) / (2.0 * j * (1.0 + dh * dh / dnu));
      gmpk = gmpk * (2.0 * j - 1.0) / (2.0 * j * (1.0 + dk * dk / dnu));
    }
  } else {
    const double qhrk = std::sqrt(dh * dh + dk * dk - 2.0 * r * dh * dk + dnu * ors);
    const double hkrn = dh * dk + r * dnu, hkn = dh * dk - dnu, hpk = dh + dk;
    bvt = std::atan2(-snu * (hkn * qhrk + hpk * hkrn), hkn * hkrn - dnu * hpk * qhrk) / (2.0 * kPi);
    if (bvt < -1e-15) bvt += 1.0;
    double gmph = dh / (2.0 * kPi * snu * (1.0 + dh * dh / dnu));
    double gmpk = dk / (2.0 * kPi * snu * (1.0 + dk * dk / dnu));
    double btnckh = std::sqrt(xnkh), btpdkh = btnckh;
    double btnchk = std::sqrt(xnhk), btpdhk = btnchk;
    for (int j = 1; j <= (nu - 1) / 2; ++j) {
      bvt += gmph * (1.0 + ks * btnckh) + gmpk * (1.0 + hs * btnchk);
      btpdkh = (2.0 * j - 1.0) * btpdkh * (1.0 - xnkh) / (2.0 * j);
      btnckh += btpdkh;
      btpdhk = (2.0 * j - 1.0) * btpdhk * (1.0 - xnhk) / (2.0 * j);
      btnchk += btpdhk;
      gmph = 2.0 * j * gmph / ((2.0 * j + 1.0) * (1.0 + dh * dh / dnu));
      gmpk = 2.0 * j * gmpk / ((2.0 * j + 1.0) * (1.0 + dk * dk / dnu));
    }
  }
  return std::clamp(bvt, 0.0, 1.0);
}

}  // namespace fnmcop
