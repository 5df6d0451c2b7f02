#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <boost/math/distributions/chi_squared.hpp>

#include "fnmcop/errors.hpp"
#include "fnmcop/families.hpp"
#include "fnmcop/fnm.hpp"
#include "fnmcop/gauss.hpp"
#include "fnmcop/quadrature.hpp"
#include "test_support.hpp"

using namespace fnmcop;
using fnmcop::test_support::marginal_mass;
using fnmcop::test_support::random_fnm_params;

namespace {

FnmParams two(double pi, double theta, double r1, double r2) { return FnmParams(2, {pi}, {theta}, {r1, r2}); }

struct LatentMoments {
  double m1 = 0, m2 = 0, v1 = 0, v2 = 0, c12 = 0;
};

// Mixture moments straight from the component means and covariances.
LatentMoments moments_from_components(const FnmParams& p) {
  LatentMoments m;
  const auto comps = expand(p);
  for (const auto& c : comps) {
    m.m1 += c.weight * c.mean1;
    m.m2 += c.weight * c.mean2;
  }
  for (const auto& c : comps) {
    m.v1 += c.weight * (1.0 + (c.mean1 - m.m1) * (c.mean1 - m.m1));
    m.v2 += c.weight * (1.0 + (c.mean2 - m.m2) * (c.mean2 - m.m2));
    m.c12 += c.weight * (c.rho + (c.mean1 - m.m1) * (c.mean2 - m.m2));
  }
  return m;
}

// Latent draws generated independently of FnmCopula::sample.
double monte_carlo_correlation(const FnmParams& p, std::size_t n, std::uint64_t seed) {
  const auto comps = expand(p);
  std::mt19937_64 rng(seed);
  std::vector<double> w;
  for (const auto& c : comps) w.push_back(c.weight);
  std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
  std::normal_distribution<double> z;
  double s1 = 0, s2 = 0, s11 = 0, s22 = 0, s12 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& c = comps[pick(rng)];
    const double a = z(rng), b = z(rng);
    const double y1 = c.mean1 + a;
    const double y2 = c.mean2 + c.rho * a + std::sqrt(1 - c.rho * c.rho) * b;
    s1 += y1; s2 += y2; s11 += y1 * y1; s22 += y2 * y2; s12 += y1 * y2;
  }
  const double nd = static_cast<double>(n);
  const double cov = s12 / nd - s1 * s2 / (nd * nd);
  return cov / std::sqrt((s11 / nd - s1 * s1 / (nd * nd)) * (s22 / nd - s2 * s2 / (nd * nd)));
}

}  // namespace

TEST(FnmParams, ValidationRejectsInvalid) {
  EXPECT_THROW(FnmParams(2, {1.0}, {0.0}, {0.0, 0.0}), DomainError);
  EXPECT_THROW(FnmParams(2, {0.5}, {0.0}, {1.0, 0.0}), DomainError);
  EXPECT_THROW(FnmParams(3, {0.6, 0.5}, {0.0, 0.0}, {0.0, 0.0, 0.0}), DomainError);
  EXPECT_THROW(FnmParams(2, {0.5}, {}, {0.0, 0.0}), DomainError);
  EXPECT_THROW(FnmParams(0, {}, {}, {}), DomainError);
  EXPECT_NO_THROW(FnmParams(1, {}, {}, {0.3}));
  const FnmParams p = FnmParams::from_vector(3, {0.2, 0.3, 1.0, -0.5, 0.1, 0.2, 0.3});
  EXPECT_EQ(p.to_vector(), (std::vector<double>{0.2, 0.3, 1.0, -0.5, 0.1, 0.2, 0.3}));
  EXPECT_EQ(p.free_parameter_count(), 7);
  EXPECT_NEAR(p.weights()[2], 0.5, 1e-15);
}

TEST(FnmExpand, MeanPatterns) {
  auto c2 = expand(two(0.4, 0.45, 0.1, 0.2));
  ASSERT_EQ(c2.size(), 2u);
  EXPECT_EQ(c2[0].mean1, 1.0);
  EXPECT_EQ(c2[0].mean2, 0.45);
  EXPECT_EQ(c2[1].mean1, -1.0);
  EXPECT_EQ(c2[1].mean2, -0.45);

  auto c3 = expand(FnmParams(3, {0.2, 0.3}, {1.5, 1.5}, {0, 0, 0}));
  ASSERT_EQ(c3.size(), 3u);
  EXPECT_EQ(c3[0].mean1, 2.0);
  EXPECT_EQ(c3[0].mean2, 1.5);
  EXPECT_EQ(c3[1].mean1, -1.0);
  EXPECT_EQ(c3[1].mean2, 1.5);
  EXPECT_EQ(c3[2].mean1, -1.0);
  EXPECT_EQ(c3[2].mean2, -3.0);

  auto c1 = expand(FnmParams(1, {}, {}, {0.4}));
  ASSERT_EQ(c1.size(), 1u);
  EXPECT_EQ(c1[0].mean1, 0.0);
  EXPECT_EQ(c1[0].mean2, 0.0);
  EXPECT_EQ(c1[0].weight, 1.0);

  std::mt19937_64 rng(11);
  for (int K = 2; K <= 5; ++K) {
    const auto comps = expand(random_fnm_params(rng, K));
    double s1 = 0, s2 = 0;
    for (const auto& c : comps) { s1 += c.mean1; s2 += c.mean2; }
    EXPECT_NEAR(s1, 0.0, 1e-14);
    EXPECT_NEAR(s2, 0.0, 1e-14);
  }
}

TEST(FnmCovariance, ReducedFormulasMatchComponentMoments) {
  std::mt19937_64 rng(5);
  for (int K = 1; K <= 5; ++K) {
    for (int rep = 0; rep < 20; ++rep) {
      const FnmParams p = K == 1 ? FnmParams(1, {}, {}, {0.37}) : random_fnm_params(rng, K);
      const auto s = covariance_summary(p);
      const auto m = moments_from_components(p);
      EXPECT_NEAR(s.delta11, m.v1, 1e-12) << K;
      EXPECT_NEAR(s.delta22, m.v2, 1e-12) << K;
      EXPECT_NEAR(s.delta12, m.c12, 1e-12) << K;
      EXPECT_GT(s.delta11, 0);
      EXPECT_GT(s.delta22, 0);
      EXPECT_LE(std::abs(s.pearson_rho), 1.0);
    }
  }
}

TEST(FnmCovariance, PearsonExamples) {
  EXPECT_NEAR(pearson_rho(two(0.5, 0.0, 0.0, 0.0)), 0.0, 1e-15);
  for (double r : {-0.7, 0.3, 0.9}) {
    const auto s = covariance_summary(two(0.5, 0.0, r, r));
    EXPECT_NEAR(s.delta11, 2.0, 1e-15);
    EXPECT_NEAR(s.delta22, 1.0, 1e-15);
    EXPECT_NEAR(s.delta12, r, 1e-15);
    EXPECT_NEAR(s.pearson_rho, r / std::sqrt(2.0), 1e-15);
  }
  EXPECT_NEAR(monte_carlo_correlation(two(0.5, 0.0, 0.6, 0.6), 1000000, 3), 0.6 / std::sqrt(2.0), 0.005);
  std::mt19937_64 rng(8);
  for (int K = 2; K <= 3; ++K) {
    for (int rep = 0; rep < 3; ++rep) {
      const FnmParams p = random_fnm_params(rng, K);
      EXPECT_NEAR(monte_carlo_correlation(p, 1000000, 100 + rep), pearson_rho(p), 0.005);
    }
  }
}

TEST(FnmMargins, UnivariateCdfExamples) {
  const FnmCopula sym(two(0.5, 0.0, 0.2, 0.2));
  EXPECT_NEAR(sym.uni_cdf(0.0, 2), 0.5, 1e-15);
  EXPECT_NEAR(sym.uni_cdf(0.0, 1), 0.5, 1e-15);
  const FnmCopula asym(two(0.3, 0.0, 0.2, 0.2));
  const double expected = 0.3 * norm_cdf(-1.0) + 0.7 * norm_cdf(1.0);
  EXPECT_NEAR(asym.uni_cdf(0.0, 1), expected, 1e-15);
  EXPECT_NEAR(expected, 0.6365, 5e-5);
  // Monte Carlo oracle for the mixture margin.
  std::mt19937_64 rng(1);
  std::bernoulli_distribution first(0.3);
  std::normal_distribution<double> z;
  int below = 0;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) below += (first(rng) ? 1.0 : -1.0) + z(rng) <= 0.0;
  EXPECT_NEAR(static_cast<double>(below) / n, expected, 0.002);
  EXPECT_NEAR(asym.uni_cdf(1.3, 1) + asym.uni_sf(1.3, 1), 1.0, 1e-15);
}

TEST(FnmMargins, QuantileRoundTrip) {
  const FnmCopula sym(two(0.5, 0.0, 0.2, 0.2));
  EXPECT_NEAR(sym.uni_quantile(0.5, 1), 0.0, 1e-14);
  EXPECT_NEAR(sym.uni_quantile(0.5, 2), 0.0, 1e-14);
  const FnmCopula asym(two(0.3, 0.0, 0.2, 0.2));
  EXPECT_NEAR(asym.uni_quantile(asym.uni_cdf(0.0, 1), 1), 0.0, 1e-10);
  std::mt19937_64 rng(2);
  for (int K = 1; K <= 4; ++K) {
    const FnmCopula cop(K == 1 ? FnmParams(1, {}, {}, {0.5}) : random_fnm_params(rng, K));
    for (int dim : {1, 2}) {
      for (int i = 1; i <= 99; ++i) {
        const double p = i / 100.0;
        EXPECT_NEAR(cop.uni_cdf(cop.uni_quantile(p, dim), dim), p, 1e-12) << K << " " << p;
      }
      for (double p : {1e-300, 1e-12, 1e-6}) {
        const double y = cop.uni_quantile(p, dim);
        EXPECT_NEAR(cop.uni_cdf(y, dim) / p, 1.0, 1e-10) << p;
      }
      for (double p : {1e-12, 1e-6}) {
        const double yu = cop.uni_quantile(1.0 - p, dim);
        EXPECT_NEAR(cop.uni_sf(yu, dim) / (1.0 - (1.0 - p)), 1.0, 1e-10) << p;
      }
    }
  }
  EXPECT_THROW(asym.uni_quantile(0.0, 1), DomainError);
  EXPECT_THROW(asym.uni_quantile(1.0, 1), DomainError);
  EXPECT_THROW(asym.uni_quantile(0.5, 3), DomainError);
}

TEST(FnmBivariate, DegenerateAndFactorized) {
  const FnmCopula k1(FnmParams(1, {}, {}, {0.6}));
  for (double a : {-2.0, -0.3, 0.0, 1.1})
    for (double b : {-1.5, 0.2, 2.4}) EXPECT_DOUBLE_EQ(k1.biv_cdf(a, b), bvn_cdf(a, b, Correlation(0.6)));
  const FnmCopula fac(two(0.3, 0.0, 0.0, 0.0));
  for (double a : {-2.0, -0.3, 0.0, 1.1})
    for (double b : {-1.5, 0.2, 2.4})
      EXPECT_NEAR(fac.biv_pdf(a, b), fac.uni_pdf(a, 1) * norm_pdf(b), 1e-15);
  const FnmCopula gen(FnmParams(3, {0.2, 0.3}, {1.0, -0.4}, {0.5, -0.2, 0.8}));
  EXPECT_NEAR(gen.biv_cdf(38, 38), 1.0, 1e-12);
}

TEST(FnmCopulaCdf, BoundariesAndClosedForms) {
  const FnmCopula gen(FnmParams(3, {0.2, 0.3}, {1.0, -0.4}, {0.5, -0.2, 0.8}));
  EXPECT_EQ(gen.cdf(0.0, 0.7), 0.0);
  EXPECT_EQ(gen.cdf(0.7, 0.0), 0.0);
  EXPECT_EQ(gen.cdf(1.0, 0.7), 0.7);
  EXPECT_EQ(gen.cdf(0.7, 1.0), 0.7);
  for (double pi : {0.1, 0.5, 0.8}) {
    const FnmCopula ind(two(pi, 0.0, 0.0, 0.0));
    for (double a : {0.05, 0.4, 0.9})
      for (double b : {0.1, 0.5, 0.97}) EXPECT_NEAR(ind.cdf(a, b), a * b, 1e-14);
  }
  const FnmCopula k1(FnmParams(1, {}, {}, {0.5}));
  EXPECT_NEAR(k1.cdf(0.5, 0.5), 1.0 / 3.0, 1e-14);
}

TEST(FnmCopulaPdf, IndependenceIsFlat) {
  for (int K : {1, 2, 3, 4}) {
    const FnmCopula ind(FnmParams::independence(K));
    for (double a : {1e-9, 0.01, 0.3, 0.5, 0.77, 0.999999})
      for (double b : {1e-6, 0.2, 0.5, 0.95}) EXPECT_NEAR(ind.pdf(a, b), 1.0, 1e-10) << K;
  }
  const FnmCopula ind2(two(0.3, 0.0, 0.0, 0.0));
  EXPECT_NEAR(ind2.pdf(0.13, 0.71), 1.0, 1e-10);
  EXPECT_THROW(ind2.pdf(0.0, 0.5), DomainError);
  EXPECT_THROW(ind2.pdf(0.5, 1.0), DomainError);
}

TEST(FnmCopulaPdf, ProductQuadratureNormalization) {
  const FnmCopula cop(two(0.5, 0.451, 0.647, 0.647));
  // 50-point product rule on normal scores over [-8, 8]^2; a product rule
  // directly on the unit square only reaches ~1e-5 because of the corner
  // singularities.
  const QuadratureRule rule = gl_rule(50);
  double total = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    for (std::size_t j = 0; j < rule.size(); ++j) {
      const double z1 = -8.0 + 16.0 * rule.nodes[i], z2 = -8.0 + 16.0 * rule.nodes[j];
      total += 256.0 * rule.weights[i] * rule.weights[j] * cop.pdf(norm_cdf(z1), norm_cdf(z2)) *
               norm_pdf(z1) * norm_pdf(z2);
    }
  }
  EXPECT_NEAR(total, 1.0, 1e-6);
  EXPECT_NEAR(test_support::copula_mass(cop), 1.0, 1e-6);
}

TEST(FnmCopulaPdf, ReflectionSymmetry) {
  for (double r : {-0.6, 0.2, 0.85}) {
    const FnmCopula cop(two(0.5, 0.0, r, r));
    for (double a : {0.01, 0.2, 0.45, 0.8})
      for (double b : {0.03, 0.5, 0.66, 0.99})
        EXPECT_NEAR(cop.pdf(a, b), cop.pdf(1.0 - a, 1.0 - b), 1e-10 * std::max(1.0, cop.pdf(a, b)));
  }
}

TEST(FnmCopulaPdf, UniformMargins) {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 6; ++i) {
    const FnmCopula cop(random_fnm_params(rng, 2 + i % 2));
    for (double u1 : {0.03, 0.5, 0.91}) EXPECT_NEAR(marginal_mass(cop, u1), 1.0, 1e-8) << cop.name();
  }
}

TEST(FnmCopulaPdf, MatchesBvnFamilyWhenKIsOne) {
  for (double r : {-0.8, 0.0, 0.35, 0.95}) {
    const FnmCopula k1(FnmParams(1, {}, {}, {r}));
    const FamilyCopula bvn(make_bvn(r));
    for (double a : {1e-6, 0.1, 0.5, 0.73, 0.999})
      for (double b : {0.02, 0.5, 0.9}) {
        EXPECT_NEAR(k1.log_pdf(a, b), bvn.log_pdf(a, b), 1e-12);
        EXPECT_NEAR(k1.pdf(a, b), bvn.pdf(a, b), 1e-12 * std::max(1.0, bvn.pdf(a, b)));
      }
  }
}

TEST(FnmCopulaCdf, FrechetBoundsAndTwoIncreasing) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int s = 0; s < 5; ++s) {
    const FnmCopula cop(random_fnm_params(rng, 2 + s % 3));
    for (int i = 0; i < 400; ++i) {
      double a1 = u(rng), b1 = u(rng), a2 = u(rng), b2 = u(rng);
      if (a1 > b1) std::swap(a1, b1);
      if (a2 > b2) std::swap(a2, b2);
      const double c = cop.cdf(a1, a2);
      EXPECT_GE(c, std::max(a1 + a2 - 1.0, 0.0) - 1e-14);
      EXPECT_LE(c, std::min(a1, a2) + 1e-14);
      const double vol = cop.cdf(b1, b2) - cop.cdf(a1, b2) - cop.cdf(b1, a2) + c;
      EXPECT_GE(vol, -1e-13);
    }
  }
}

TEST(FnmConditional, MatchesNumericDerivativeAndInverts) {
  std::mt19937_64 rng(41);
  for (int s = 0; s < 4; ++s) {
    const FnmCopula cop(random_fnm_params(rng, 2 + s % 2));
    for (double u1 : {0.05, 0.3, 0.6, 0.92}) {
      for (double u2 : {0.1, 0.5, 0.85}) {
        const double e = 1e-5;
        const double num = (cop.cdf(u1 + e, u2) - cop.cdf(u1 - e, u2)) / (2 * e);
        EXPECT_NEAR(cop.h(u2, u1), num, 1e-7);
      }
      for (int i = 1; i <= 9; ++i) {
        const double q = i / 10.0;
        EXPECT_NEAR(cop.h(cop.h_inverse(q, u1), u1), q, 1e-10);
      }
      for (double q : {1e-8, 1.0 - 1e-8}) EXPECT_NEAR(cop.h(cop.h_inverse(q, u1), u1), q, 1e-10);
    }
  }
}

TEST(FnmSample, DeterministicUniformMargins) {
  const FnmCopula cop(two(0.3, 0.0, 0.8, -0.8));
  const auto a = cop.sample(100000, 77);
  EXPECT_EQ(a, cop.sample(100000, 77));
  EXPECT_NE(a, cop.sample(100000, 78));
  std::vector<double> x, y;
  for (const auto& [u1, u2] : a) {
    x.push_back(u1);
    y.push_back(u2);
    ASSERT_GT(u1, 0.0);
    ASSERT_LT(u1, 1.0);
  }
  const double crit = 1.628 / std::sqrt(100000.0);  // KS, level 0.01
  EXPECT_LT(test_support::ks_uniform(x), crit);
  EXPECT_LT(test_support::ks_uniform(y), crit);
}

TEST(FnmSample, BinnedCountsMatchCopulaProbabilities) {
  const FnmCopula cop(two(0.3, 0.0, 0.8, -0.8));
  const std::size_t n = 100000;
  const auto s = cop.sample(n, 2024);
  std::vector<double> counts(100, 0.0);
  for (const auto& [u1, u2] : s) {
    const int i = std::min(9, static_cast<int>(u1 * 10)), j = std::min(9, static_cast<int>(u2 * 10));
    counts[static_cast<std::size_t>(i * 10 + j)] += 1.0;
  }
  double chi2 = 0.0;
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) {
      const double a1 = i / 10.0, b1 = (i + 1) / 10.0, a2 = j / 10.0, b2 = (j + 1) / 10.0;
      const double p = cop.cdf(b1, b2) - cop.cdf(a1, b2) - cop.cdf(b1, a2) + cop.cdf(a1, a2);
      const double e = p * static_cast<double>(n);
      const double d = counts[static_cast<std::size_t>(i * 10 + j)] - e;
      chi2 += d * d / e;
    }
  }
  const double crit = boost::math::quantile(boost::math::complement(boost::math::chi_squared(99), 0.001));
  EXPECT_LT(chi2, crit);
}
