#include <gtest/gtest.h>

#include <cmath>
#include <memory>

#include "fnmcop/discrete_kl.hpp"
#include "fnmcop/errors.hpp"
#include "fnmcop/families.hpp"
#include "fnmcop/fnm.hpp"
#include "fnmcop/gauss.hpp"
#include "fnmcop/kl.hpp"
#include "fnmcop/quadrature.hpp"
#include "reference_tables.hpp"

using namespace fnmcop;

namespace {

OrdinalSpec probit_binary() {
  OrdinalSpec s;
  s.categories = 2;
  s.cutpoints = {0.0};
  s.beta1 = s.beta2 = 1.0;
  s.link = Link::probit;
  s.grid = {0.0};
  return s;
}

}  // namespace

TEST(Ordinal, BinaryProbitAtZero) { EXPECT_DOUBLE_EQ(ordinal_pmf(0, 0.0, probit_binary(), 1), 0.5); }

TEST(Ordinal, ZeroSlopeIgnoresCovariate) {
  auto s = OrdinalSpec::equally_weighted(4, 5, 0.0, 0.0);
  for (int y = 0; y < 4; ++y) EXPECT_DOUBLE_EQ(ordinal_pmf(y, -1.0, s, 1), ordinal_pmf(y, 1.0, s, 1));
}

TEST(Ordinal, EquallyWeightedCategories) {
  for (auto link : {Link::probit, Link::logit}) {
    const auto s = OrdinalSpec::equally_weighted(3, 5, 1.0, 0.7, link);
    for (int y = 0; y < 3; ++y) {
      EXPECT_NEAR(ordinal_pmf(y, 0.0, s, 1), 1.0 / 3.0, 1e-12);
      EXPECT_NEAR(ordinal_pmf(y, 0.0, s, 2), 1.0 / 3.0, 1e-12);
    }
  }
  const auto s = OrdinalSpec::equally_weighted(3, 5, 1.0, 0.7, Link::probit);
  EXPECT_NEAR(s.cutpoints[0], norm_quantile(1.0 / 3.0), 1e-14);
  EXPECT_EQ(s.grid, (std::vector<double>{-1.0, -0.5, 0.0, 0.5, 1.0}));
}

TEST(Ordinal, PmfSumsToOne) {
  const auto s = OrdinalSpec::equally_weighted(5, 5);
  for (double x : s.grid) {
    double t = 0.0;
    for (int y = 0; y < 5; ++y) t += ordinal_pmf(y, x, s, 2);
    EXPECT_NEAR(t, 1.0, 1e-14);
  }
}

TEST(Ordinal, ValidationAndRanges) {
  auto s = OrdinalSpec::equally_weighted(3, 5);
  EXPECT_THROW(ordinal_pmf(3, 0.0, s, 1), DomainError);
  EXPECT_THROW(ordinal_pmf(0, 0.0, s, 3), DomainError);
  s.cutpoints = {0.5, 0.1};
  EXPECT_THROW(s.validate(), DomainError);
  EXPECT_THROW(OrdinalSpec::equally_weighted(1, 5), DomainError);
  EXPECT_THROW(link_quantile(Link::logit, 1.0), DomainError);
}

TEST(BivariatePmf, IndependenceFactorizes) {
  const auto s = OrdinalSpec::equally_weighted(4, 5);
  const FnmCopula indep(FnmParams::independence(2));
  for (double x : {-1.0, 0.5})
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        EXPECT_NEAR(biv_pmf(a, b, x, s, indep), ordinal_pmf(a, x, s, 1) * ordinal_pmf(b, x, s, 2), 1e-12);
}

TEST(BivariatePmf, NearComonotoneGaussianConcentratesOnDiagonal) {
  const FamilyCopula c(make_bvn(0.999));
  const auto s = probit_binary();
  EXPECT_LT(biv_pmf(0, 1, 0.0, s, c) + biv_pmf(1, 0, 0.0, s, c), 0.05);
}

TEST(BivariatePmf, TablesSumToOneWithOrdinalMargins) {
  const auto s = OrdinalSpec::equally_weighted(5, 5);
  std::vector<std::unique_ptr<Copula>> cops;
  cops.push_back(std::make_unique<FamilyCopula>(make_clayton(3.0)));
  cops.push_back(std::make_unique<FamilyCopula>(survival(make_gumbel(2.0))));
  cops.push_back(std::make_unique<FnmCopula>(FnmParams(2, {0.3}, {0.4}, {0.8, -0.5})));
  for (const auto& c : cops) {
    const auto t = pmf_table(s, *c);
    for (std::size_t k = 0; k < t.x.size(); ++k) {
      const auto& P = t.pmf[k];
      EXPECT_NEAR(P.sum(), 1.0, 1e-12) << c->name();
      EXPECT_GE(P.minCoeff(), 0.0);
      for (int y = 0; y < 5; ++y) {
        EXPECT_NEAR(P.row(y).sum(), ordinal_pmf(y, t.x[k], s, 1), 1e-12);
        EXPECT_NEAR(P.col(y).sum(), ordinal_pmf(y, t.x[k], s, 2), 1e-12);
      }
    }
  }
}

TEST(DiscreteKl, ZeroExactlyWhenModelsAgree) {
  const auto s = OrdinalSpec::equally_weighted(3, 5);
  const FamilyCopula c(make_clayton(2.0));
  EXPECT_EQ(kl_discrete(s, c, c), 0.0);
  // Any perturbation of the copula parameter gives a strictly positive value.
  EXPECT_GT(kl_discrete(s, c, FamilyCopula(make_clayton(2.05))), 0.0);
  EXPECT_GT(kl_discrete(s, c, FamilyCopula(make_clayton(1.95))), 0.0);
}

TEST(DiscreteKl, AverageAndSumConventions) {
  const auto s = OrdinalSpec::equally_weighted(3, 5);
  const auto m = kl_discrete_moments(pmf_table(s, FamilyCopula(make_clayton(2.0))),
                                     pmf_table(s, FnmCopula(FnmParams::independence(2))));
  EXPECT_NEAR(m.kl_sum, 5.0 * m.kl, 1e-15);
  EXPECT_GE(m.sigma2, 0.0);
}

TEST(DiscreteKl, DivergenceIsAnError) {
  DiscretePmfTable f, g;
  f.x = g.x = {0.0};
  f.pmf = {Eigen::MatrixXd::Constant(2, 2, 0.25)};
  Eigen::MatrixXd G(2, 2);
  G << 0.5, 0.0, 0.0, 0.5;
  g.pmf = {G};
  EXPECT_THROW(kl_discrete_moments(f, g), NumericError);
}

TEST(DiscreteKlMinimize, IndependenceTarget) {
  const auto s = OrdinalSpec::equally_weighted(3, 5);
  KlOptions o;
  o.n_starts = 2;
  const auto r = kl_discrete_minimize(make_bvn(0.0), s, 2, o);
  EXPECT_NEAR(r.kl, 0.0, 1e-8);
  EXPECT_NEAR(pearson_rho(*r.fnm), 0.0, 5e-3);
}

TEST(DiscreteKlMinimize, FiveCategoryClaytonBlockAndGrowthInCategories) {
  const auto s5 = OrdinalSpec::equally_weighted(5, 5);
  const auto s2 = OrdinalSpec::equally_weighted(2, 5);
  KlOptions o;
  o.n_starts = 4;
  std::vector<CopulaFamily> targets;
  for (double tau : {0.1, 0.5, 0.9}) targets.push_back(make_clayton(tau_to_param(FamilyTag::clayton, tau)));
  const auto r5 = kl_discrete_table(targets, s5, 2, o);
  const auto r2 = kl_discrete_table(targets, s2, 2, o);
  const auto& ref = reference::discrete_rows();
  for (std::size_t i = 0; i < 3; ++i) {
    ASSERT_TRUE(r5[i].error.empty()) << r5[i].error;
    ASSERT_TRUE(r2[i].error.empty()) << r2[i].error;
    EXPECT_EQ(r5[i].categories, 5);
    const double printed = ref[3 + i].kl_x1000;
    EXPECT_GT(1e3 * r5[i].kl, printed / 2.0);
    EXPECT_LT(1e3 * r5[i].kl, printed * 2.0);
    EXPECT_GT(r5[i].kl, r2[i].kl);
  }
}

TEST(DiscreteKlMinimize, DiscreteSampleSizesExceedContinuousOnes) {
  const auto s = OrdinalSpec::equally_weighted(5, 5);
  KlOptions o;
  o.n_starts = 3;
  const auto target = make_clayton(tau_to_param(FamilyTag::clayton, 0.5));
  const auto d = kl_discrete_minimize(target, s, 2, o);
  const auto c = kl_minimize(target, 2, gl_rule(15), o);
  EXPECT_GT(d.sample_size, c.sample_size);
}
