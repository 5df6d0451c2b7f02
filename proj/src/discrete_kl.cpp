#include "fnmcop/discrete_kl.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "fnmcop/errors.hpp"
#include "fnmcop/estimation.hpp"
#include "fnmcop/gauss.hpp"
#include "fnmcop/parallel.hpp"

namespace fnmcop {

double link_cdf(Link link, double z) {
  if (link == Link::probit) return norm_cdf(z);
  return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

double link_quantile(Link link, double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("link quantile needs p in (0, 1)");
  return link == Link::probit ? norm_quantile(p) : std::log(p) - std::log1p(-p);
}

OrdinalSpec OrdinalSpec::equally_weighted(int categories, int grid_size, double beta1, double beta2, Link link) {
  if (categories < 2) throw DomainError("ordinal model needs at least two categories");
  if (grid_size < 1) throw DomainError("covariate grid needs at least one value");
  OrdinalSpec s;
  s.categories = categories;
  s.beta1 = beta1;
  s.beta2 = beta2;
  s.link = link;
  for (int y = 1; y < categories; ++y) s.cutpoints.push_back(link_quantile(link, static_cast<double>(y) / categories));
  if (grid_size == 1) {
    s.grid = {0.0};
  } else {
    for (int i = 0; i < grid_size; ++i)
      s.grid.push_back(static_cast<double>(2 * i - (grid_size - 1)) / static_cast<double>(grid_size - 1));
  }
  return s;
}

void OrdinalSpec::validate() const {
  if (categories < 2) throw DomainError("ordinal model needs at least two categories");
  if (static_cast<int>(cutpoints.size()) != categories - 1)
    throw DomainError("ordinal model needs categories - 1 cutpoints");
  for (std::size_t i = 0; i < cutpoints.size(); ++i) {
    if (!std::isfinite(cutpoints[i])) throw DomainError("cutpoints must be finite");
    if (i > 0 && !(cutpoints[i] > cutpoints[i - 1])) throw DomainError("cutpoints must be strictly increasing");
  }
  if (grid.empty()) throw DomainError("covariate grid is empty");
  if (!std::isfinite(beta1) || !std::isfinite(beta2)) throw DomainError("slopes must be finite");
}

std::vector<double> OrdinalSpec::cumulative(double x, int margin) const {
  if (margin != 1 && margin != 2) throw DomainError("margin index must be 1 or 2");
  const double beta = margin == 1 ? beta1 : beta2;
  std::vector<double> c(static_cast<std::size_t>(categories) + 1);
  c.front() = 0.0;
  c.back() = 1.0;
  for (int y = 1; y < categories; ++y) c[static_cast<std::size_t>(y)] = link_cdf(link, cutpoints[static_cast<std::size_t>(y - 1)] + beta * x);
  return c;
}

double ordinal_pmf(int y, double x, const OrdinalSpec& spec, int margin) {
  if (y < 0 || y >= spec.categories) throw DomainError("category out of range");
  const auto c = spec.cumulative(x, margin);
  return c[static_cast<std::size_t>(y) + 1] - c[static_cast<std::size_t>(y)];
}

namespace {

Eigen::MatrixXd rectangle_matrix(const std::vector<double>& c1, const std::vector<double>& c2, const Copula& cop,
                                 double x) {
  const Eigen::Index m = static_cast<Eigen::Index>(c1.size());
  Eigen::MatrixXd C(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) C(i, j) = cop.cdf(c1[static_cast<std::size_t>(i)], c2[static_cast<std::size_t>(j)]);
  Eigen::MatrixXd P(m - 1, m - 1);
  for (Eigen::Index i = 0; i + 1 < m; ++i) {
    for (Eigen::Index j = 0; j + 1 < m; ++j) {
      double v = C(i + 1, j + 1) - C(i, j + 1) - C(i + 1, j) + C(i, j);
      if (v < -1e-12) {
        std::ostringstream msg;
        msg << cop.name() << " gives a negative rectangle probability " << v << " at x = " << x << ", cell (" << i
            << ", " << j << ")";
        throw NumericError(msg.str());
      }
      P(i, j) = std::max(v, 0.0);
    }
  }
  return P;
}

}  // namespace

double biv_pmf(int y1, int y2, double x, const OrdinalSpec& spec, const Copula& cop) {
  if (y1 < 0 || y1 >= spec.categories || y2 < 0 || y2 >= spec.categories) throw DomainError("category out of range");
  const auto c1 = spec.cumulative(x, 1), c2 = spec.cumulative(x, 2);
  const auto a = static_cast<std::size_t>(y1), b = static_cast<std::size_t>(y2);
  const double v = cop.cdf(c1[a + 1], c2[b + 1]) - cop.cdf(c1[a], c2[b + 1]) - cop.cdf(c1[a + 1], c2[b]) +
                   cop.cdf(c1[a], c2[b]);
  if (v < -1e-12) throw NumericError("negative rectangle probability from " + cop.name());
  return std::max(v, 0.0);
}

DiscretePmfTable pmf_table(const OrdinalSpec& spec, const Copula& cop) {
  spec.validate();
  DiscretePmfTable t;
  t.x = spec.grid;
  for (double x : spec.grid) t.pmf.push_back(rectangle_matrix(spec.cumulative(x, 1), spec.cumulative(x, 2), cop, x));
  return t;
}

DiscreteKlMoments kl_discrete_moments(const DiscretePmfTable& f, const DiscretePmfTable& g) {
  if (f.pmf.size() != g.pmf.size()) throw DomainError("pmf tables have different covariate grids");
  double kl = 0.0, m2 = 0.0;
  for (std::size_t k = 0; k < f.pmf.size(); ++k) {
    const auto& F = f.pmf[k];
    const auto& G = g.pmf[k];
    if (F.rows() != G.rows() || F.cols() != G.cols()) throw DomainError("pmf tables have different category counts");
    for (Eigen::Index i = 0; i < F.rows(); ++i) {
      for (Eigen::Index j = 0; j < F.cols(); ++j) {
        if (F(i, j) <= 0.0) continue;
        if (!(G(i, j) > 0.0)) {
          std::ostringstream msg;
          msg << "KL diverges: g = 0 where f > 0 at x = " << f.x[k] << ", cell (" << i << ", " << j << ")";
          throw NumericError(msg.str());
        }
        const double d = std::log(F(i, j) / G(i, j));
        kl += F(i, j) * d;
        m2 += F(i, j) * d * d;
      }
    }
  }
  const double nx = static_cast<double>(f.pmf.size());
  const double mean = kl / nx;
  return {mean, kl, std::max(0.0, m2 / nx - mean * mean)};
}

double kl_discrete(const OrdinalSpec& spec, const Copula& f, const Copula& g) {
  return kl_discrete_moments(pmf_table(spec, f), pmf_table(spec, g)).kl;
}

double discrete_sample_size(const DiscreteKlMoments& m, SampleSizeForm form) {
  return kl_sample_size(m.kl, m.sigma2, form);
}

namespace {

constexpr double kDiscreteScale = 1e3;

struct StartRun {
  bool ok = false;
  OptimResult opt;
  std::string error;
};

}  // namespace

KlReport kl_discrete_minimize(const CopulaFamily& target, const OrdinalSpec& spec, int K, const KlOptions& options) {
  if (K < 1) throw DomainError("kl_discrete_minimize: K must be at least 1");
  if (options.n_starts < 1) throw DomainError("kl_discrete_minimize: need at least one start");
  validate(target);
  spec.validate();
  const auto f = pmf_table(spec, FamilyCopula(target));
  const auto objective = [&](const Eigen::VectorXd& z) {
    try {
      return kDiscreteScale * kl_discrete_moments(f, pmf_table(spec, FnmCopula(fnm_from_free(K, z)))).kl;
    } catch (const DomainError&) {
      return std::numeric_limits<double>::infinity();
    } catch (const NumericError&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  std::vector<StartRun> runs(static_cast<std::size_t>(options.n_starts));
  parallel_for(runs.size(), [&](std::size_t i) {
    try {
      const auto x0 =
          fnm_to_free(i == 0 ? symmetric_start(K) : fnm_start(K, static_cast<int>(i), options.n_starts, options.seed));
      runs[i].opt = bfgs_minimize(objective, x0, options.optim);
      runs[i].ok = std::isfinite(runs[i].opt.value);
    } catch (const std::exception& e) {
      runs[i].error = e.what();
    }
  });
  int best = -1;
  for (std::size_t i = 0; i < runs.size(); ++i)
    if (runs[i].ok && (best < 0 || runs[i].opt.value < runs[static_cast<std::size_t>(best)].opt.value - 1e-12))
      best = static_cast<int>(i);
  if (best < 0) {
    std::ostringstream msg;
    msg << "discrete KL minimization for " << display_name(target) << " failed at every start";
    for (std::size_t i = 0; i < runs.size(); ++i) msg << "; start " << i << ": " << runs[i].error;
    throw OptimizationError(msg.str());
  }

  const auto& opt = runs[static_cast<std::size_t>(best)].opt;
  KlReport r;
  r.target = target;
  r.K = K;
  r.categories = spec.categories;
  describe_target(r);
  r.fnm = fnm_from_free(K, opt.x);
  const auto m = kl_discrete_moments(f, pmf_table(spec, FnmCopula(*r.fnm)));
  r.kl = m.kl;
  r.sigma2 = m.sigma2;
  r.sample_size = m.kl > 0.0 ? discrete_sample_size(m, options.form)
                             : std::numeric_limits<double>::quiet_NaN();
  r.converged = opt.converged;
  r.gradient_norm = opt.gradient_norm;
  r.starts = options.n_starts;
  return r;
}

std::vector<KlReport> kl_discrete_table(const std::vector<CopulaFamily>& targets, const OrdinalSpec& spec, int K,
                                        const KlOptions& options) {
  std::vector<KlReport> out(targets.size());
  parallel_for(targets.size(), [&](std::size_t i) {
    KlOptions row = options;
    row.seed = derive_seed(options.seed, kl_task_key(targets[i], K, spec.categories));
    try {
      out[i] = kl_discrete_minimize(targets[i], spec, K, row);
    } catch (const std::exception& e) {
      KlReport r;
      r.target = targets[i];
      r.K = K;
      r.categories = spec.categories;
      try {
        describe_target(r);
      } catch (const std::exception&) {
      }
      r.kl = r.sigma2 = r.sample_size = std::numeric_limits<double>::quiet_NaN();
      r.error = e.what();
      out[i] = std::move(r);
    }
  });
  return out;
}

}  // namespace fnmcop
