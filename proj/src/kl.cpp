#include "fnmcop/kl.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "fnmcop/errors.hpp"
#include "fnmcop/estimation.hpp"
#include "fnmcop/gauss.hpp"
#include "fnmcop/parallel.hpp"

namespace fnmcop {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
// KL values are O(1e-3); the optimizer works on this multiple of them.
constexpr double kObjectiveScale = 1e3;
}  // namespace

KlTarget::KlTarget(const Copula& c1, const QuadratureRule& rule) {
  const std::size_t nq = rule.size();
  u1_.reserve(nq * nq);
  u2_.reserve(nq * nq);
  w_.reserve(nq * nq);
  log_c1_.reserve(nq * nq);
  for (std::size_t i = 0; i < nq; ++i) {
    for (std::size_t j = 0; j < nq; ++j) {
      const double a = rule.nodes[i];
      const double b = c1.h_inverse(rule.nodes[j], a);
      const double lc = c1.log_pdf(a, b);
      if (!std::isfinite(lc)) {
        std::ostringstream msg;
        msg << c1.name() << " log density is not finite at node (" << a << ", " << b << ")";
        throw NumericError(msg.str());
      }
      u1_.push_back(a);
      u2_.push_back(b);
      w_.push_back(rule.weights[i] * rule.weights[j]);
      log_c1_.push_back(lc);
    }
  }
}

KlMoments KlTarget::reduce(const std::vector<double>& log_c2) const {
  double m1 = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < w_.size(); ++i) {
    const double d = log_c1_[i] - log_c2[i];
    if (!std::isfinite(d)) {
      std::ostringstream msg;
      msg << "log density ratio is not finite at node (" << u1_[i] << ", " << u2_[i] << ")";
      throw NumericError(msg.str());
    }
    m1 += w_[i] * d;
    m2 += w_[i] * d * d;
  }
  return {m1, std::max(0.0, m2 - m1 * m1)};
}

KlMoments KlTarget::moments(const Copula& c2) const {
  std::vector<double> lc(w_.size());
  for (std::size_t i = 0; i < w_.size(); ++i) lc[i] = c2.log_pdf(u1_[i], u2_[i]);
  return reduce(lc);
}

KlMoments KlTarget::moments_fnm(const FnmParams& params) const {
  const FnmCopula cop(params);
  const auto q1 = cop.uni_quantiles(u1_, 1);
  const auto q2 = cop.uni_quantiles(u2_, 2);
  std::vector<double> lc(w_.size());
  for (std::size_t i = 0; i < w_.size(); ++i) lc[i] = cop.log_pdf_latent(q1[i], q2[i]);
  return reduce(lc);
}

KlMoments kl_moments(const Copula& c1, const Copula& c2, const QuadratureRule& rule) {
  return KlTarget(c1, rule).moments(c2);
}

double kl_sample_size(double kl, double sigma2, SampleSizeForm form) {
  if (!(kl > 0.0)) throw DomainError("KL sample size needs a positive KL distance");
  if (!(sigma2 >= 0.0)) throw DomainError("KL sample size needs a nonnegative variance");
  const double z = norm_quantile(0.95);
  const double ratio = std::sqrt(sigma2) / kl;
  return form == SampleSizeForm::printed ? z * ratio * ratio : (z * ratio) * (z * ratio);
}

// Equal weights, zero means and equal small correlations; the optimizer then
// stays on the reflection-symmetric subspace when the target is radially symmetric.
FnmParams symmetric_start(int K) {
  const auto k = static_cast<std::size_t>(K);
  return FnmParams(K, std::vector<double>(k - 1, 1.0 / K), std::vector<double>(k - 1, 0.0),
                   std::vector<double>(k, 1e-3));
}

std::string kl_task_key(const CopulaFamily& t, int K, int categories) {
  char key[192];
  std::snprintf(key, sizeof key, "%s|%.17g|%.17g|%.17g|K=%d|Y=%d", display_name(t).c_str(), t.theta, t.delta, t.nu, K,
                categories);
  return key;
}

void describe_target(KlReport& r) {
  r.tau = tau_of(r.target);
  const auto tails = lambda_of(r.target);
  r.lambda_L = tails.lambda_L;
  r.lambda_U = tails.lambda_U;
}

namespace {

struct StartRun {
  bool ok = false;
  OptimResult opt;
  std::string error;
};

double set_sample_size(const KlReport& r, SampleSizeForm form) {
  return r.kl > 0.0 ? kl_sample_size(r.kl, r.sigma2, form) : kNaN;
}

}  // namespace

KlReport kl_minimize(const CopulaFamily& target, int K, const QuadratureRule& rule, const KlOptions& options) {
  if (K < 1) throw DomainError("kl_minimize: K must be at least 1");
  if (options.n_starts < 1) throw DomainError("kl_minimize: need at least one start");
  validate(target);
  const KlTarget tgt(FamilyCopula(target), rule);
  const auto objective = [&](const Eigen::VectorXd& z) {
    try {
      return kObjectiveScale * tgt.moments_fnm(fnm_from_free(K, z)).kl;
    } catch (const DomainError&) {
      return std::numeric_limits<double>::infinity();
    } catch (const NumericError&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  std::vector<StartRun> runs(static_cast<std::size_t>(options.n_starts));
  parallel_for(runs.size(), [&](std::size_t i) {
    try {
      const auto x0 = fnm_to_free(i == 0 ? symmetric_start(K) : fnm_start(K, static_cast<int>(i), options.n_starts, options.seed));
      runs[i].opt = bfgs_minimize(objective, x0, options.optim);
      runs[i].ok = std::isfinite(runs[i].opt.value);
    } catch (const std::exception& e) {
      runs[i].error = e.what();
    }
  });

  const KlTarget fine(FamilyCopula(target), gl_rule(options.refine_nq ? options.refine_nq : 2 * rule.size() + 1));
  std::vector<double> refined(runs.size(), std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (!runs[i].ok) continue;
    try {
      refined[i] = fine.moments_fnm(fnm_from_free(K, runs[i].opt.x)).kl;
    } catch (const std::exception& e) {
      runs[i].ok = false;
      runs[i].error = e.what();
    }
  }
  int best = -1;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (!runs[i].ok) continue;
    if (best < 0 || refined[i] < refined[static_cast<std::size_t>(best)] - 1e-12) best = static_cast<int>(i);
  }
  if (best > 0 && runs[0].ok && refined[0] <= refined[static_cast<std::size_t>(best)] + options.default_margin)
    best = 0;
  if (best < 0) {
    std::ostringstream msg;
    msg << "KL minimization for " << display_name(target) << " failed at every start";
    for (std::size_t i = 0; i < runs.size(); ++i) msg << "; start " << i << ": " << runs[i].error;
    throw OptimizationError(msg.str());
  }

  const auto& opt = runs[static_cast<std::size_t>(best)].opt;
  KlReport r;
  r.target = target;
  r.K = K;
  describe_target(r);
  r.fnm = fnm_from_free(K, opt.x);
  const auto m = tgt.moments_fnm(*r.fnm);
  r.kl = m.kl;
  r.sigma2 = m.sigma2;
  r.sample_size = set_sample_size(r, options.form);
  r.converged = opt.converged;
  r.gradient_norm = opt.gradient_norm;
  r.starts = options.n_starts;
  return r;
}

std::vector<KlReport> kl_table(const std::vector<CopulaFamily>& targets, int K, const QuadratureRule& rule,
                               const KlOptions& options) {
  std::vector<KlReport> out(targets.size());
  parallel_for(targets.size(), [&](std::size_t i) {
    KlOptions row = options;
    row.seed = derive_seed(options.seed, kl_task_key(targets[i], K));
    try {
      out[i] = kl_minimize(targets[i], K, rule, row);
    } catch (const std::exception& e) {
      KlReport r;
      r.target = targets[i];
      r.K = K;
      try {
        describe_target(r);
      } catch (const std::exception&) {
        r.tau = r.lambda_L = r.lambda_U = kNaN;
      }
      r.kl = r.sigma2 = r.sample_size = kNaN;
      r.error = e.what();
      out[i] = std::move(r);
    }
  });
  return out;
}

std::vector<KlReport> kl_table(FamilyTag tag, const std::vector<double>& taus, int K, const QuadratureRule& rule,
                               const KlOptions& options, bool survival) {
  std::vector<CopulaFamily> targets;
  targets.reserve(taus.size());
  for (double tau : taus) {
    CopulaFamily f{tag, tau_to_param(tag, tau), 0.0, 0.0, survival};
    targets.push_back(f);
  }
  return kl_table(targets, K, rule, options);
}

}  // namespace fnmcop
