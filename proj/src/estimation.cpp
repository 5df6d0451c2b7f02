#include "fnmcop/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "fnmcop/errors.hpp"
#include "fnmcop/gauss.hpp"
#include "fnmcop/parallel.hpp"

namespace fnmcop {

std::vector<double> rank_scores(const std::vector<double>& column) {
  const std::size_t n = column.size();
  if (n < 2) throw InputError("pseudo-observations need at least two rows");
  for (double v : column)
    if (!std::isfinite(v)) throw InputError("pseudo-observations need finite data");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return column[a] < column[b]; });
  std::vector<double> out(n);
  const double denom = static_cast<double>(n) + 1.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && column[order[j + 1]] == column[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) out[order[k]] = avg_rank / denom;
    i = j + 1;
  }
  return out;
}

PseudoObservations pseudo_obs(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw InputError("pseudo-observations need columns of equal length");
  return {rank_scores(x), rank_scores(y)};
}

namespace {

double sum_or_neg_inf(double s) { return std::isfinite(s) ? s : -std::numeric_limits<double>::infinity(); }

double loglik_latent(const FnmCopula& cop, const std::vector<double>& q1, const std::vector<double>& q2) {
  double s = 0.0;
  for (std::size_t i = 0; i < q1.size(); ++i) s += cop.log_pdf_latent(q1[i], q2[i]);
  return sum_or_neg_inf(s);
}

}  // namespace

double loglik_fnm(const FnmParams& params, const PseudoObservations& u) {
  const FnmCopula cop(params);
  return loglik_latent(cop, cop.uni_quantiles(u.u1, 1), cop.uni_quantiles(u.u2, 2));
}

double loglik(const Copula& cop, const PseudoObservations& u) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += cop.log_pdf(u.u1[i], u.u2[i]);
  return sum_or_neg_inf(s);
}

double loglik_family(const CopulaFamily& fam, const PseudoObservations& u) { return loglik(FamilyCopula(fam), u); }

std::string ModelSpec::name() const {
  if (fnm) return "fnm-" + std::to_string(K);
  return display_name(CopulaFamily{tag, 0.0, 0.0, 0.0, survival});
}

int ModelSpec::parameter_count() const { return fnm ? 3 * K - 2 : fnmcop::parameter_count(tag); }

double aic(double loglik, int parameter_count) { return -2.0 * loglik + 2.0 * parameter_count; }
double aic(const FitResult& fit) { return aic(fit.loglik, fit.parameter_count); }

Eigen::VectorXd fnm_to_free(const FnmParams& p) {
  const int K = p.K();
  Eigen::VectorXd z(3 * K - 2);
  const auto w = p.weights();
  const double log_last = std::log(w.back());
  for (int k = 0; k < K - 1; ++k) {
    z[k] = std::log(w[static_cast<std::size_t>(k)]) - log_last;
    z[K - 1 + k] = p.theta()[static_cast<std::size_t>(k)];
  }
  for (int k = 0; k < K; ++k) z[2 * (K - 1) + k] = std::atanh(p.rho()[static_cast<std::size_t>(k)]);
  return z;
}

FnmParams fnm_from_free(int K, const Eigen::VectorXd& z) {
  if (z.size() != 3 * K - 2) throw DomainError("fnm_from_free: wrong vector length");
  double m = 0.0;
  for (int k = 0; k < K - 1; ++k) m = std::max(m, z[k]);
  double denom = std::exp(-m);
  for (int k = 0; k < K - 1; ++k) denom += std::exp(z[k] - m);
  std::vector<double> pi, theta, rho;
  for (int k = 0; k < K - 1; ++k) {
    pi.push_back(std::exp(z[k] - m) / denom);
    theta.push_back(z[K - 1 + k]);
  }
  for (int k = 0; k < K; ++k) rho.push_back(std::tanh(z[2 * (K - 1) + k]));
  return FnmParams(K, std::move(pi), std::move(theta), std::move(rho));
}

Eigen::VectorXd family_to_free(const CopulaFamily& f) {
  validate(f);
  switch (f.tag) {
    case FamilyTag::bvn: return Eigen::VectorXd::Constant(1, std::atanh(f.theta));
    case FamilyTag::t: return Eigen::Vector2d(std::atanh(f.theta), std::log(f.nu));
    case FamilyTag::frank: return Eigen::VectorXd::Constant(1, f.theta);
    case FamilyTag::clayton: return Eigen::VectorXd::Constant(1, std::log(f.theta));
    case FamilyTag::gumbel: return Eigen::VectorXd::Constant(1, std::log(f.theta - 1.0));
    case FamilyTag::bb1: return Eigen::Vector2d(std::log(f.theta), std::log(f.delta - 1.0));
    case FamilyTag::bb7: return Eigen::Vector2d(std::log(f.theta - 1.0), std::log(f.delta));
  }
  return {};
}

CopulaFamily family_from_free(FamilyTag tag, bool survival, const Eigen::VectorXd& z) {
  CopulaFamily f{tag, 0.0, 0.0, 0.0, survival};
  switch (tag) {
    case FamilyTag::bvn: f.theta = std::tanh(z[0]); break;
    case FamilyTag::t: f.theta = std::tanh(z[0]); f.nu = std::exp(z[1]); break;
    case FamilyTag::frank: f.theta = z[0]; break;
    case FamilyTag::clayton: f.theta = std::exp(z[0]); break;
    case FamilyTag::gumbel: f.theta = 1.0 + std::exp(z[0]); break;
    case FamilyTag::bb1: f.theta = std::exp(z[0]); f.delta = 1.0 + std::exp(z[1]); break;
    case FamilyTag::bb7: f.theta = 1.0 + std::exp(z[0]); f.delta = std::exp(z[1]); break;
  }
  validate(f);
  return f;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> family_natural(const CopulaFamily& f) {
  switch (f.tag) {
    case FamilyTag::t: return {f.theta, f.nu};
    case FamilyTag::bb1:
    case FamilyTag::bb7: return {f.theta, f.delta};
    default: return {f.theta};
  }
}

CopulaFamily family_from_natural(FamilyTag tag, bool survival, const std::vector<double>& v) {
  CopulaFamily f{tag, v.at(0), 0.0, 0.0, survival};
  if (tag == FamilyTag::t) f.nu = v.at(1);
  if (tag == FamilyTag::bb1 || tag == FamilyTag::bb7) f.delta = v.at(1);
  validate(f);
  return f;
}

// Negative log-likelihood of a K-FNM copula in free coordinates. Margin
// quantiles depend only on (pi) for dim 1 and (pi, theta) for dim 2, so they
// are cached across calls that change correlations only.
class FnmObjective {
 public:
  FnmObjective(int K, const PseudoObservations& u) : K_(K), u_(u) {}

  double operator()(const Eigen::VectorXd& z) {
    std::optional<FnmParams> p;
    try {
      p.emplace(fnm_from_free(K_, z));
    } catch (const DomainError&) {
      return kInf;
    }
    const FnmCopula cop(*p);
    const Eigen::Index km1 = K_ - 1;
    const Eigen::VectorXd key1 = z.head(km1);
    const Eigen::VectorXd key2 = z.head(2 * km1);
    if (!valid1_ || key1 != key1_) {
      q1_ = cop.uni_quantiles(u_.u1, 1);
      key1_ = key1;
      valid1_ = true;
    }
    if (!valid2_ || key2 != key2_) {
      q2_ = cop.uni_quantiles(u_.u2, 2);
      key2_ = key2;
      valid2_ = true;
    }
    const double ll = loglik_latent(cop, q1_, q2_);
    return std::isfinite(ll) ? -ll : kInf;
  }

 private:
  int K_;
  const PseudoObservations& u_;
  bool valid1_ = false, valid2_ = false;
  Eigen::VectorXd key1_, key2_;
  std::vector<double> q1_, q2_;
};

class FamilyObjective {
 public:
  FamilyObjective(FamilyTag tag, bool survival, const PseudoObservations& u) : tag_(tag), survival_(survival), u_(u) {}

  double operator()(const Eigen::VectorXd& z) const {
    try {
      const double ll = loglik_family(family_from_free(tag_, survival_, z), u_);
      return std::isfinite(ll) ? -ll : kInf;
    } catch (const DomainError&) {
      return kInf;
    } catch (const NumericError&) {
      return kInf;
    }
  }

 private:
  FamilyTag tag_;
  bool survival_;
  const PseudoObservations& u_;
};

// Kendall's tau from the normal-scores correlation; used for starting values.
double rough_tau(const PseudoObservations& u) {
  double s1 = 0, s2 = 0, s11 = 0, s22 = 0, s12 = 0;
  const double n = static_cast<double>(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double a = norm_quantile(u.u1[i]), b = norm_quantile(u.u2[i]);
    s1 += a; s2 += b; s11 += a * a; s22 += b * b; s12 += a * b;
  }
  const double r = (s12 / n - s1 * s2 / (n * n)) /
                   std::sqrt((s11 / n - s1 * s1 / (n * n)) * (s22 / n - s2 * s2 / (n * n)));
  return std::clamp(2.0 / kPi * std::asin(std::clamp(r, -0.99, 0.99)), -0.9, 0.9);
}

std::vector<std::vector<double>> family_starts(FamilyTag tag, double tau) {
  const double tp = std::max(tau, 0.05);
  const double r = std::sin(kPi * tau / 2.0);
  switch (tag) {
    case FamilyTag::bvn: return {{r}};
    case FamilyTag::t: return {{r, 5.0}, {r, 2.5}, {r, 15.0}};
    case FamilyTag::frank: return {{tau_to_param(FamilyTag::frank, std::abs(tau) < 1e-3 ? 0.05 : tau)}};
    case FamilyTag::clayton: return {{tau_to_param(FamilyTag::clayton, tp)}};
    case FamilyTag::gumbel: return {{tau_to_param(FamilyTag::gumbel, tp)}};
    case FamilyTag::bb1: {
      std::vector<std::vector<double>> out;
      for (double de : {1.1, 1.5, 2.5}) out.push_back({std::max(0.05, 2.0 / (de * (1.0 - tp)) - 2.0), de});
      return out;
    }
    case FamilyTag::bb7: return {{1.2, 0.5}, {1.5, 1.0}, {2.0, 2.0}};
  }
  return {};
}

std::vector<std::string> fnm_names(int K) {
  std::vector<std::string> n;
  for (int k = 1; k < K; ++k) n.push_back("pi" + std::to_string(k));
  for (int k = 1; k < K; ++k) n.push_back("theta" + std::to_string(k));
  for (int k = 1; k <= K; ++k) n.push_back("rho" + std::to_string(k));
  return n;
}

std::vector<std::string> family_names(FamilyTag tag) {
  switch (tag) {
    case FamilyTag::t: return {"theta", "nu"};
    case FamilyTag::bb1:
    case FamilyTag::bb7: return {"theta", "delta"};
    default: return {"theta"};
  }
}

FnmParams default_fnm_init(int K) {
  std::vector<double> rho(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) rho[static_cast<std::size_t>(k)] = (k % 2 == 0 ? 1e-3 : -1e-3) * (1.0 + k);
  return FnmParams(K, std::vector<double>(static_cast<std::size_t>(K - 1), 1.0 / K),
                   std::vector<double>(static_cast<std::size_t>(K - 1), 0.0), rho);
}

FnmParams random_fnm_init(int K, int r, int R, std::uint64_t seed) {
  if (r == 0) return default_fnm_init(K);
  std::mt19937_64 rng(derive_seed(seed, "fnm-start-" + std::to_string(r)));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> w(static_cast<std::size_t>(K));
  double total = 0.0;
  for (auto& x : w) total += (x = -std::log(std::max(unif(rng), 1e-12)));
  std::vector<double> pi, theta, rho;
  double sum = 0.0;
  for (int k = 0; k < K - 1; ++k) {
    pi.push_back(std::clamp(w[static_cast<std::size_t>(k)] / total, 0.02, 0.9));
    sum += pi.back();
  }
  if (sum >= 0.98)
    for (auto& x : pi) x *= 0.9 / sum;
  const double stratum = (static_cast<double>(r - 1) + unif(rng)) / std::max(1, R - 1);
  for (int k = 0; k < K - 1; ++k) theta.push_back(k == 0 ? -2.0 + 4.0 * stratum : -2.0 + 4.0 * unif(rng));
  for (int k = 0; k < K; ++k) rho.push_back(-0.95 + 1.9 * unif(rng));
  return FnmParams(K, pi, theta, rho);
}

struct StartOutcome {
  bool ok = false;
  OptimResult opt;
  std::string error;
};

double natural_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

FnmParams fnm_start(int K, int index, int count, std::uint64_t seed) {
  if (K < 1 || index < 0) throw DomainError("fnm_start: invalid arguments");
  return random_fnm_init(K, index, count, seed);
}

FitResult fit_ml(const ModelSpec& model, const PseudoObservations& u, const FitOptions& options) {
  if (u.size() < 2 || u.u1.size() != u.u2.size()) throw InputError("fit_ml: need at least two paired observations");
  for (std::size_t i = 0; i < u.size(); ++i)
    if (!(u.u1[i] > 0.0 && u.u1[i] < 1.0 && u.u2[i] > 0.0 && u.u2[i] < 1.0))
      throw InputError("fit_ml: pseudo-observations must lie strictly inside (0, 1)");
  if (model.fnm && model.K < 1) throw InputError("fit_ml: K must be at least 1");

  // Starting points in free coordinates.
  std::vector<Eigen::VectorXd> starts;
  if (model.fnm) {
    const int K = model.K;
    const int R = options.n_restarts > 0 ? options.n_restarts : (K >= 2 ? 5 : 1);
    starts.push_back(fnm_to_free(options.init ? FnmParams::from_vector(K, *options.init) : default_fnm_init(K)));
    for (int r = 1; r < R; ++r) starts.push_back(fnm_to_free(random_fnm_init(K, r, R, options.seed)));
  } else {
    if (options.init) {
      starts.push_back(family_to_free(family_from_natural(model.tag, model.survival, *options.init)));
    } else {
      for (const auto& s : family_starts(model.tag, rough_tau(u)))
        starts.push_back(family_to_free(family_from_natural(model.tag, model.survival, s)));
    }
    if (options.n_restarts > 0 && static_cast<int>(starts.size()) > options.n_restarts)
      starts.resize(static_cast<std::size_t>(options.n_restarts));
  }

  std::vector<StartOutcome> outcomes(starts.size());
  parallel_for(starts.size(), [&](std::size_t i) {
    try {
      if (model.fnm) {
        FnmObjective obj(model.K, u);
        outcomes[i].opt = bfgs_minimize(std::ref(obj), starts[i], options.optim);
      } else {
        const FamilyObjective obj(model.tag, model.survival, u);
        outcomes[i].opt = bfgs_minimize(obj, starts[i], options.optim);
      }
      outcomes[i].ok = std::isfinite(outcomes[i].opt.value);
    } catch (const std::exception& e) {
      outcomes[i].error = e.what();
    }
  });

  const auto natural_of = [&](const Eigen::VectorXd& z) {
    return model.fnm ? fnm_from_free(model.K, z).to_vector()
                     : family_natural(family_from_free(model.tag, model.survival, z));
  };

  int best = -1;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (!outcomes[i].ok) continue;
    if (best < 0) {
      best = static_cast<int>(i);
      continue;
    }
    const auto& b = outcomes[static_cast<std::size_t>(best)].opt;
    const auto& c = outcomes[i].opt;
    if (c.value < b.value - 1e-8 ||
        (std::abs(c.value - b.value) <= 1e-8 && natural_norm(natural_of(c.x)) < natural_norm(natural_of(b.x))))
      best = static_cast<int>(i);
  }
  if (best < 0) {
    std::ostringstream msg;
    msg << model.name() << ": log-likelihood is not finite at any start";
    for (std::size_t i = 0; i < outcomes.size(); ++i)
      if (!outcomes[i].error.empty()) msg << "; start " << i << ": " << outcomes[i].error;
    throw OptimizationError(msg.str());
  }
  const OptimResult& opt = outcomes[static_cast<std::size_t>(best)].opt;

  FitResult fit;
  fit.model = model.name();
  fit.parameter_count = model.parameter_count();
  fit.loglik = -opt.value;
  fit.aic = aic(fit.loglik, fit.parameter_count);
  fit.converged = opt.converged;
  fit.iterations = opt.iterations;
  fit.gradient_norm = opt.gradient_norm;
  fit.restarts_used = static_cast<int>(starts.size());
  fit.estimates = natural_of(opt.x);
  if (model.fnm) {
    fit.fnm = fnm_from_free(model.K, opt.x);
    fit.parameter_names = fnm_names(model.K);
  } else {
    fit.family = family_from_free(model.tag, model.survival, opt.x);
    fit.parameter_names = family_names(model.tag);
  }
  fit.standard_errors.assign(fit.estimates.size(), std::numeric_limits<double>::quiet_NaN());

  if (options.compute_se) {
    Objective f;
    FnmObjective fnm_obj(model.K, u);
    if (model.fnm) f = std::ref(fnm_obj);
    else f = FamilyObjective(model.tag, model.survival, u);
    const Eigen::MatrixXd H = numeric_hessian(f, opt.x, 1e-4);
    const Eigen::LLT<Eigen::MatrixXd> llt(H);
    if (H.allFinite() && llt.info() == Eigen::Success) {
      const Eigen::MatrixXd cov_z = llt.solve(Eigen::MatrixXd::Identity(H.rows(), H.cols()));
      const Eigen::Index p = opt.x.size();
      Eigen::MatrixXd J(static_cast<Eigen::Index>(fit.estimates.size()), p);
      for (Eigen::Index j = 0; j < p; ++j) {
        const double h = 1e-6 * std::max(1.0, std::abs(opt.x[j]));
        Eigen::VectorXd zp = opt.x, zm = opt.x;
        zp[j] += h;
        zm[j] -= h;
        const auto np = natural_of(zp), nm = natural_of(zm);
        for (std::size_t i = 0; i < np.size(); ++i) J(static_cast<Eigen::Index>(i), j) = (np[i] - nm[i]) / (2.0 * h);
      }
      const Eigen::MatrixXd cov = J * cov_z * J.transpose();
      fit.se_available = true;
      for (std::size_t i = 0; i < fit.estimates.size(); ++i) {
        const double v = cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
        fit.standard_errors[i] = v >= 0.0 ? std::sqrt(v) : std::numeric_limits<double>::quiet_NaN();
      }
    }
  }
  return fit;
}

}  // namespace fnmcop
