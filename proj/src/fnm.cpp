#include "fnmcop/fnm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <span>

#include "fnmcop/errors.hpp"
#include "fnmcop/gauss.hpp"

namespace fnmcop {

FnmParams::FnmParams(int K, std::vector<double> pi, std::vector<double> theta,
                     std::vector<double> rho)
    : K_(K), pi_(std::move(pi)), theta_(std::move(theta)), rho_(std::move(rho)) {
  if (K_ < 1) throw DomainError("FnmParams: K must be at least 1");
  const auto km1 = static_cast<std::size_t>(K_ - 1);
  if (pi_.size() != km1 || theta_.size() != km1 || rho_.size() != km1 + 1)
    throw DomainError("FnmParams: expected K-1 weights, K-1 thetas and K correlations");
  double total = 0.0;
  for (double p : pi_) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("FnmParams: each weight must lie in (0, 1)");
    total += p;
  }
  if (!(total < 1.0)) throw DomainError("FnmParams: weights must sum to less than one");
  for (double t : theta_)
    if (!std::isfinite(t)) throw DomainError("FnmParams: theta must be finite");
  for (double r : rho_)
    if (!(r > -1.0 && r < 1.0)) throw DomainError("FnmParams: correlations must lie in (-1, 1)");
}

FnmParams FnmParams::independence(int K) {
  if (K < 1) throw DomainError("FnmParams: K must be at least 1");
  const auto km1 = static_cast<std::size_t>(K - 1);
  return FnmParams(K, std::vector<double>(km1, 1.0 / K), std::vector<double>(km1, 0.0),
                   std::vector<double>(km1 + 1, 0.0));
}

FnmParams FnmParams::from_vector(int K, const std::vector<double>& natural) {
  if (K < 1 || natural.size() != static_cast<std::size_t>(3 * K - 2))
    throw DomainError("FnmParams::from_vector: expected 3K-2 values");
  const auto km1 = static_cast<std::ptrdiff_t>(K - 1);
  auto it = natural.begin();
  std::vector<double> pi(it, it + km1);
  std::vector<double> theta(it + km1, it + 2 * km1);
  std::vector<double> rho(it + 2 * km1, natural.end());
  return FnmParams(K, std::move(pi), std::move(theta), std::move(rho));
}

std::vector<double> FnmParams::weights() const {
  std::vector<double> w(pi_);
  w.push_back(1.0 - std::accumulate(pi_.begin(), pi_.end(), 0.0));
  return w;
}

std::vector<double> FnmParams::to_vector() const {
  std::vector<double> v(pi_);
  v.insert(v.end(), theta_.begin(), theta_.end());
  v.insert(v.end(), rho_.begin(), rho_.end());
  return v;
}

std::vector<FnmComponent> expand(const FnmParams& params) {
  const int K = params.K();
  const std::vector<double> w = params.weights();
  std::vector<FnmComponent> comps(static_cast<std::size_t>(K));
  if (K == 1) {
    comps[0] = {1.0, 0.0, 0.0, params.rho()[0]};
    return comps;
  }
  double theta_sum = 0.0;
  for (int k = 0; k < K - 1; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    comps[ku] = {w[ku], k == 0 ? static_cast<double>(K - 1) : -1.0, params.theta()[ku],
                 params.rho()[ku]};
    theta_sum += params.theta()[ku];
  }
  const auto last = static_cast<std::size_t>(K - 1);
  comps[last] = {w[last], -1.0, -theta_sum, params.rho()[last]};
  return comps;
}

CovarianceSummary covariance_summary(const FnmParams& params) {
  const int K = params.K();
  CovarianceSummary out{};
  if (K == 1) {
    out.delta11 = 1.0;
    out.delta22 = 1.0;
    out.delta12 = params.rho()[0];
    out.pearson_rho = params.rho()[0];
    return out;
  }
  const std::vector<double> w = params.weights();
  const auto& th = params.theta();
  const double Kd = static_cast<double>(K);
  const double pi1 = w[0];
  const double piK = w.back();
  double theta_sum = 0.0, weighted = 0.0, weighted_sq = 0.0, middle = 0.0, rho_mix = 0.0;
  for (int k = 0; k < K - 1; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    theta_sum += th[ku];
    weighted += w[ku] * th[ku];
    weighted_sq += w[ku] * th[ku] * th[ku];
    if (k >= 1) middle += w[ku] * th[ku];
  }
  for (int k = 0; k < K; ++k) rho_mix += w[static_cast<std::size_t>(k)] * params.rho()[static_cast<std::size_t>(k)];
  const double mean2 = weighted - piK * theta_sum;
  out.delta11 = 1.0 + pi1 * (1.0 - pi1) * Kd * Kd;
  out.delta22 = 1.0 + weighted_sq + piK * theta_sum * theta_sum - mean2 * mean2;
  out.delta12 = pi1 * th[0] * (Kd - 1.0) - middle + piK * theta_sum + (1.0 - pi1 * Kd) * mean2 + rho_mix;
  out.pearson_rho = out.delta12 / std::sqrt(out.delta11 * out.delta22);
  return out;
}

double pearson_rho(const FnmParams& params) { return covariance_summary(params).pearson_rho; }

namespace {

double log_sum_exp(std::span<const double> terms) {
  const double m = *std::max_element(terms.begin(), terms.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double t : terms) s += std::exp(t - m);
  return m + std::log(s);
}

constexpr int kMaxComponents = 64;

// Quantile of sum_k w_k N(mean_k, sd_k^2) by Newton on the log cdf (or log
// survival function above the median), safeguarded by the exact bracket
// [min_k quantile_k, max_k quantile_k].
double mixture_quantile(std::span<const double> w, std::span<const double> mean,
                        std::span<const double> sd, double p,
                        double start = std::numeric_limits<double>::quiet_NaN()) {
  const bool upper = p > 0.5;
  const double tail = upper ? 1.0 - p : p;
  const double log_tail = std::log(tail);
  const double z = norm_quantile(p);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  double y = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double qk = mean[k] + sd[k] * z;
    lo = std::min(lo, qk);
    hi = std::max(hi, qk);
    y += w[k] * qk;
  }
  if (hi - lo < 1e-300) return lo;
  if (std::isfinite(start)) y = std::clamp(start, lo, hi);
  for (int iter = 0; iter < 100; ++iter) {
    double mass = 0.0, dens = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
      const double x = (y - mean[k]) / sd[k];
      mass += w[k] * norm_cdf(upper ? -x : x);
      dens += w[k] * norm_pdf(x) / sd[k];
    }
    // g increasing in y in both branches.
    const double g = upper ? log_tail - std::log(mass) : std::log(mass) - log_tail;
    if (g < 0.0) lo = y; else hi = y;
    double next = y - g * mass / dens;
    if (!(mass > 0.0 && dens > 0.0) || !(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - y);
    y = next;
    if (step <= 2e-16 * std::max(1.0, std::abs(y)) || hi - lo <= 2e-16 * std::max(1.0, std::abs(y)))
      break;
  }
  return y;
}

}  // namespace

FnmCopula::FnmCopula(FnmParams params) : params_(std::move(params)), comps_(expand(params_)) {
  if (comps_.size() > static_cast<std::size_t>(kMaxComponents))
    throw DomainError("FnmCopula: too many components");
  log_weight_.reserve(comps_.size());
  sd_cond_.reserve(comps_.size());
  for (const auto& c : comps_) {
    log_weight_.push_back(std::log(c.weight));
    sd_cond_.push_back(std::sqrt((1.0 - c.rho) * (1.0 + c.rho)));
  }
  independent_ = std::all_of(comps_.begin(), comps_.end(), [](const FnmComponent& c) {
    return c.rho == 0.0 && c.mean2 == 0.0;
  });
}

namespace {
inline double component_mean(const FnmComponent& c, int dim) { return dim == 1 ? c.mean1 : c.mean2; }

void check_dim(int dim) {
  if (dim != 1 && dim != 2) throw DomainError("FNM margin index must be 1 or 2");
}
}  // namespace

double FnmCopula::uni_cdf(double y, int dim) const {
  check_dim(dim);
  double s = 0.0;
  for (const auto& c : comps_) s += c.weight * norm_cdf(y - component_mean(c, dim));
  return std::min(s, 1.0);
}

double FnmCopula::uni_sf(double y, int dim) const {
  check_dim(dim);
  double s = 0.0;
  for (const auto& c : comps_) s += c.weight * norm_cdf(component_mean(c, dim) - y);
  return std::min(s, 1.0);
}

double FnmCopula::uni_pdf(double y, int dim) const { return std::exp(uni_log_pdf(y, dim)); }

double FnmCopula::uni_log_pdf(double y, int dim) const {
  check_dim(dim);
  double terms[kMaxComponents];
  for (std::size_t k = 0; k < comps_.size(); ++k)
    terms[k] = log_weight_[k] + norm_log_pdf(y - component_mean(comps_[k], dim));
  return log_sum_exp(std::span<const double>(terms, comps_.size()));
}

double FnmCopula::uni_quantile(double p, int dim) const {
  check_dim(dim);
  if (!(p > 0.0 && p < 1.0)) throw DomainError("uni_quantile: p must lie in (0, 1)");
  const std::size_t n = comps_.size();
  double w[kMaxComponents], m[kMaxComponents], sd[kMaxComponents];
  for (std::size_t k = 0; k < n; ++k) {
    w[k] = comps_[k].weight;
    m[k] = component_mean(comps_[k], dim);
    sd[k] = 1.0;
  }
  return mixture_quantile({w, n}, {m, n}, {sd, n}, p);
}

std::vector<double> FnmCopula::uni_quantiles(const std::vector<double>& p, int dim) const {
  check_dim(dim);
  const std::size_t n = comps_.size();
  double w[kMaxComponents], m[kMaxComponents], sd[kMaxComponents];
  for (std::size_t k = 0; k < n; ++k) {
    w[k] = comps_[k].weight;
    m[k] = component_mean(comps_[k], dim);
    sd[k] = 1.0;
  }
  std::vector<std::size_t> order(p.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
  std::vector<double> out(p.size());
  double prev = std::numeric_limits<double>::quiet_NaN();
  double prev_p = -1.0;
  for (std::size_t idx : order) {
    const double pi = p[idx];
    if (!(pi > 0.0 && pi < 1.0)) throw DomainError("uni_quantile: p must lie in (0, 1)");
    if (pi == prev_p) {
      out[idx] = prev;
      continue;
    }
    prev = mixture_quantile({w, n}, {m, n}, {sd, n}, pi, prev);
    prev_p = pi;
    out[idx] = prev;
  }
  return out;
}

double FnmCopula::biv_cdf(double y1, double y2) const {
  double s = 0.0;
  for (const auto& c : comps_) s += c.weight * bvn_cdf(y1 - c.mean1, y2 - c.mean2, Correlation(c.rho));
  return std::clamp(s, 0.0, 1.0);
}

double FnmCopula::biv_pdf(double y1, double y2) const { return std::exp(biv_log_pdf(y1, y2)); }

double FnmCopula::biv_log_pdf(double y1, double y2) const {
  double terms[kMaxComponents];
  for (std::size_t k = 0; k < comps_.size(); ++k) {
    const auto& c = comps_[k];
    terms[k] = log_weight_[k] + bvn_log_pdf(y1 - c.mean1, y2 - c.mean2, Correlation(c.rho));
  }
  return log_sum_exp(std::span<const double>(terms, comps_.size()));
}

double FnmCopula::log_pdf_latent(double q1, double q2) const {
  // The mixture factorizes into f1(y1) phi(y2) here, so the density is exactly one.
  if (independent_) return 0.0;
  return biv_log_pdf(q1, q2) - uni_log_pdf(q1, 1) - uni_log_pdf(q2, 2);
}

double FnmCopula::log_pdf(double u1, double u2) const {
  if (!(u1 > 0.0 && u1 < 1.0 && u2 > 0.0 && u2 < 1.0))
    throw DomainError("FNM copula density is defined on the open unit square");
  return log_pdf_latent(uni_quantile(u1, 1), uni_quantile(u2, 2));
}

double FnmCopula::cdf(double u1, double u2) const {
  if (u1 <= 0.0 || u2 <= 0.0) return 0.0;
  if (u1 >= 1.0) return std::min(u2, 1.0);
  if (u2 >= 1.0) return u1;
  return biv_cdf(uni_quantile(u1, 1), uni_quantile(u2, 2));
}

double FnmCopula::latent_h(double q2, double q1) const {
  const std::size_t n = comps_.size();
  double lw[kMaxComponents]{};
  for (std::size_t k = 0; k < n; ++k) lw[k] = log_weight_[k] + norm_log_pdf(q1 - comps_[k].mean1);
  const double norm = log_sum_exp(std::span<const double>(lw, n));
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const auto& c = comps_[k];
    const double m = c.mean2 + c.rho * (q1 - c.mean1);
    s += std::exp(lw[k] - norm) * norm_cdf((q2 - m) / sd_cond_[k]);
  }
  return std::clamp(s, 0.0, 1.0);
}

double FnmCopula::h(double u2, double u1) const {
  if (!(u1 > 0.0 && u1 < 1.0)) throw DomainError("FNM conditional cdf: u1 must lie in (0, 1)");
  if (u2 <= 0.0) return 0.0;
  if (u2 >= 1.0) return 1.0;
  return latent_h(uni_quantile(u2, 2), uni_quantile(u1, 1));
}

double FnmCopula::h_inverse(double q, double u1) const {
  if (!(q > 0.0 && q < 1.0 && u1 > 0.0 && u1 < 1.0))
    throw DomainError("FNM conditional inverse: arguments must lie in (0, 1)");
  // Y2 | Y1 = q1 is itself a normal mixture.
  const double q1 = uni_quantile(u1, 1);
  const std::size_t n = comps_.size();
  double lw[kMaxComponents]{}, m[kMaxComponents]{};
  for (std::size_t k = 0; k < n; ++k) lw[k] = log_weight_[k] + norm_log_pdf(q1 - comps_[k].mean1);
  const double norm = log_sum_exp(std::span<const double>(lw, n));
  for (std::size_t k = 0; k < n; ++k) {
    lw[k] = std::exp(lw[k] - norm);
    m[k] = comps_[k].mean2 + comps_[k].rho * (q1 - comps_[k].mean1);
  }
  const double q2 = mixture_quantile({lw, n}, {m, n}, {sd_cond_.data(), n}, q);
  const double u2 = q2 > 0.0 ? 1.0 - uni_sf(q2, 2) : uni_cdf(q2, 2);
  return std::clamp(u2, std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
}

std::string FnmCopula::name() const { return std::to_string(params_.K()) + "-FNM"; }

std::vector<UniformPair> FnmCopula::sample(std::size_t n, std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> cumulative;
  double acc = 0.0;
  for (const auto& c : comps_) cumulative.push_back(acc += c.weight);
  cumulative.back() = 1.0;
  const auto to_uniform = [this](double y, int dim) {
    const double u = y > 0.0 ? 1.0 - uni_sf(y, dim) : uni_cdf(y, dim);
    return std::clamp(u, std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
  };
  std::vector<UniformPair> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double pick = unif(rng);
    const auto k = static_cast<std::size_t>(
        std::upper_bound(cumulative.begin(), cumulative.end(), pick) - cumulative.begin());
    const auto& c = comps_[std::min(k, comps_.size() - 1)];
    const double z1 = normal(rng);
    const double z2 = normal(rng);
    const double y1 = c.mean1 + z1;
    const double y2 = c.mean2 + c.rho * z1 + sd_cond_[&c - comps_.data()] * z2;
    out.emplace_back(to_uniform(y1, 1), to_uniform(y2, 2));
  }
  return out;
}

}  // namespace fnmcop
