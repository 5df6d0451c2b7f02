#include "fnmcop/serialize.hpp"

#include <cmath>
#include <limits>

#include "fnmcop/errors.hpp"

namespace fnmcop {

using nlohmann::json;

namespace {

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json numbers(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

double read_number(const json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (!j.is_number()) throw InputError("expected a number, got " + j.dump());
  return j.get<double>();
}

std::vector<double> read_numbers(const json& j, const char* key) {
  if (!j.contains(key)) return {};
  const auto& a = j.at(key);
  if (!a.is_array()) throw InputError(std::string("\"") + key + "\" must be an array");
  std::vector<double> v;
  for (const auto& x : a) v.push_back(read_number(x));
  return v;
}

}  // namespace

void to_json(json& j, const FnmParams& p) {
  j = json{{"K", p.K()}, {"pi", numbers(p.pi())}, {"theta", numbers(p.theta())}, {"rho", numbers(p.rho())}};
}

void to_json(json& j, const CopulaFamily& f) {
  j = json{{"family", family_name(f.tag)},
           {"theta", number(f.theta)},
           {"delta", number(f.delta)},
           {"nu", number(f.nu)},
           {"survival", f.survival}};
}

void from_json(const json& j, CopulaFamily& f) {
  if (!j.is_object() || !j.contains("family")) throw InputError("family JSON needs a \"family\" field");
  try {
    f.tag = parse_family_tag(j.at("family").get<std::string>());
  } catch (const DomainError& e) {
    throw InputError(e.what());
  }
  f.theta = j.contains("theta") ? read_number(j.at("theta")) : 0.0;
  f.delta = j.contains("delta") ? read_number(j.at("delta")) : 0.0;
  f.nu = j.contains("nu") ? read_number(j.at("nu")) : 0.0;
  f.survival = j.value("survival", false);
}

void to_json(json& j, const FitResult& r) {
  json est = json::object(), se = json::object();
  for (std::size_t i = 0; i < r.parameter_names.size(); ++i) {
    est[r.parameter_names[i]] = number(r.estimates[i]);
    se[r.parameter_names[i]] = i < r.standard_errors.size() ? number(r.standard_errors[i]) : json(nullptr);
  }
  j = json{{"model", r.model},
           {"estimates", est},
           {"se", se},
           {"loglik", number(r.loglik)},
           {"aic", number(r.aic)},
           {"converged", r.converged},
           {"iterations", r.iterations},
           {"restarts_used", r.restarts_used},
           {"parameter_count", r.parameter_count},
           {"gradient_norm", number(r.gradient_norm)}};
  if (r.fnm) j["parameters"] = *r.fnm;
  if (r.family) j["parameters"] = *r.family;
}

void to_json(json& j, const KlReport& r) {
  j = json{{"target", r.target},
           {"K", r.K},
           {"categories", r.categories},
           {"tau", number(r.tau)},
           {"lambda_L", number(r.lambda_L)},
           {"lambda_U", number(r.lambda_U)},
           {"kl", number(r.kl)},
           {"sigma2", number(r.sigma2)},
           {"sample_size", number(r.sample_size)},
           {"converged", r.converged},
           {"gradient_norm", number(r.gradient_norm)},
           {"starts", r.starts}};
  j["fnm"] = r.fnm ? json(*r.fnm) : json(nullptr);
  if (!r.error.empty()) j["error"] = r.error;
}

void to_json(json& j, const TauEstimate& t) {
  j = json{{"tau", number(t.tau)}, {"abs_error_estimate", number(t.abs_error_estimate)}, {"evaluations", t.evaluations}};
}

CopulaSpec parse_copula_spec(const json& j) {
  CopulaSpec s;
  if (j.is_object() && j.contains("K")) {
    s.fnm = j.get<FnmParams>();
  } else if (j.is_object() && j.contains("family")) {
    s.family = j.get<CopulaFamily>();
    try {
      validate(*s.family);
    } catch (const DomainError& e) {
      throw InputError(e.what());
    }
  } else {
    throw InputError("copula JSON needs either \"K\" (FNM) or \"family\"");
  }
  return s;
}

}  // namespace fnmcop

namespace nlohmann {

fnmcop::FnmParams adl_serializer<fnmcop::FnmParams>::from_json(const json& j) {
  if (!j.is_object() || !j.contains("K") || !j.at("K").is_number_integer())
    throw fnmcop::InputError("FNM JSON needs an integer \"K\"");
  try {
    return fnmcop::FnmParams(j.at("K").get<int>(), fnmcop::read_numbers(j, "pi"), fnmcop::read_numbers(j, "theta"),
                             fnmcop::read_numbers(j, "rho"));
  } catch (const fnmcop::DomainError& e) {
    throw fnmcop::InputError(e.what());
  }
}

}  // namespace nlohmann
