#pragma once

#include <nlohmann/json.hpp>

#include "fnmcop/dependence.hpp"
#include "fnmcop/estimation.hpp"
#include "fnmcop/families.hpp"
#include "fnmcop/fnm.hpp"
#include "fnmcop/kl.hpp"

namespace fnmcop {

// Found by nlohmann::json through argument-dependent lookup. Non-finite
// numbers are written as null and read back as NaN.

void to_json(nlohmann::json& j, const FnmParams& p);

void to_json(nlohmann::json& j, const CopulaFamily& f);
/// Family names are case-insensitive; missing delta/nu/survival default to 0/0/false.
void from_json(const nlohmann::json& j, CopulaFamily& f);

void to_json(nlohmann::json& j, const FitResult& r);
void to_json(nlohmann::json& j, const KlReport& r);
void to_json(nlohmann::json& j, const TauEstimate& t);

/// Either an FNM parameter object (has "K") or a family object (has "family").
struct CopulaSpec {
  std::optional<FnmParams> fnm;
  std::optional<CopulaFamily> family;
};
CopulaSpec parse_copula_spec(const nlohmann::json& j);

}  // namespace fnmcop

// FnmParams has no default constructor, so the library needs an adl_serializer
// specialization for get<FnmParams>().
namespace nlohmann {
template <>
struct adl_serializer<fnmcop::FnmParams> {
  static fnmcop::FnmParams from_json(const json& j);
  static void to_json(json& j, const fnmcop::FnmParams& p) { fnmcop::to_json(j, p); }
};
}  // namespace nlohmann
