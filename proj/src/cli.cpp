#include "fnmcop/cli.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fnmcop/dependence.hpp"
#include "fnmcop/discrete_kl.hpp"
#include "fnmcop/errors.hpp"
#include "fnmcop/estimation.hpp"
#include "fnmcop/families.hpp"
#include "fnmcop/fnm.hpp"
#include "fnmcop/gauss.hpp"
#include "fnmcop/kl.hpp"
#include "fnmcop/parallel.hpp"
#include "fnmcop/quadrature.hpp"
#include "fnmcop/serialize.hpp"

namespace fnmcop {

using nlohmann::json;

// ---------------------------------------------------------------- CSV input

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(trim(field));
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

const std::vector<std::string> kMagicNames = {"fLength", "fWidth", "fSize",    "fConc",  "fConc1", "fAsym",
                                              "fM3Long", "fM3Trans", "fAlpha", "fDist",  "class"};

bool looks_like_magic(const std::vector<std::string>& row) {
  if (row.size() != 11) return false;
  for (std::size_t i = 0; i < 10; ++i)
    if (!parse_number(row[i])) return false;
  return row[10] == "g" || row[10] == "h";
}

bool name_matches(const std::string& column, const std::string& wanted) {
  const auto c = lower(column), w = lower(wanted);
  return c == w || (c.size() > 1 && c[0] == 'f' && c.substr(1) == w);
}

}  // namespace

std::vector<double> Dataset::column(int j) const {
  std::vector<double> v(static_cast<std::size_t>(values.rows()));
  for (Eigen::Index i = 0; i < values.rows(); ++i) v[static_cast<std::size_t>(i)] = values(i, j);
  return v;
}

Dataset load_csv(const std::string& path, const std::string& selector, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    rows.push_back(split(line, ','));
  }
  if (rows.empty()) throw InputError(path + " is empty");

  bool has_header = options.header == HeaderMode::present;
  if (options.header == HeaderMode::automatic)
    has_header = std::any_of(rows[0].begin(), rows[0].end(), [](const std::string& f) { return !parse_number(f); }) &&
                 !looks_like_magic(rows[0]);
  std::vector<std::string> names;
  if (has_header) {
    names = rows.front();
    rows.erase(rows.begin());
  }
  Dataset d;
  d.path = path;
  d.magic_layout = !rows.empty() && looks_like_magic(rows.front()) && (names.empty() || names.size() == 11);
  const std::size_t width = names.empty() ? (rows.empty() ? 0 : rows.front().size()) : names.size();
  if (names.empty()) {
    if (d.magic_layout) {
      names = kMagicNames;
    } else {
      for (std::size_t j = 0; j < width; ++j) names.push_back("V" + std::to_string(j + 1));
    }
  }
  const auto is_label = [&](std::size_t j) { return d.magic_layout && j == 10; };

  std::vector<std::size_t> sel;
  if (trim(selector).empty()) {
    for (std::size_t j = 0; j < names.size() && sel.size() < 2; ++j) {
      if (is_label(j)) continue;
      if (!rows.empty() && j < rows.front().size() && parse_number(rows.front()[j])) sel.push_back(j);
    }
    if (sel.size() < 2) throw InputError(path + ": fewer than two numeric columns");
  } else {
    const auto parts = split(selector, ',');
    if (parts.size() != 2) throw InputError("--cols needs exactly two columns, got \"" + selector + "\"");
    for (const auto& p : parts) {
      std::optional<std::size_t> found;
      if (!p.empty() && std::all_of(p.begin(), p.end(), [](unsigned char c) { return std::isdigit(c); })) {
        const auto idx = static_cast<std::size_t>(std::stoul(p));
        if (idx < 1 || idx > names.size()) throw InputError("column index " + p + " is out of range");
        found = idx - 1;
      } else {
        for (std::size_t j = 0; j < names.size(); ++j)
          if (name_matches(names[j], p)) {
            found = j;
            break;
          }
        if (!found) throw InputError(path + ": no column named \"" + p + "\"");
      }
      if (is_label(*found)) throw InputError("\"" + names[*found] + "\" is the class label, not a numeric column");
      sel.push_back(*found);
    }
  }

  std::vector<std::array<double, 2>> kept;
  for (const auto& r : rows) {
    ++d.rows_read;
    std::optional<double> a, b;
    if (sel[0] < r.size()) a = parse_number(r[sel[0]]);
    if (sel[1] < r.size()) b = parse_number(r[sel[1]]);
    if (a && b) kept.push_back({*a, *b});
    else ++d.rows_dropped;
  }
  if (kept.size() < options.min_rows) {
    std::ostringstream msg;
    msg << path << ": only " << kept.size() << " usable rows in the selected columns (need " << options.min_rows << ")";
    throw InputError(msg.str());
  }
  d.values.resize(static_cast<Eigen::Index>(kept.size()), 2);
  for (std::size_t i = 0; i < kept.size(); ++i) {
    d.values(static_cast<Eigen::Index>(i), 0) = kept[i][0];
    d.values(static_cast<Eigen::Index>(i), 1) = kept[i][1];
  }
  d.columns = {names[sel[0]], names[sel[1]]};
  d.selected = {sel[0] + 1, sel[1] + 1};
  return d;
}

std::string format_csv_number(double x) {
  if (std::isnan(x)) return "NA";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x == 0.0 ? 0.0 : x);
  return buf;
}

// ---------------------------------------------------------------- commands

namespace {

constexpr int kExitOk = 0, kExitInput = 1, kExitConvergence = 2, kExitNumeric = 3;

struct Common {
  std::string out_path;
  std::string format = "csv";
  std::optional<std::uint64_t> seed;
};

std::uint64_t resolve_seed(const Common& c) {
  if (c.seed) return *c.seed;
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

void emit(const Common& c, const std::string& text, std::ostream& out) {
  if (c.out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(c.out_path, std::ios::binary);
  if (!f) throw InputError("cannot write " + c.out_path);
  f << text;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> v;
  if (trim(text).empty()) return v;
  if (text.find(':') != std::string::npos) {
    const auto p = split(text, ':');
    std::optional<double> a, b, s;
    if (p.size() == 3) a = parse_number(p[0]), b = parse_number(p[1]), s = parse_number(p[2]);
    if (!a || !b || !s || !(*s > 0.0)) throw InputError("range must be start:stop:step with step > 0, got " + text);
    const auto count = static_cast<long>(std::floor((*b - *a) / *s + 1e-9));
    for (long i = 0; i <= count; ++i) v.push_back(std::round((*a + static_cast<double>(i) * *s) * 1e12) / 1e12);
    return v;
  }
  for (const auto& f : split(text, ',')) {
    const auto x = parse_number(f);
    if (!x) throw InputError("not a number: \"" + f + "\" in \"" + text + "\"");
    v.push_back(*x);
  }
  return v;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  for (double x : parse_list(text)) {
    if (x != std::floor(x)) throw InputError("expected integers in \"" + text + "\"");
    out.push_back(static_cast<int>(x));
  }
  return out;
}

std::string join(const std::vector<std::string>& v, const std::string& sep = ",") {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? sep : "") + v[i];
  return s;
}

std::string seed_comment(const std::string& command, std::uint64_t seed) {
  return "# fnmcop " + command + " seed=" + std::to_string(seed) + "\n";
}

// Copula chosen on the command line: --params JSON, a family, or FNM lists.
struct CopulaArgs {
  std::string params_json;
  std::string family;
  std::string par;
  std::optional<double> tau;
  std::string lambdas;
  std::optional<double> nu;
  bool survival = false;
  std::string pi, theta, rho;
};

void add_copula_options(CLI::App* app, CopulaArgs& a) {
  app->add_option("--params", a.params_json, "copula as JSON: {\"K\":..,\"pi\":..} or {\"family\":..}");
  app->add_option("--family", a.family, "reference family (bvn, t, frank, clayton, gumbel, bb1, bb7)");
  app->add_option("--par", a.par, "family parameters theta[,delta]");
  app->add_option("--tau", a.tau, "family parameter from Kendall's tau");
  app->add_option("--lambdas", a.lambdas, "BB1/BB7 from lambda_L,lambda_U");
  app->add_option("--nu", a.nu, "degrees of freedom of the t family");
  app->add_flag("--survival", a.survival, "use the survival (reflected) family");
  app->add_option("--pi", a.pi, "FNM weights pi_1..pi_{K-1}");
  app->add_option("--theta", a.theta, "FNM means theta_1..theta_{K-1}");
  app->add_option("--rho", a.rho, "FNM correlations rho_1..rho_K");
}

CopulaFamily family_from_args(FamilyTag tag, const CopulaArgs& a) {
  CopulaFamily f{tag, 0.0, 0.0, 0.0, a.survival};
  if (!a.par.empty()) {
    const auto p = parse_list(a.par);
    if (static_cast<int>(p.size()) != parameter_count(tag) - (tag == FamilyTag::t ? 1 : 0))
      throw InputError("--par has the wrong number of values for " + family_name(tag));
    f.theta = p[0];
    if (p.size() > 1) f.delta = p[1];
  } else if (a.tau) {
    if (tag == FamilyTag::bb1 || tag == FamilyTag::bb7) throw InputError("BB1/BB7 need --par or --lambdas, not --tau");
    f.theta = tau_to_param(tag, *a.tau);
  } else if (!a.lambdas.empty()) {
    const auto l = parse_list(a.lambdas);
    if (l.size() != 2) throw InputError("--lambdas needs lambda_L,lambda_U");
    if (tag == FamilyTag::bb1) f = bb1_from_lambdas(l[0], l[1]);
    else if (tag == FamilyTag::bb7) f = bb7_from_lambdas(l[0], l[1]);
    else throw InputError("--lambdas applies to bb1 and bb7 only");
    f.survival = a.survival;
  } else {
    throw InputError("--family needs --par, --tau or --lambdas");
  }
  if (tag == FamilyTag::t) {
    if (!a.nu) throw InputError("the t family needs --nu");
    f.nu = *a.nu;
  }
  validate(f);
  return f;
}

FamilyTag tag_from(const std::string& name) {
  try {
    return parse_family_tag(name);
  } catch (const DomainError& e) {
    throw InputError(e.what());
  }
}

// The K = 2 design used by the simulation study.
FnmParams simulation_design() { return FnmParams(2, {0.3}, {0.0}, {0.8, -0.8}); }

CopulaSpec resolve_copula(const CopulaArgs& a) {
  if (!a.params_json.empty()) {
    json j;
    try {
      j = json::parse(a.params_json);
    } catch (const json::exception& e) {
      throw InputError(std::string("--params is not valid JSON: ") + e.what());
    }
    return parse_copula_spec(j);
  }
  CopulaSpec s;
  if (!a.family.empty()) {
    s.family = family_from_args(tag_from(a.family), a);
    return s;
  }
  if (a.rho.empty()) {
    if (!a.pi.empty() || !a.theta.empty()) throw InputError("FNM parameters need --rho");
    s.fnm = simulation_design();
    return s;
  }
  const auto rho = parse_list(a.rho);
  s.fnm = FnmParams(static_cast<int>(rho.size()), parse_list(a.pi), parse_list(a.theta), rho);
  return s;
}

std::unique_ptr<Copula> make_copula(const CopulaSpec& s) {
  if (s.fnm) return std::make_unique<FnmCopula>(*s.fnm);
  return std::make_unique<FamilyCopula>(*s.family);
}

json spec_json(const CopulaSpec& s) { return s.fnm ? json(*s.fnm) : json(*s.family); }

struct DataArgs {
  std::string path;
  std::string cols;
  std::string header = "auto";
};

void add_data_options(CLI::App* app, DataArgs& d, bool required) {
  auto* opt = app->add_option("--data", d.path, "CSV file");
  if (required) opt->required();
  app->add_option("--cols", d.cols, "two columns by name or 1-based index");
  app->add_option("--header", d.header, "auto, yes or no")->check(CLI::IsMember({"auto", "yes", "no"}));
}

Dataset load(const DataArgs& d) {
  CsvOptions o;
  o.header = d.header == "yes" ? HeaderMode::present : d.header == "no" ? HeaderMode::absent : HeaderMode::automatic;
  return load_csv(d.path, d.cols, o);
}

json dataset_json(const Dataset& d) {
  return json{{"path", d.path},
              {"columns", d.columns},
              {"selected", d.selected},
              {"rows_read", d.rows_read},
              {"rows_dropped", d.rows_dropped},
              {"rows_used", d.rows()},
              {"magic_layout", d.magic_layout}};
}

ModelSpec model_from(const std::string& family, std::optional<int> K, bool survival) {
  if (!family.empty() && K) throw InputError("give either --family or --K, not both");
  if (!family.empty()) return ModelSpec::family_model(tag_from(family), survival);
  const int k = K.value_or(2);
  if (k < 1) throw InputError("--K must be at least 1");
  return ModelSpec::fnm_model(k);
}

std::string fit_csv(const FitResult& r) {
  std::ostringstream s;
  s << "model,parameter,estimate,se,loglik,aic,converged\n";
  for (std::size_t i = 0; i < r.estimates.size(); ++i)
    s << r.model << ',' << r.parameter_names[i] << ',' << format_csv_number(r.estimates[i]) << ','
      << format_csv_number(r.standard_errors[i]) << ',' << format_csv_number(r.loglik) << ','
      << format_csv_number(r.aic) << ',' << (r.converged ? "true" : "false") << '\n';
  return s.str();
}

// ---- fit

struct FitArgs {
  Common common;
  DataArgs data;
  std::string family;
  std::optional<int> K;
  bool survival = false;
  int starts = 10;
};

int cmd_fit(const FitArgs& a, std::ostream& out, std::ostream& err) {
  const auto model = model_from(a.family, a.K, a.survival);
  const auto d = load(a.data);
  if (d.rows_dropped) err << "dropped " << d.rows_dropped << " rows with missing or non-numeric values\n";
  const auto u = pseudo_obs(d.column(0), d.column(1));
  FitOptions o;
  o.n_restarts = a.starts;
  o.seed = resolve_seed(a.common);
  const auto r = fit_ml(model, u, o);
  if (a.common.format == "json") {
    json j = r;
    j["seed"] = o.seed;
    j["data"] = dataset_json(d);
    emit(a.common, dump(j), out);
  } else {
    emit(a.common, seed_comment("fit", o.seed) + fit_csv(r), out);
  }
  if (!r.converged) {
    err << "warning: " << r.model << " fit did not converge (gradient norm " << r.gradient_norm << ")\n";
    return kExitConvergence;
  }
  return kExitOk;
}

// ---- compare

struct CompareArgs {
  Common common;
  DataArgs data;
  std::string Ks = "2,3";
  int starts = 10;
};

struct CompareRow {
  std::string model;
  std::optional<FitResult> fit;
  double tau = std::numeric_limits<double>::quiet_NaN();
  double lambda_L = std::numeric_limits<double>::quiet_NaN();
  double lambda_U = std::numeric_limits<double>::quiet_NaN();
  std::string error;
};

int cmd_compare(const CompareArgs& a, std::ostream& out, std::ostream& err) {
  const auto d = load(a.data);
  if (d.rows_dropped) err << "dropped " << d.rows_dropped << " rows with missing or non-numeric values\n";
  const auto u = pseudo_obs(d.column(0), d.column(1));
  std::vector<ModelSpec> models;
  for (auto tag : {FamilyTag::bvn, FamilyTag::t, FamilyTag::clayton, FamilyTag::gumbel, FamilyTag::frank,
                   FamilyTag::bb1, FamilyTag::bb7})
    models.push_back(ModelSpec::family_model(tag));
  for (auto tag : {FamilyTag::clayton, FamilyTag::gumbel, FamilyTag::bb1, FamilyTag::bb7})
    models.push_back(ModelSpec::family_model(tag, true));
  for (int K : parse_int_list(a.Ks)) {
    if (K < 1) throw InputError("--K values must be at least 1");
    models.push_back(ModelSpec::fnm_model(K));
  }
  const std::uint64_t seed = resolve_seed(a.common);

  std::vector<CompareRow> rows(models.size());
  parallel_for(models.size(), [&](std::size_t i) {
    auto& row = rows[i];
    row.model = models[i].name();
    try {
      FitOptions o;
      o.n_restarts = a.starts;
      o.seed = derive_seed(seed, row.model);
      row.fit = fit_ml(models[i], u, o);
      if (row.fit->family) {
        row.tau = tau_of(*row.fit->family);
        const auto l = lambda_of(*row.fit->family);
        row.lambda_L = l.lambda_L;
        row.lambda_U = l.lambda_U;
      } else {
        row.tau = kendall_tau_numeric(FnmCopula(*row.fit->fnm)).tau;
        row.lambda_L = row.lambda_U = 0.0;
      }
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });
  std::stable_sort(rows.begin(), rows.end(), [](const CompareRow& x, const CompareRow& y) {
    const double ax = x.fit ? x.fit->aic : std::numeric_limits<double>::infinity();
    const double ay = y.fit ? y.fit->aic : std::numeric_limits<double>::infinity();
    return ax < ay;
  });
  const bool any = !rows.empty() && rows.front().fit.has_value();

  if (a.common.format == "json") {
    json j{{"command", "compare"}, {"seed", seed}, {"data", dataset_json(d)}, {"rows", json::array()}};
    for (std::size_t i = 0; i < rows.size(); ++i) {
      json r{{"model", rows[i].model}, {"best", any && i == 0}};
      if (rows[i].fit) {
        r["fit"] = *rows[i].fit;
        r["tau"] = rows[i].tau;
        r["lambda_L"] = rows[i].lambda_L;
        r["lambda_U"] = rows[i].lambda_U;
      } else {
        r["error"] = rows[i].error;
      }
      j["rows"].push_back(r);
    }
    emit(a.common, dump(j), out);
  } else {
    std::ostringstream s;
    s << seed_comment("compare", seed);
    s << "rank,model,parameters,loglik,aic,tau,lambda_L,lambda_U,best,estimates,se,converged,error\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& r = rows[i];
      s << i + 1 << ',' << r.model << ',';
      if (r.fit) {
        std::vector<std::string> est, se;
        for (std::size_t p = 0; p < r.fit->estimates.size(); ++p) {
          est.push_back(r.fit->parameter_names[p] + "=" + format_csv_number(r.fit->estimates[p]));
          se.push_back(r.fit->parameter_names[p] + "=" + format_csv_number(r.fit->standard_errors[p]));
        }
        s << r.fit->parameter_count << ',' << format_csv_number(r.fit->loglik) << ',' << format_csv_number(r.fit->aic)
          << ',' << format_csv_number(r.tau) << ',' << format_csv_number(r.lambda_L) << ','
          << format_csv_number(r.lambda_U) << ',' << (i == 0 ? "*" : "") << ',' << join(est, ";") << ','
          << join(se, ";") << ',' << (r.fit->converged ? "true" : "false") << ",\n";
      } else {
        std::string msg = r.error;
        std::replace(msg.begin(), msg.end(), ',', ';');
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        s << ",NA,NA,NA,NA,NA,,,,false,\"" << msg << "\"\n";
      }
    }
    emit(a.common, s.str(), out);
  }
  for (const auto& r : rows)
    if (!r.error.empty()) err << "warning: " << r.model << " failed: " << r.error << '\n';
  return any ? kExitOk : kExitNumeric;
}

// ---- simulate

struct SimulateArgs {
  Common common;
  CopulaArgs copula;
  std::size_t n = 500;
  std::optional<int> B;
  std::string rates;
  int starts = 1;
};

struct Replication {
  bool ok = false;
  FitResult fit;
};

int simulate_replications(const SimulateArgs& a, const CopulaSpec& spec, std::uint64_t seed, std::ostream& out,
                          std::ostream& err) {
  const int B = *a.B;
  if (B < 1) throw InputError("--B must be at least 1");
  if (a.n < 10) throw InputError("replications need --n of at least 10");
  const auto truth_cop = make_copula(spec);
  const ModelSpec model = spec.fnm ? ModelSpec::fnm_model(spec.fnm->K())
                                   : ModelSpec::family_model(spec.family->tag, spec.family->survival);
  std::vector<double> truth;
  if (spec.fnm) {
    truth = spec.fnm->to_vector();
  } else {
    truth = {spec.family->theta};
    if (spec.family->tag == FamilyTag::t) truth.push_back(spec.family->nu);
    if (spec.family->tag == FamilyTag::bb1 || spec.family->tag == FamilyTag::bb7) truth.push_back(spec.family->delta);
  }

  std::vector<Replication> reps(static_cast<std::size_t>(B));
  parallel_for(reps.size(), [&](std::size_t b) {
    const std::uint64_t rs = derive_seed(seed, "replication-" + std::to_string(b));
    const auto sample = truth_cop->sample(a.n, rs);
    std::vector<double> x(a.n), y(a.n);
    for (std::size_t i = 0; i < a.n; ++i) {
      x[i] = sample[i].first;
      y[i] = sample[i].second;
    }
    FitOptions o;
    o.n_restarts = a.starts;
    o.init = truth;
    o.seed = derive_seed(rs, "fit");
    try {
      reps[b].fit = fit_ml(model, pseudo_obs(x, y), o);
      reps[b].ok = true;
    } catch (const std::exception&) {
    }
  });

  std::vector<std::string> names;
  int failed = 0, nonconverged = 0;
  for (const auto& r : reps) {
    if (!r.ok) ++failed;
    else if (!r.fit.converged) ++nonconverged;
    if (r.ok && names.empty()) names = r.fit.parameter_names;
  }
  if (names.empty()) throw NumericError("every replication failed to fit");

  std::vector<json> params;
  std::ostringstream csv;
  csv << seed_comment("simulate", seed);
  csv << "parameter,truth,mean,bias,sd,rmse,sqrt_mean_var,replications\n";
  for (std::size_t p = 0; p < names.size(); ++p) {
    double sum = 0.0, sq = 0.0, se2 = 0.0;
    int m = 0, mse = 0;
    for (const auto& r : reps) {
      if (!r.ok) continue;
      sum += r.fit.estimates[p];
      ++m;
      if (std::isfinite(r.fit.standard_errors[p])) {
        se2 += r.fit.standard_errors[p] * r.fit.standard_errors[p];
        ++mse;
      }
    }
    const double mean = sum / m;
    for (const auto& r : reps)
      if (r.ok) sq += (r.fit.estimates[p] - mean) * (r.fit.estimates[p] - mean);
    const double sd = m > 1 ? std::sqrt(sq / (m - 1)) : std::numeric_limits<double>::quiet_NaN();
    const double bias = mean - truth[p];
    const double rmse = std::sqrt(bias * bias + (m > 1 ? sq / m : 0.0));
    const double root_mean_var = mse ? std::sqrt(se2 / mse) : std::numeric_limits<double>::quiet_NaN();
    params.push_back(json{{"parameter", names[p]},
                          {"truth", truth[p]},
                          {"mean", mean},
                          {"bias", bias},
                          {"sd", sd},
                          {"rmse", rmse},
                          {"sqrt_mean_var", root_mean_var},
                          {"replications", m}});
    csv << names[p] << ',' << format_csv_number(truth[p]) << ',' << format_csv_number(mean) << ','
        << format_csv_number(bias) << ',' << format_csv_number(sd) << ',' << format_csv_number(rmse) << ','
        << format_csv_number(root_mean_var) << ',' << m << '\n';
  }
  if (a.common.format == "json") {
    json j{{"command", "simulate"}, {"seed", seed},           {"n", a.n},           {"B", B},
           {"copula", spec_json(spec)}, {"failed", failed}, {"nonconverged", nonconverged}, {"parameters", params}};
    emit(a.common, dump(j), out);
  } else {
    emit(a.common, csv.str(), out);
  }
  if (failed || nonconverged)
    err << "note: " << failed << " replications failed and " << nonconverged << " did not converge\n";
  return kExitOk;
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  const auto spec = resolve_copula(a.copula);
  const std::uint64_t seed = resolve_seed(a.common);
  if (a.B) return simulate_replications(a, spec, seed, out, err);
  if (a.n < 1) throw InputError("--n must be positive");
  const auto rates = parse_list(a.rates);
  if (!rates.empty() && (rates.size() != 2 || !(rates[0] > 0.0) || !(rates[1] > 0.0)))
    throw InputError("--rates needs two positive exponential rates");
  const auto sample = make_copula(spec)->sample(a.n, seed);
  std::vector<double> c1(a.n), c2(a.n);
  for (std::size_t i = 0; i < a.n; ++i) {
    c1[i] = sample[i].first;
    c2[i] = sample[i].second;
    if (!rates.empty()) {
      c1[i] = -std::log1p(-c1[i]) / rates[0];
      c2[i] = -std::log1p(-c2[i]) / rates[1];
    }
  }
  const std::string n1 = rates.empty() ? "u1" : "x1", n2 = rates.empty() ? "u2" : "x2";
  json summary{{"command", "simulate"}, {"seed", seed}, {"n", a.n}, {"copula", spec_json(spec)}};
  summary["margins"] = rates.empty() ? json("uniform") : json{{"exponential_rates", rates}};
  if (a.common.format == "json") {
    json j = summary;
    j[n1] = c1;
    j[n2] = c2;
    emit(a.common, dump(j), out);
  } else {
    std::ostringstream s;
    s << seed_comment("simulate", seed) << n1 << ',' << n2 << '\n';
    for (std::size_t i = 0; i < a.n; ++i) s << format_csv_number(c1[i]) << ',' << format_csv_number(c2[i]) << '\n';
    emit(a.common, s.str(), out);
    if (a.common.out_path.empty()) err << dump(summary);
    else out << dump(summary);
  }
  return kExitOk;
}

// ---- kl

struct KlArgs {
  Common common;
  std::string family;
  std::string taus;
  std::vector<std::string> lambdas;
  std::optional<double> nu;
  bool survival = false;
  int K = 2;
  int nq = 15;
  int starts = 10;
  bool discrete = false;
  std::string categories = "5";
  int grid_x = 5;
  double beta1 = 1.0;
  double beta2 = 0.7;
  std::string link = "logit";
  std::string sample_size = "squared";
};

std::string kl_csv(const std::vector<KlReport>& rows, int K, bool discrete) {
  std::ostringstream s;
  s << "family,tau,lambda_L,lambda_U," << (discrete ? "Y,KLx1000," : "KL,");
  for (int k = 1; k < K; ++k) s << "pi" << k << ',';
  for (int k = 1; k < K; ++k) s << "theta" << k << ',';
  for (int k = 1; k <= K; ++k) s << "rho" << k << ',';
  s << "n,converged,error\n";
  for (const auto& r : rows) {
    s << display_name(r.target) << ',' << format_csv_number(r.tau) << ',' << format_csv_number(r.lambda_L) << ','
      << format_csv_number(r.lambda_U) << ',';
    if (discrete) s << r.categories << ',' << format_csv_number(1e3 * r.kl) << ',';
    else s << format_csv_number(r.kl) << ',';
    const std::size_t nk = static_cast<std::size_t>(K);
    for (std::size_t k = 0; k + 1 < nk; ++k) s << (r.fnm ? format_csv_number(r.fnm->pi()[k]) : "NA") << ',';
    for (std::size_t k = 0; k + 1 < nk; ++k) s << (r.fnm ? format_csv_number(r.fnm->theta()[k]) : "NA") << ',';
    for (std::size_t k = 0; k < nk; ++k) s << (r.fnm ? format_csv_number(r.fnm->rho()[k]) : "NA") << ',';
    std::string msg = r.error;
    std::replace(msg.begin(), msg.end(), ',', ';');
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    s << (std::isfinite(r.sample_size) ? format_csv_number(std::round(r.sample_size)) : "NA") << ','
      << (r.converged ? "true" : "false") << ',' << (msg.empty() ? "" : "\"" + msg + "\"") << '\n';
  }
  return s.str();
}

int cmd_kl(const KlArgs& a, std::ostream& out, std::ostream& err) {
  if (a.family.empty()) throw InputError("kl needs --family");
  const FamilyTag tag = tag_from(a.family);
  if (a.K < 1) throw InputError("--K must be at least 1");
  if (a.nq < 2) throw InputError("--nq must be at least 2");
  if (a.starts < 1) throw InputError("--starts must be at least 1");
  std::vector<CopulaFamily> targets;
  if (!a.lambdas.empty()) {
    for (const auto& pair : a.lambdas) {
      CopulaArgs c;
      c.lambdas = pair;
      c.survival = a.survival;
      targets.push_back(family_from_args(tag, c));
    }
  }
  for (double tau : parse_list(a.taus)) {
    CopulaArgs c;
    c.tau = tau;
    c.nu = a.nu;
    c.survival = a.survival;
    targets.push_back(family_from_args(tag, c));
  }
  if (targets.empty()) throw InputError("kl needs --taus or --lambdas");

  KlOptions o;
  o.n_starts = a.starts;
  o.seed = resolve_seed(a.common);
  o.form = a.sample_size == "printed" ? SampleSizeForm::printed : SampleSizeForm::squared;
  std::vector<KlReport> rows;
  std::vector<int> cats;
  if (a.discrete) {
    cats = parse_int_list(a.categories);
    if (cats.empty()) throw InputError("--categories is empty");
    for (int Y : cats) {
      if (Y < 2) throw InputError("--categories values must be at least 2");
      const auto spec = OrdinalSpec::equally_weighted(Y, a.grid_x, a.beta1, a.beta2,
                                                      a.link == "probit" ? Link::probit : Link::logit);
      auto block = kl_discrete_table(targets, spec, a.K, o);
      rows.insert(rows.end(), block.begin(), block.end());
    }
  } else {
    rows = kl_table(targets, a.K, gl_rule(static_cast<std::size_t>(a.nq)), o);
  }

  if (a.common.format == "json") {
    json j{{"command", "kl"},  {"seed", o.seed},         {"K", a.K},
           {"nq", a.nq},       {"starts", a.starts},     {"discrete", a.discrete},
           {"rows", rows},     {"sample_size_form", a.sample_size}};
    if (a.discrete) j["discrete_spec"] = json{{"categories", cats}, {"grid_x", a.grid_x}, {"beta1", a.beta1},
                                              {"beta2", a.beta2}, {"link", a.link}};
    emit(a.common, dump(j), out);
  } else {
    emit(a.common, seed_comment("kl", o.seed) + kl_csv(rows, a.K, a.discrete), out);
  }
  std::size_t failed = 0;
  for (const auto& r : rows) {
    if (!r.error.empty()) {
      ++failed;
      err << "warning: " << display_name(r.target) << " tau=" << r.tau << " failed: " << r.error << '\n';
    }
  }
  return failed == rows.size() ? kExitNumeric : kExitOk;
}

// ---- contour

struct ContourArgs {
  Common common;
  CopulaArgs copula;
  DataArgs data;
  std::optional<int> K;
  int grid = 100;
  int starts = 10;
  std::string points_out;
};

int cmd_contour(const ContourArgs& a, std::ostream& out, std::ostream& err) {
  if (a.grid < 2) throw InputError("--grid must be at least 2");
  const std::uint64_t seed = resolve_seed(a.common);
  std::optional<Dataset> d;
  std::optional<PseudoObservations> u;
  if (!a.data.path.empty()) {
    d = load(a.data);
    if (d->rows_dropped) err << "dropped " << d->rows_dropped << " rows with missing or non-numeric values\n";
    u = pseudo_obs(d->column(0), d->column(1));
  }
  CopulaSpec spec;
  std::optional<FitResult> fit;
  if (u && a.K) {
    FitOptions o;
    o.n_restarts = a.starts;
    o.seed = seed;
    fit = fit_ml(ModelSpec::fnm_model(*a.K), *u, o);
    spec.fnm = fit->fnm;
  } else {
    if (a.K) throw InputError("--K in contour fits a model and needs --data");
    spec = resolve_copula(a.copula);
  }
  const auto cop = make_copula(spec);
  const int g = a.grid;
  std::vector<double> z(static_cast<std::size_t>(g));
  for (int i = 0; i < g; ++i) z[static_cast<std::size_t>(i)] = -3.0 + 6.0 * i / (g - 1);
  std::vector<std::vector<double>> dens(static_cast<std::size_t>(g), std::vector<double>(static_cast<std::size_t>(g)));
  parallel_for(static_cast<std::size_t>(g), [&](std::size_t i) {
    for (std::size_t j = 0; j < static_cast<std::size_t>(g); ++j)
      dens[i][j] = cop->pdf(norm_cdf(z[i]), norm_cdf(z[j])) * norm_pdf(z[i]) * norm_pdf(z[j]);
  });
  std::vector<double> s1, s2;
  if (u) {
    for (std::size_t i = 0; i < u->size(); ++i) {
      s1.push_back(norm_quantile(u->u1[i]));
      s2.push_back(norm_quantile(u->u2[i]));
    }
  }

  if (a.common.format == "json") {
    json j{{"command", "contour"}, {"seed", seed}, {"copula", spec_json(spec)}, {"z", z}, {"density", dens}};
    if (fit) j["fit"] = *fit;
    if (u) j["points"] = json{{"z1", s1}, {"z2", s2}};
    emit(a.common, dump(j), out);
  } else {
    std::ostringstream s;
    s << seed_comment("contour", seed) << "z1,z2,density\n";
    for (std::size_t i = 0; i < z.size(); ++i)
      for (std::size_t j = 0; j < z.size(); ++j)
        s << format_csv_number(z[i]) << ',' << format_csv_number(z[j]) << ',' << format_csv_number(dens[i][j]) << '\n';
    emit(a.common, s.str(), out);
  }
  if (u && !a.points_out.empty()) {
    std::ofstream f(a.points_out, std::ios::binary);
    if (!f) throw InputError("cannot write " + a.points_out);
    f << "z1,z2\n";
    for (std::size_t i = 0; i < s1.size(); ++i) f << format_csv_number(s1[i]) << ',' << format_csv_number(s2[i]) << '\n';
  }
  if (fit && !fit->converged) return kExitConvergence;
  return kExitOk;
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("--out", c.out_path, "write output to this file instead of stdout");
  app->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app->add_option("--seed", c.seed, "random seed (an entropy seed is drawn and echoed when omitted)");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Finite normal mixture copulas: fitting, simulation and KL comparisons", "fnmcop"};
  app.require_subcommand(1);

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "maximum-likelihood fit on rank pseudo-observations");
  add_common(fit_cmd, fit.common);
  fit.common.format = "json";
  add_data_options(fit_cmd, fit.data, true);
  fit_cmd->add_option("--family", fit.family, "parametric family");
  fit_cmd->add_option("--K", fit.K, "number of FNM components");
  fit_cmd->add_flag("--survival", fit.survival, "survival version of the family");
  fit_cmd->add_option("--starts", fit.starts, "optimizer starts");

  CompareArgs cmp;
  auto* cmp_cmd = app.add_subcommand("compare", "fit all reference families and FNM models, sorted by AIC");
  add_common(cmp_cmd, cmp.common);
  add_data_options(cmp_cmd, cmp.data, true);
  cmp_cmd->add_option("--K", cmp.Ks, "FNM component counts, e.g. 1,2,3");
  cmp_cmd->add_option("--starts", cmp.starts, "optimizer starts per model");

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "draw a sample, or run a replication study with --B");
  add_common(sim_cmd, sim.common);
  add_copula_options(sim_cmd, sim.copula);
  sim_cmd->add_option("--n", sim.n, "sample size");
  sim_cmd->add_option("--B", sim.B, "number of replications (fits each sample)");
  sim_cmd->add_option("--rates", sim.rates, "exponential margin rates lambda1,lambda2");
  sim_cmd->add_option("--starts", sim.starts, "optimizer starts per replication");

  KlArgs kl;
  auto* kl_cmd = app.add_subcommand("kl", "minimized KL distance from a reference family to the FNM copula");
  add_common(kl_cmd, kl.common);
  kl_cmd->add_option("--family", kl.family, "reference family")->required();
  kl_cmd->add_option("--taus", kl.taus, "Kendall's tau values: a,b,c or start:stop:step");
  kl_cmd->add_option("--lambdas", kl.lambdas, "lambda_L,lambda_U pair for BB1/BB7 (repeatable)");
  kl_cmd->add_option("--nu", kl.nu, "t degrees of freedom");
  kl_cmd->add_flag("--survival", kl.survival, "survival version of the family");
  kl_cmd->add_option("--K", kl.K, "FNM components");
  kl_cmd->add_option("--nq", kl.nq, "Gauss-Legendre points per dimension");
  kl_cmd->add_option("--starts", kl.starts, "optimizer starts");
  kl_cmd->add_flag("--discrete", kl.discrete, "compare discretized ordinal models");
  kl_cmd->add_option("--categories", kl.categories, "ordinal categories (list allowed)");
  kl_cmd->add_option("--grid-x", kl.grid_x, "covariate grid size");
  kl_cmd->add_option("--beta1", kl.beta1, "slope of the first ordinal regression");
  kl_cmd->add_option("--beta2", kl.beta2, "slope of the second ordinal regression");
  kl_cmd->add_option("--link", kl.link, "logit or probit")->check(CLI::IsMember({"logit", "probit"}));
  kl_cmd->add_option("--sample-size", kl.sample_size, "squared or printed")
      ->check(CLI::IsMember({"squared", "printed"}));

  ContourArgs con;
  auto* con_cmd = app.add_subcommand("contour", "density grid with standard normal margins on [-3, 3]^2");
  add_common(con_cmd, con.common);
  add_copula_options(con_cmd, con.copula);
  add_data_options(con_cmd, con.data, false);
  con_cmd->add_option("--K", con.K, "fit a K-FNM copula to --data and contour the fit");
  con_cmd->add_option("--grid", con.grid, "grid points per axis");
  con_cmd->add_option("--starts", con.starts, "optimizer starts when fitting");
  con_cmd->add_option("--points-out", con.points_out, "CSV file for the normal scores of --data");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (fit_cmd->parsed()) return cmd_fit(fit, out, err);
    if (cmp_cmd->parsed()) return cmd_compare(cmp, out, err);
    if (sim_cmd->parsed()) return cmd_simulate(sim, out, err);
    if (kl_cmd->parsed()) return cmd_kl(kl, out, err);
    if (con_cmd->parsed()) return cmd_contour(con, out, err);
  } catch (const InputError& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const DomainError& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  }
  return kExitInput;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, out, err);
}

}  // namespace fnmcop
