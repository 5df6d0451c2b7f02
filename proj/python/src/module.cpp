#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include <nlohmann/json.hpp>

#include "fnmcop/cli.hpp"
#include "fnmcop/dependence.hpp"
#include "fnmcop/errors.hpp"
#include "fnmcop/estimation.hpp"
#include "fnmcop/families.hpp"
#include "fnmcop/fnm.hpp"
#include "fnmcop/kl.hpp"
#include "fnmcop/quadrature.hpp"
#include "fnmcop/serialize.hpp"

namespace py = pybind11;
using namespace fnmcop;

namespace {

py::object to_python(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

std::vector<double> as_vector(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 1) throw InputError("expected a one-dimensional array");
  return {a.data(), a.data() + a.size()};
}

PseudoObservations as_pseudo(const py::array_t<double>& u1, const py::array_t<double>& u2) {
  PseudoObservations u{as_vector(u1), as_vector(u2)};
  if (u.u1.size() != u.u2.size()) throw InputError("u1 and u2 differ in length");
  return u;
}

py::array_t<double> sample_array(const Copula& c, std::size_t n, std::uint64_t seed) {
  std::vector<UniformPair> s;
  {
    py::gil_scoped_release release;
    s = c.sample(n, seed);
  }
  py::array_t<double> out({static_cast<py::ssize_t>(n), py::ssize_t{2}});
  auto r = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < n; ++i) {
    r(static_cast<py::ssize_t>(i), 0) = s[i].first;
    r(static_cast<py::ssize_t>(i), 1) = s[i].second;
  }
  return out;
}

ModelSpec model_spec(const std::string& model, bool survival) {
  const std::string m = model;
  if (m.rfind("fnm", 0) == 0) {
    const auto dash = m.find('-');
    if (dash == std::string::npos) throw InputError("FNM models are named fnm-K, e.g. fnm-2");
    return ModelSpec::fnm_model(std::stoi(m.substr(dash + 1)));
  }
  return ModelSpec::family_model(parse_family_tag(m), survival);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Finite normal mixture copulas and reference copula families";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_RuntimeError);
  py::register_exception<OptimizationError>(m, "OptimizationError", PyExc_RuntimeError);

  py::class_<FnmParams>(m, "FnmParams")
      .def(py::init<int, std::vector<double>, std::vector<double>, std::vector<double>>(), py::arg("K"),
           py::arg("pi"), py::arg("theta"), py::arg("rho"))
      .def_static("independence", &FnmParams::independence, py::arg("K"))
      .def_static("from_vector", &FnmParams::from_vector, py::arg("K"), py::arg("natural"))
      .def_property_readonly("K", &FnmParams::K)
      .def_property_readonly("pi", &FnmParams::pi)
      .def_property_readonly("theta", &FnmParams::theta)
      .def_property_readonly("rho", &FnmParams::rho)
      .def_property_readonly("weights", &FnmParams::weights)
      .def("to_vector", &FnmParams::to_vector)
      .def("to_dict", [](const FnmParams& p) { return to_python(nlohmann::json(p)); })
      .def("pearson_rho", [](const FnmParams& p) { return pearson_rho(p); })
      .def(py::self == py::self)
      .def("__repr__", [](const FnmParams& p) { return "FnmParams(" + nlohmann::json(p).dump() + ")"; });

  py::class_<CopulaFamily>(m, "CopulaFamily")
      .def(py::init([](const std::string& name, double theta, double delta, double nu, bool surv) {
             CopulaFamily f{parse_family_tag(name), theta, delta, nu, surv};
             validate(f);
             return f;
           }),
           py::arg("family"), py::arg("theta"), py::arg("delta") = 0.0, py::arg("nu") = 0.0,
           py::arg("survival") = false)
      .def_static(
          "from_tau",
          [](const std::string& name, double tau, double nu, bool surv) {
            const auto tag = parse_family_tag(name);
            CopulaFamily f{tag, tau_to_param(tag, tau), 0.0, nu, surv};
            validate(f);
            return f;
          },
          py::arg("family"), py::arg("tau"), py::arg("nu") = 0.0, py::arg("survival") = false)
      .def_static(
          "from_lambdas",
          [](const std::string& name, double lower, double upper) {
            const auto tag = parse_family_tag(name);
            if (tag == FamilyTag::bb1) return bb1_from_lambdas(lower, upper);
            if (tag == FamilyTag::bb7) return bb7_from_lambdas(lower, upper);
            throw InputError("tail-dependence parametrization exists only for bb1 and bb7");
          },
          py::arg("family"), py::arg("lambda_L"), py::arg("lambda_U"))
      .def_property_readonly("family", [](const CopulaFamily& f) { return family_name(f.tag); })
      .def_readonly("theta", &CopulaFamily::theta)
      .def_readonly("delta", &CopulaFamily::delta)
      .def_readonly("nu", &CopulaFamily::nu)
      .def_readonly("survival", &CopulaFamily::survival)
      .def("survival_version", [](const CopulaFamily& f) { return survival(f); })
      .def("tau", [](const CopulaFamily& f) { return tau_of(f); })
      .def("tail_dependence",
           [](const CopulaFamily& f) {
             const auto t = lambda_of(f);
             return py::dict(py::arg("lambda_L") = t.lambda_L, py::arg("lambda_U") = t.lambda_U,
                             py::arg("kappa_L") = t.kappa_L, py::arg("kappa_U") = t.kappa_U);
           })
      .def("to_dict", [](const CopulaFamily& f) { return to_python(nlohmann::json(f)); })
      .def(py::self == py::self)
      .def("__repr__", [](const CopulaFamily& f) { return "CopulaFamily(" + nlohmann::json(f).dump() + ")"; });

  py::class_<Copula>(m, "Copula")
      .def("pdf", py::vectorize(&Copula::pdf), py::arg("u1"), py::arg("u2"))
      .def("log_pdf", py::vectorize(&Copula::log_pdf), py::arg("u1"), py::arg("u2"))
      .def("cdf", py::vectorize(&Copula::cdf), py::arg("u1"), py::arg("u2"))
      .def("h", py::vectorize(&Copula::h), py::arg("u2"), py::arg("u1"))
      .def("h_inverse", py::vectorize(&Copula::h_inverse), py::arg("q"), py::arg("u1"))
      .def("sample", &sample_array, py::arg("n"), py::arg("seed"))
      .def_property_readonly("name", &Copula::name);

  py::class_<FnmCopula, Copula>(m, "FnmCopula")
      .def(py::init<FnmParams>(), py::arg("params"))
      .def_property_readonly("params", &FnmCopula::params);

  py::class_<FamilyCopula, Copula>(m, "FamilyCopula")
      .def(py::init<CopulaFamily>(), py::arg("family"))
      .def_property_readonly("family", &FamilyCopula::family);

  m.def(
      "kendall_tau",
      [](const Copula& c, double abs_tol) {
        CubatureOptions o;
        o.abs_tol = abs_tol;
        return kendall_tau_numeric(c, o).tau;
      },
      py::arg("copula"), py::arg("abs_tol") = 1e-5, py::call_guard<py::gil_scoped_release>());

  m.def(
      "kendall_tau_empirical",
      [](const py::array_t<double>& x, const py::array_t<double>& y) {
        return kendall_tau_empirical(as_vector(x), as_vector(y));
      },
      py::arg("x"), py::arg("y"));

  m.def(
      "pseudo_obs",
      [](const py::array_t<double>& x, const py::array_t<double>& y) {
        const auto u = pseudo_obs(as_vector(x), as_vector(y));
        return py::make_tuple(py::array_t<double>(py::ssize_t(u.size()), u.u1.data()),
                              py::array_t<double>(py::ssize_t(u.size()), u.u2.data()));
      },
      py::arg("x"), py::arg("y"));

  m.def(
      "loglik",
      [](const Copula& c, const py::array_t<double>& u1, const py::array_t<double>& u2) {
        return loglik(c, as_pseudo(u1, u2));
      },
      py::arg("copula"), py::arg("u1"), py::arg("u2"));

  m.def(
      "fit",
      [](const py::array_t<double>& u1, const py::array_t<double>& u2, const std::string& model, bool surv,
         int starts, std::uint64_t seed) {
        const auto u = as_pseudo(u1, u2);
        FitOptions o;
        o.n_restarts = starts;
        o.seed = seed;
        FitResult r;
        {
          py::gil_scoped_release release;
          r = fit_ml(model_spec(model, surv), u, o);
        }
        return to_python(nlohmann::json(r));
      },
      py::arg("u1"), py::arg("u2"), py::arg("model") = "fnm-2", py::arg("survival") = false, py::arg("starts") = 0,
      py::arg("seed") = 20240611);

  m.def(
      "kl_minimize",
      [](const CopulaFamily& target, int K, std::size_t nq, int starts, std::uint64_t seed) {
        KlOptions o;
        o.n_starts = starts;
        o.seed = seed;
        KlReport r;
        {
          py::gil_scoped_release release;
          r = kl_minimize(target, K, gl_rule(nq), o);
        }
        return to_python(nlohmann::json(r));
      },
      py::arg("target"), py::arg("K") = 2, py::arg("nq") = 15, py::arg("starts") = 10, py::arg("seed") = 20240611);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = run_cli(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
