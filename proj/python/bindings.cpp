#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "scaleqm/cli.hpp"
#include "scaleqm/config.hpp"
#include "scaleqm/errors.hpp"
#include "scaleqm/perturbation.hpp"
#include "scaleqm/solver.hpp"

namespace py = pybind11;
using namespace scaleqm;

namespace {

ProblemConfig config_with_rule(const std::string& text, const std::optional<std::string>& rule) {
  ProblemConfig cfg = parse_config(text);
  if (rule) cfg.rule = parse_rule(*rule);
  return cfg;
}

py::dict problem_dict(const ScaledProblem& p) {
  py::dict d;
  d["family"] = family_name(p.family);
  d["rule"] = p.rule;
  d["ftilde"] = p.ftilde.to_string();
  d["couplings"] = std::map<std::string, double>(p.couplings.begin(), p.couplings.end());
  d["length"] = p.length.magnitude;
  d["energy_unit"] = p.energy_unit.magnitude;
  d["time_unit"] = p.time_unit.magnitude;
  d["domain"] = py::make_tuple(p.domain_lo(), p.domain_hi());
  d["report"] = report(p);
  return d;
}

py::list series_list(const RationalSeries& s) {
  py::list out;
  for (const auto& c : s.coeffs)
    out.append(py::make_tuple(boost::multiprecision::numerator(c).str(), boost::multiprecision::denominator(c).str()));
  return out;
}

}  // namespace

PYBIND11_MODULE(_scaleqm, m) {
  m.doc() = "Nondimensionalization, 1D bound states, scattering and exact perturbation series";

  py::register_exception<Error>(m, "ScaleQMError", PyExc_RuntimeError);

  m.def(
      "nondim",
      [](const std::string& text, std::optional<std::string> rule) {
        return problem_dict(scaled_problem(config_with_rule(text, rule)));
      },
      py::arg("config_text"), py::arg("rule") = py::none(),
      "Scaled problem of a config: units, couplings, ftilde and the text report.");

  m.def(
      "bound_states",
      [](const std::string& text, int count, double h, const std::string& backend, std::optional<std::string> rule) {
        ScaledProblem p = scaled_problem(config_with_rule(text, rule));
        SolveOptions opts;
        opts.h = h;
        if (backend == "fd")
          opts.backend = Backend::FiniteDifference;
        else if (backend != "numerov")
          throw UsageError("unknown backend '" + backend + "'");
        BoundStateResult r;
        {
          py::gil_scoped_release release;
          r = bound_states(p, count, opts);
        }
        py::list states;
        for (const auto& s : r.states) {
          py::dict d;
          d["n"] = s.n;
          d["E_tilde"] = s.E;
          d["E_SI"] = p.to_physical(s.E).magnitude;
          d["residual"] = s.residual;
          states.append(d);
        }
        py::dict out;
        out["states"] = states;
        out["partial"] = r.partial;
        out["note"] = r.note;
        return out;
      },
      py::arg("config_text"), py::arg("count") = 5, py::arg("h") = 1e-3, py::arg("backend") = "numerov",
      py::arg("rule") = py::none());

  m.def(
      "transmission",
      [](double lambda, double E, double step) {
        double hb = ConstantRegistry::codata().hbar().magnitude;
        Quantity me = ConstantRegistry::codata().electron_mass();
        double a = 1e-9;
        auto spec = catalog::rect_barrier(Quantity(lambda * hb * hb / (me.magnitude * a * a), Dimension::energy()),
                                          Quantity(a, Dimension::length()));
        auto t = transmission_numeric(nondimensionalize(spec, me, rule::DepthBased{}), E, step);
        return py::make_tuple(t.T, t.R, transmission_closed(E, lambda).T);
      },
      py::arg("lam"), py::arg("E"), py::arg("step") = 1e-3,
      "(T, R, T_closed) for a rectangular barrier; E in units of the height.");

  m.def(
      "rs_series",
      [](int n, int order, const std::string& poly) { return series_list(rs_series(n, order, Polynomial::parse(poly))); },
      py::arg("n"), py::arg("order"), py::arg("poly") = "4:1",
      "Exact coefficients as (numerator, denominator) strings.");

  m.def(
      "hypervirial_series", [](int n, int order) { return series_list(hypervirial_series(n, order)); }, py::arg("n"),
      py::arg("order"));

  m.def(
      "lint",
      [](const std::string& text) {
        std::vector<std::string> out;
        for (const auto& d : lint_config(parse_config(text))) out.push_back(d.to_string());
        return out;
      },
      py::arg("config_text"));

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
      py::arg("args"), "Runs a scaleqm subcommand; returns (exit_code, stdout, stderr).");
}
