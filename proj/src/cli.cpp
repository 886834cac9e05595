#include "scaleqm/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include "scaleqm/config.hpp"
#include "scaleqm/errors.hpp"
#include "scaleqm/perturbation.hpp"
#include "scaleqm/solver.hpp"

namespace scaleqm {

namespace {

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      std::size_t used = 0;
      const std::string t = item.substr(item.find_first_not_of(" \t") == std::string::npos ? 0 : item.find_first_not_of(" \t"));
      const double v = std::stod(t, &used);
      if (t.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(t);
      out.push_back(v);
    } catch (const std::exception&) {
      throw UsageError(std::string("bad number '") + item + "' in " + what);
    }
  }
  if (out.empty()) throw UsageError(std::string("empty list for ") + what);
  return out;
}

Backend parse_backend(const std::string& s) {
  if (s == "numerov") return Backend::Numerov;
  if (s == "fd") return Backend::FiniteDifference;
  throw UsageError("unknown backend '" + s + "' (use numerov or fd)");
}

std::string solve_csv(const ScaledProblem& p, const BoundStateResult& r) {
  std::string s = csv_header() + "\n";
  for (const auto& row : csv_rows(p, r)) s += csv_line(row) + "\n";
  return s;
}

void check_converged(const BoundStateResult& r) {
  for (const auto& st : r.states)
    if (!st.converged)
      throw NonConvergence("state n = " + std::to_string(st.n) + " did not converge (residual " +
                           format_double(st.residual) + ")");
}

ScaledProblem barrier_problem(double lambda) {
  if (!(lambda > 0)) throw UsageError("--lambda must be positive");
  ScaledProblem p;
  p.family = Family::RectBarrier;
  p.rule = "DepthBased";
  p.ftilde = parse_expr("piecewise([-inf, 0]: 0, [0, lambda^(1/2)]: 1, [lambda^(1/2), inf]: 0)");
  p.couplings = {{"lambda", lambda}};
  p.lo = parse_expr("-inf");
  p.hi = parse_expr("inf");
  return p;
}

const char* kGridHelp = "Dimensionless grid step in units of the length unit L";

struct Runner {
  std::ostream& out;
  std::ostream& err;
  ConstantRegistry constants = ConstantRegistry::from_environment();

  void emit(const std::string& text, const std::string& path) {
    if (path.empty()) {
      out << text;
      return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw UsageError("cannot write '" + path + "'");
    f << text;
    if (!f) throw UsageError("failed writing '" + path + "'");
  }

  ProblemConfig config(const std::string& path) { return load_config(path, constants); }
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Runner run{out, err};
  CLI::App app{"scaleqm: nondimensionalize, solve and check 1D quantum problems", "scaleqm"};
  app.require_subcommand(1);
  app.footer("Exit codes: 0 success, 1 usage error, 2 numeric non-convergence, 3 lint failure.\n"
             "SCALEQM_CONSTANTS names a constants file replacing the built-in CODATA 2018 values.");
  const std::string keys = config_key_help();

  // nondim
  std::string cfg_path, out_path, rule_text;
  bool both = false;
  auto* nondim = app.add_subcommand("nondim", "Derive length, energy and time units and the dimensionless couplings");
  nondim->add_option("config", cfg_path, "Problem config file")->required();
  nondim->add_option("--rule", rule_text, "Scaling rule overriding the config 'rule' key");
  nondim->add_flag("--both", both, "Report both GivenLength(a) and DepthBased scalings (V0 f(x/a) potentials)");
  nondim->add_option("--out", out_path, "Write the report here instead of standard output");
  nondim->footer(keys);

  // solve
  int count = 5;
  double h = 1e-3;
  std::string backend = "numerov";
  bool no_parity = false;
  std::optional<double> x_min, x_max;
  auto* solve = app.add_subcommand("solve", "Lowest bound states of the dimensionless problem as CSV");
  solve->add_option("config", cfg_path, "Problem config file")->required();
  solve->add_option("--count", count, "Number of states (default 5)")->check(CLI::PositiveNumber);
  solve->add_option("--step", h, kGridHelp)->check(CLI::PositiveNumber);
  solve->add_option("--backend", backend, "numerov (default) or fd");
  solve->add_flag("--no-parity", no_parity, "Solve on the whole line even for even potentials");
  solve->add_option("--x-min", x_min, "Fixed grid start, dimensionless (with --x-max)");
  solve->add_option("--x-max", x_max, "Fixed grid end, dimensionless (with --x-min)");
  solve->add_option("--rule", rule_text, "Scaling rule overriding the config 'rule' key");
  solve->add_option("--out", out_path, "Write CSV here instead of standard output");
  solve->footer("Columns: family, coupling names, coupling values (';'-joined, dimensionless), n (node count),\n"
                "E_tilde (units of hbar^2/(m L^2)), E_SI (J), residual (|E(h) - E(h/2)|, dimensionless).\n\n" +
                keys);

  // scatter
  std::string etilde_text;
  std::optional<double> lambda;
  std::string scatter_cfg;
  auto* scatter = app.add_subcommand("scatter", "Transmission and reflection through a potential step sequence");
  scatter->add_option("config", scatter_cfg, "Problem config file (omit to use --lambda)");
  scatter->add_option("--lambda", lambda, "Barrier coupling m a^2 V0 / hbar^2, dimensionless");
  scatter->add_option("--etilde", etilde_text, "Comma-separated incident energies E/V0 (DepthBased units)")->required();
  scatter->add_option("--step", h, "Maximum slice width, dimensionless")->check(CLI::PositiveNumber);
  scatter->add_option("--out", out_path, "Write CSV here instead of standard output");
  scatter->footer("Columns: lambda, E_tilde, T, R, T_closed (closed form, rectangular barrier only).\n\n" + keys);

  // pt
  int pt_n = 0, order = 8;
  std::string poly = "4:1", method = "rs";
  std::optional<double> pt_lambda;
  std::string strong_text;
  std::optional<int> atom_n;
  int atom_z = 1;
  int threads = 0;
  auto* pt = app.add_subcommand("pt", "Exact Rayleigh-Schrodinger series of x^2/2 + lambda P(x)");
  pt->add_option("--n", pt_n, "Oscillator state index (default 0)")->check(CLI::NonNegativeNumber);
  pt->add_option("--order", order, "Highest order J (default 8, at most 12)")->check(CLI::NonNegativeNumber);
  pt->add_option("--poly", poly, "Perturbation P as 'degree:coefficient' terms, e.g. '3:1,4:1/2' (default 4:1)");
  pt->add_option("--method", method, "rs (oscillator basis) or hypervirial (quartic only)");
  pt->add_option("--lambda", pt_lambda, "Print partial sums at this dimensionless coupling");
  pt->add_option("--strong", strong_text, "Comma-separated increasing couplings for the strong-coupling probe");
  pt->add_option("--atom", atom_n, "Electron count N for the 1/Z series form of an atom");
  pt->add_option("--Z", atom_z, "Nuclear charge for --atom")->check(CLI::PositiveNumber);
  pt->add_option("--threads", threads, "Worker threads for --strong (0 = hardware)")->check(CLI::NonNegativeNumber);
  pt->add_option("--out", out_path, "Write results here instead of standard output");
  pt->footer("Series lines: j, numerator, denominator, float_value. All inputs are dimensionless.");

  // sweep
  std::string name;
  double from = 0, to = 0;
  int steps = 10;
  bool log_steps = false, physical = false;
  int sweep_threads = 1;
  auto* sweep = app.add_subcommand("sweep", "Bound states over a range of one coupling or SI parameter");
  sweep->add_option("config", cfg_path, "Problem config file")->required();
  sweep->add_option("--coupling", name, "Coupling to vary (a parameter name with --physical)")->required();
  sweep->add_option("--from", from, "First value (dimensionless, or SI with --physical)")->required();
  sweep->add_option("--to", to, "Last value (dimensionless, or SI with --physical)")->required();
  sweep->add_option("--steps", steps, "Number of values (default 10)")->check(CLI::PositiveNumber);
  sweep->add_flag("--log", log_steps, "Geometric spacing");
  sweep->add_flag("--physical", physical, "Vary the SI parameter and report the induced coupling");
  sweep->add_option("--count", count, "States per value (default 5)")->check(CLI::PositiveNumber);
  sweep->add_option("--step", h, kGridHelp)->check(CLI::PositiveNumber);
  sweep->add_option("--threads", sweep_threads, "Worker threads (default 1); output does not depend on it")
      ->check(CLI::PositiveNumber);
  sweep->add_option("--out", out_path, "Write CSV here instead of standard output");
  sweep->footer("Columns as for 'solve'.\n\n" + keys);

  // lint
  auto* lint_cmd = app.add_subcommand("lint", "Dimensional lint of a config and its unit assumptions");
  lint_cmd->add_option("config", cfg_path, "Problem config file")->required();
  lint_cmd->footer(keys);

  // units
  std::string mass_text, length_text;
  auto* units = app.add_subcommand("units", "Constants, atomic units and the units of a mass/length pair");
  units->add_option("--mass", mass_text, "Mass as '<value> M1' (kg)");
  units->add_option("--length", length_text, "Length as '<value> L1' (m)");
  units->add_option("--out", out_path, "Write here instead of standard output");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    const CLI::App* target = &app;
    for (const auto* sub : app.get_subcommands()) target = sub;
    out << target->help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "scaleqm: " << e.what() << "\n";
    err << "Run 'scaleqm --help' for usage.\n";
    return kExitUsage;
  }

  try {
    if (nondim->parsed()) {
      ProblemConfig cfg = run.config(cfg_path);
      if (!rule_text.empty()) cfg.rule = parse_rule(rule_text);
      std::string text;
      if (both) {
        const auto [a, b] = nondimensionalize_both(build_spec(cfg), require_mass(cfg), run.constants);
        text = report(a) + "\n" + report(b);
      } else {
        text = report(scaled_problem(cfg, run.constants));
      }
      run.emit(text, out_path);
      return kExitOk;
    }

    if (solve->parsed()) {
      ProblemConfig cfg = run.config(cfg_path);
      if (!rule_text.empty()) cfg.rule = parse_rule(rule_text);
      const ScaledProblem p = scaled_problem(cfg, run.constants);
      SolveOptions o;
      o.h = h;
      o.backend = parse_backend(backend);
      o.use_parity = !no_parity;
      BoundStateResult r;
      if (x_min || x_max) {
        if (!x_min || !x_max) throw UsageError("--x-min and --x-max must be given together");
        GridSpec g;
        g.x_min = *x_min;
        g.x_max = *x_max;
        g.h = h;
        r = bound_states(p, g, count, o);
      } else {
        r = bound_states(p, count, o);
      }
      if (r.partial) err << "scaleqm: " << r.note << "\n";
      check_converged(r);
      run.emit(solve_csv(p, r), out_path);
      return kExitOk;
    }

    if (scatter->parsed()) {
      ScaledProblem p;
      if (!scatter_cfg.empty()) {
        if (lambda) throw UsageError("give either a config or --lambda, not both");
        p = scaled_problem(run.config(scatter_cfg), run.constants);
      } else {
        if (!lambda) throw UsageError("scatter needs a config file or --lambda");
        p = barrier_problem(*lambda);
      }
      const bool closed = p.family == Family::RectBarrier && p.rule == "DepthBased";
      const auto it = p.couplings.find("lambda");
      const double lam = it == p.couplings.end() ? std::nan("") : it->second;
      std::string text = "lambda,E_tilde,T,R,T_closed\n";
      for (double E : parse_list(etilde_text, "--etilde")) {
        const auto t = transmission_numeric(p, E, h);
        text += format_double(lam) + "," + format_double(E) + "," + format_double(t.T) + "," + format_double(t.R) + ",";
        if (closed) text += format_double(transmission_closed(E, lam).T);
        text += "\n";
      }
      run.emit(text, out_path);
      return kExitOk;
    }

    if (pt->parsed()) {
      std::string text;
      if (atom_n) {
        text = atomic_series_report(atomic_series(*atom_n, atom_z, order));
      } else if (!strong_text.empty()) {
        const auto probe = strong_coupling_probe(parse_list(strong_text, "--strong"), pt_n, threads);
        text = "lambda,ratio\n";
        for (std::size_t i = 0; i < probe.lambdas.size(); ++i)
          text += format_double(probe.lambdas[i]) + "," + format_double(probe.ratios[i]) + "\n";
        text += "e0," + format_double(probe.e0) + "\ne1," + format_double(probe.e1) +
                "\nmonotone," + (probe.monotone ? "true" : "false") + "\n";
      } else {
        RationalSeries s;
        if (method == "rs") s = rs_series(pt_n, order, Polynomial::parse(poly));
        else if (method == "hypervirial") {
          if (poly != "4:1") throw UsageError("the hypervirial method handles only the quartic perturbation 4:1");
          s = hypervirial_series(pt_n, order);
        } else {
          throw UsageError("unknown method '" + method + "' (use rs or hypervirial)");
        }
        if (pt_lambda) {
          const auto sums = weak_coupling_eval(s, *pt_lambda, order);
          text = "j,partial_sum\n";
          for (std::size_t j = 0; j < sums.size(); ++j) text += std::to_string(j) + "," + format_double(sums[j]) + "\n";
        } else {
          text = series_report(s);
        }
      }
      run.emit(text, out_path);
      return kExitOk;
    }

    if (sweep->parsed()) {
      if (!std::isfinite(from) || !std::isfinite(to)) throw UsageError("sweep range must be finite");
      if (log_steps && !(from > 0 && to > 0)) throw UsageError("--log needs a positive range");
      std::vector<double> values(static_cast<std::size_t>(steps));
      for (int i = 0; i < steps; ++i) {
        const double t = steps == 1 ? 0.0 : static_cast<double>(i) / (steps - 1);
        values[static_cast<std::size_t>(i)] =
            log_steps ? std::exp(std::log(from) + t * (std::log(to) - std::log(from))) : from + t * (to - from);
      }
      const ProblemConfig cfg = run.config(cfg_path);
      std::optional<ScaledProblem> base;
      if (physical) {
        if (!cfg.params.count(name)) throw UsageError("config has no parameter '" + name + "' to sweep");
      } else {
        base = scaled_problem(cfg, run.constants);
        if (!base->couplings.count(name)) {
          std::string known;
          for (const auto& [k, v] : base->couplings) known += (known.empty() ? "" : ", ") + k;
          throw UsageError("problem has no coupling '" + name + "' (couplings: " + (known.empty() ? "none" : known) + ")");
        }
      }
      SolveOptions o;
      o.h = h;
      const std::size_t K = values.size();
      std::vector<std::string> rows(K), notes(K), errors(K);
      std::vector<int> kinds(K, 0);
      auto work = [&](std::size_t i) {
        try {
          ScaledProblem p;
          if (physical) {
            ProblemConfig c = cfg;
            c.params[name].magnitude = values[i];
            p = scaled_problem(c, run.constants);
          } else {
            p = *base;
            p.couplings[name] = values[i];
          }
          const auto r = bound_states(p, count, o);
          if (r.partial) notes[i] = r.note;
          check_converged(r);
          for (const auto& row : csv_rows(p, r)) rows[i] += csv_line(row) + "\n";
        } catch (const NonConvergence& e) {
          errors[i] = e.what();
          kinds[i] = 2;
        } catch (const std::exception& e) {
          errors[i] = e.what();
          kinds[i] = 1;
        }
      };
      const std::size_t T = std::min<std::size_t>(static_cast<std::size_t>(sweep_threads), K);
      if (T <= 1) {
        for (std::size_t i = 0; i < K; ++i) work(i);
      } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < T; ++t)
          pool.emplace_back([&] {
            for (std::size_t i; (i = next.fetch_add(1)) < K;) work(i);
          });
        for (auto& th : pool) th.join();
      }
      for (std::size_t i = 0; i < K; ++i) {
        if (!notes[i].empty()) err << "scaleqm: row " << i << ": " << notes[i] << "\n";
        if (kinds[i] != 0) {
          err << "scaleqm: row " << i << " (" << name << " = " << format_double(values[i]) << "): " << errors[i]
              << "\n";
          return kinds[i] == 2 ? kExitNonConvergence : kExitUsage;
        }
      }
      std::string text = csv_header() + "\n";
      for (const auto& r : rows) text += r;
      run.emit(text, out_path);
      return kExitOk;
    }

    if (lint_cmd->parsed()) {
      const ProblemConfig cfg = run.config(cfg_path);
      const auto diags = lint_config(cfg, run.constants);
      if (diags.empty()) {
        out << cfg_path << ": clean\n";
        return kExitOk;
      }
      for (const auto& d : diags) err << cfg_path << ": " << d.to_string() << "\n";
      err << cfg_path << ": " << diags.size() << " dimensional problem" << (diags.size() == 1 ? "" : "s") << "\n";
      return kExitLint;
    }

    if (units->parsed()) {
      std::ostringstream os;
      if (!mass_text.empty() || !length_text.empty()) {
        if (mass_text.empty() || length_text.empty()) throw UsageError("--mass and --length go together");
        const Quantity m = parse_quantity(mass_text), L = parse_quantity(length_text);
        const Quantity E = energy_unit(m, L, run.constants), w = time_unit(m, L, run.constants);
        os << "energy_unit = " << format_double(E.magnitude) << " " << E.dim.to_config_string() << "\n";
        os << "omega = " << format_double(w.magnitude) << " " << w.dim.to_config_string() << "\n";
      } else {
        for (const auto& [k, q] : run.constants.all())
          os << k << " = " << format_double(q.magnitude) << " " << q.dim.to_config_string() << "\n";
        const auto a0 = bohr_radius(run.constants);
        const Quantity Eh = energy_unit(run.constants.electron_mass(), a0.value, run.constants);
        os << "a0 = " << format_double(a0.value.magnitude) << " " << a0.value.dim.to_config_string() << "\n";
        os << "hartree = " << format_double(Eh.magnitude) << " " << Eh.dim.to_config_string() << "\n";
      }
      run.emit(os.str(), out_path);
      return kExitOk;
    }
  } catch (const NonConvergence& e) {
    err << "scaleqm: " << e.what() << "\n";
    return kExitNonConvergence;
  } catch (const std::exception& e) {
    err << "scaleqm: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace scaleqm
