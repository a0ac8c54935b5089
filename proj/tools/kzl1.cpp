// kzl1: batch front end for the weighted L1 extremal problem solvers.
//
// Exit status: 0 when every enabled check passes, 1 when a check fails or a solver
// gives up, 2 on usage or configuration errors.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "kz/canonical.hpp"
#include "kz/io.hpp"
#include "kz/potential.hpp"
#include "kz/verify.hpp"

using namespace kz;

namespace {

struct Outputs {
  std::string json_path, csv_path;
};

class Report {
 public:
  explicit Report(std::string command) { j_ = {{"schema", report_schema}, {"command", std::move(command)}}; }

  json& results() { return j_["results"]; }
  void config(const json& c) { j_["config"] = c; }
  void scalar(const std::string& name, double v) { scalars_[name] = v; }

  void check(const CheckResult& c, int level = 0) { checks_.push_back(to_json(c, level)); pass_ = pass_ && c.pass; }
  void check(const std::string& name, double value, double tol, std::string note = {}, int level = 0) {
    check(CheckResult{name, value, tol, value <= tol, std::move(note)}, level);
  }
  void checks(const VerificationReport& r, int level = 0) {
    for (auto& c : r.checks) check(c, level);
  }
  void assertions(const std::vector<Assertion>& as) {
    for (auto& a : as) {
      auto it = scalars_.find(a.name);
      if (it == scalars_.end()) {
        check(CheckResult{"assert:" + a.name, 0.0, a.tol, false, "no such result"});
        continue;
      }
      check("assert:" + a.name, std::abs(it->second - a.expected), a.tol, "expected " + csv_number(a.expected));
    }
  }
  void error(const std::string& what) {
    j_["error"] = what;
    pass_ = false;
  }
  bool pass() const { return pass_; }

  int emit(const Outputs& out, const std::string& csv = {}) {
    j_["checks"] = checks_;
    j_["pass"] = pass_;
    std::string text = j_.dump(2) + "\n";
    if (out.json_path.empty()) std::cout << text;
    else write_text_file(out.json_path, text);
    if (!out.csv_path.empty() && !csv.empty()) write_text_file(out.csv_path, csv);
    return pass_ ? 0 : 1;
  }

 private:
  json j_;
  json checks_ = json::array();
  std::map<std::string, double> scalars_;
  bool pass_ = true;
};

RunConfig load_config(const std::string& path, Outputs& out, int threads) {
  RunConfig c = parse_config(read_json_file(path));
  if (threads > 0) {
    c.threads = threads;
    c.dual.threads = threads;
  }
  if (out.json_path.empty()) out.json_path = c.json_out;
  if (out.csv_path.empty()) out.csv_path = c.csv_out;
  return c;
}

std::string levels_csv(const ExtremalSolution& s) {
  std::vector<std::vector<double>> rows;
  for (size_t i = 0; i < s.diagnostics.levels.size(); ++i)
    rows.push_back({double(i), double(s.diagnostics.levels[i].nodes), s.diagnostics.levels[i].M});
  return to_csv({"level", "nodes", "M"}, rows);
}

int run_solve(const std::string& cfg, Outputs out, int threads) {
  RunConfig c = load_config(cfg, out, threads);
  Report rep("solve");
  rep.config(config_echo(c));
  auto& p = c.problem;
  ExtremalSolution s;
  try {
    s = solve_l1(p.system(), p.weight_spec(), p.l1_mode(), p.degree, c.solve);
  } catch (const ValidationError&) {
    throw;
  } catch (const Error& e) {
    rep.error(e.what());
    return rep.emit(out);
  }
  rep.results()["solution"] = to_json(s);
  rep.scalar("M", s.M);
  rep.scalar("lp_M", s.diagnostics.lp_M);
  rep.check("violations", double(s.violations.size()), 0.0, "structural violations reported by the solver",
            s.diagnostics.level);
  rep.assertions(c.assertions);
  return rep.emit(out, levels_csv(s));
}

int run_dual(const std::string& cfg, Outputs out, int threads) {
  RunConfig c = load_config(cfg, out, threads);
  auto& p = c.problem;
  if (p.weight != "unit" || p.mode != "functional")
    throw ValidationError("dual: needs the unit weight and a functional-mode problem");
  Report rep("dual");
  rep.config(config_echo(c));
  auto e = p.system();
  auto lam = *p.linear_functional();
  try {
    auto d = solve_markov_L(e, lam, p.degree, c.dual);
    auto s = solve_l1(e, p.weight_spec(), p.l1_mode(), p.degree, c.solve);
    json per = json::array();
    for (auto& v : d.at_upper.per_delta) {
      json forms = json::array();
      for (auto& f : v.report.forms) forms.push_back(f.min_eigenvalue);
      per.push_back({{"delta", v.delta.delta}, {"feasible", v.report.feasible}, {"min_eigenvalues", forms}});
    }
    rep.results()["L"] = {{"value", d.L}, {"lower", d.lower}, {"upper", d.upper}, {"tolerance", c.dual.tol * d.L},
                          {"bisection_steps", d.steps}, {"per_delta_at_upper", per}};
    rep.results()["primal"] = to_json(s);
    double prod = d.L * s.M;
    rep.results()["M_times_L"] = measured(prod, c.duality_tol, s.diagnostics.level, s.diagnostics.grid_nodes);
    rep.scalar("L", d.L);
    rep.scalar("M", s.M);
    rep.scalar("M_times_L", prod);
    rep.check("duality", std::abs(prod - 1.0), c.duality_tol, "|M L - 1|", s.diagnostics.level);
  } catch (const ValidationError&) {
    throw;
  } catch (const Error& e) {
    rep.error(e.what());
    return rep.emit(out);
  }
  rep.assertions(c.assertions);
  return rep.emit(out);
}

int run_verify(const std::string& solution, Outputs out) {
  json stored = read_json_file(solution);
  if (stored.value("schema", "") != report_schema || !stored.contains("config") || !stored.contains("results") ||
      !stored["results"].contains("solution"))
    throw ValidationError("verify: " + solution + " is not a stored solve report");
  RunConfig c = parse_config(stored["config"]);
  auto& p = c.problem;
  auto e = p.system();
  auto w = p.weight_spec();
  ExtremalSolution s = solution_from_json(stored["results"]["solution"]);
  int level = stored["results"]["solution"]["M"].value("grid_level", 0);
  Report rep("verify");
  rep.config(config_echo(c));
  rep.results()["solution_file"] = solution;

  // Stored zeros against the zeros of the stored polynomial.
  auto fresh = poly_real_roots(s.F, e.hull()).roots;
  double mismatch = fresh.size() == s.zeros.roots.size() ? 0.0 : std::numeric_limits<double>::infinity();
  if (std::isfinite(mismatch))
    for (size_t i = 0; i < fresh.size(); ++i) mismatch = std::max(mismatch, std::abs(fresh[i] - s.zeros.roots[i]));
  rep.check("stored_zeros_consistent", mismatch / e.hull().width(), 1e-6, "stored zeros vs zeros of stored F", level);

  if (auto lam = p.linear_functional()) {
    auto zr = zero_condition_check(e, w, s, *lam, c.verify.zero_condition_tol);
    rep.checks(zr.report, level);
    json zs = json::array();
    for (auto& z : zr.zeros)
      zs.push_back({{"x", z.x0}, {"residual", z.residual}, {"derivative", z.derivative}, {"simple", z.simple},
                    {"on_band", z.on_band}});
    rep.results()["zeros"] = zs;
    rep.results()["gap_occupancy"] = zr.gap_occupancy;
  }
  if (p.mode == "normalized_at_zero") {
    rep.checks(functional_residual(e, s, {}, c.verify.representation_tol, c.threads), level);
    auto fm = error_identity_check(e, s);
    rep.results()["error_identity"] = {{"M", fm.M}, {"lhs", fm.lhs}, {"rhs", fm.rhs}, {"residual", fm.residual},
                                  {"valid", fm.valid}, {"note", fm.note}};
    if (fm.valid) rep.check("error_identity_residual", fm.residual, c.verify.error_identity_tol, "|e^{M/2} - rhs| / e^{M/2}", level);
    else rep.check(CheckResult{"error_identity_residual", 0.0, c.verify.error_identity_tol, false, fm.note}, level);
  }
  return rep.emit(out);
}

int run_tables(std::vector<double> lambdas, double v, int n_max, bool lp, Outputs out) {
  if (lambdas.empty()) lambdas = {0.25, 0.5, 1.0};
  Report rep("tables");
  rep.config({{"lambda", lambdas}, {"v", v}, {"n_max", n_max}, {"lp", lp}});
  json half = json::array();
  for (double l : lambdas) {
    auto r = halfline_formulas(l, std::nullopt, n_max, v > 0.0 ? std::optional<double>(v) : std::nullopt);
    json rows = json::array();
    for (auto& t : r.table) rows.push_back({{"n", t.n}, {"v", t.v}, {"u", t.u}, {"M_n", t.M}});
    half.push_back({{"lambda", l}, {"M_2lambda", r.M2lambda}, {"M_2lambda_exponential", r.M2lambda_exponential},
                    {"M_n_table", rows}});
    double id = std::abs(r.M2lambda - r.M2lambda_exponential) / r.M2lambda;
    rep.check("coth_identity[" + csv_number(l) + "]", id, 1e-12, "2 ln coth l vs 2 ln((1+e^{-2l})/(1-e^{-2l}))");
    double lim = std::abs(polynomial_limit_error(n_max, std::exp(-2.0 * l / n_max)) - r.M2lambda) / r.M2lambda;
    rep.check("polynomial_limit_identity[" + csv_number(l) + "]", lim, 1e-12, "M_n at v^n = e^{-2l}");
    rep.scalar("M_2lambda[" + csv_number(l) + "]", r.M2lambda);
  }
  rep.results()["halfline"] = half;
  // Korkin-Zolotarev values on [-1, 1]: the leading-coefficient problem has M = 2^{1-n}.
  json kz = json::array();
  auto e = IntervalSystem::make({{-1.0, 1.0}});
  for (int n = 1; n <= n_max; ++n) {
    double closed = std::ldexp(1.0, 1 - n);
    json row = {{"n", n}, {"M_closed_form", closed}};
    if (lp) {
      auto s = solve_l1(e, WeightSpec::unit(), FunctionalMode{LinearFunctional::infinity(n)}, n);
      row["M_lp"] = measured(s.M, 1e-3 * closed, s.diagnostics.level, s.diagnostics.grid_nodes);
      rep.check("leading_coefficient[" + std::to_string(n) + "]", std::abs(s.M - closed) / closed, 1e-3,
                "relative error against 2^{1-n}", s.diagnostics.level);
    }
    kz.push_back(row);
  }
  rep.results()["leading_coefficient"] = kz;
  return rep.emit(out, lambda_table_csv(lambdas));
}

int run_green(const std::string& cfg, Outputs out, int threads) {
  RunConfig c = load_config(cfg, out, threads);
  auto e = c.problem.system();
  Report rep("green");
  rep.config(config_echo(c));
  GreenPole pole = c.green.pole ? GreenPole::at(*c.green.pole) : GreenPole::infinity();
  GreenFunction g;
  try {
    g = GreenFunction::build(e, pole);
  } catch (const ValidationError&) {
    throw;
  } catch (const Error& ex) {
    rep.error(ex.what());
    return rep.emit(out);
  }
  for (auto z : c.green.points)
    if (e.distance(z) == 0.0) throw ValidationError("green: sample point lies on E");
  auto vals = g.values(c.green.points, c.threads);
  rep.results()["data"] = to_json(g.data());
  json pts = json::array();
  for (size_t i = 0; i < vals.size(); ++i) {
    pts.push_back({{"z", {c.green.points[i].real(), c.green.points[i].imag()}}, {"G", vals[i]}, {"tolerance", 1e-9}});
    rep.scalar("G[" + std::to_string(i) + "]", vals[i]);
  }
  rep.results()["values"] = pts;
  rep.scalar("widom_sum", g.data().widom_sum);
  if (g.data().robin) rep.scalar("robin", *g.data().robin);
  double worst = 0.0;
  for (double r : g.data().gap_residuals) worst = std::max(worst, r);
  rep.check("gap_period_residual", worst, 1e-10, "max relative real period over the gaps");
  rep.check("widom_terms", std::abs(double(g.data().critical_points.size()) - e.gap_count()), 0.0,
            "one critical point per gap");
  rep.assertions(c.assertions);
  return rep.emit(out, green_table_csv(c.green.points, vals));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kzl1: weighted L1 extremal problems on systems of intervals"};
  app.require_subcommand(1);
  app.fallthrough();
  Outputs out;
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (default: KZ_THREADS or hardware)")->check(CLI::NonNegativeNumber);

  auto add_outputs = [&](CLI::App* s) {
    s->add_option("--json", out.json_path, "write the JSON report here instead of stdout");
    s->add_option("--csv", out.csv_path, "write the CSV table here");
  };
  std::string config, solution;
  auto* solve = app.add_subcommand("solve", "solve the primal L1 problem");
  solve->add_option("--config", config, "run config (JSON)")->required()->check(CLI::ExistingFile);
  add_outputs(solve);
  auto* dual = app.add_subcommand("dual", "solve the Markov-moment dual and cross-check duality");
  dual->add_option("--config", config, "run config (JSON)")->required()->check(CLI::ExistingFile);
  add_outputs(dual);
  auto* verify = app.add_subcommand("verify", "re-check a stored solve report");
  verify->add_option("--solution", solution, "report written by solve")->required()->check(CLI::ExistingFile);
  add_outputs(verify);
  std::vector<double> lambdas;
  double v = 0.0;
  int n_max = 8;
  bool lp = false;
  auto* tables = app.add_subcommand("tables", "closed-form half-line and leading-coefficient tables");
  tables->add_option("--lambda", lambdas, "lambda values")->check(CLI::PositiveNumber);
  tables->add_option("--v", v, "v in (0, 1) for the M_n table (default e^{-2 lambda})")->check(CLI::Range(0.0, 1.0));
  tables->add_option("--n-max", n_max, "rows per table")->check(CLI::Range(1, 64));
  tables->add_flag("--lp", lp, "also solve the leading-coefficient problems");
  add_outputs(tables);
  auto* green = app.add_subcommand("green", "Green function of a finite-gap set");
  green->add_option("--config", config, "run config (JSON)")->required()->check(CLI::ExistingFile);
  add_outputs(green);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  try {
    if (*solve) return run_solve(config, out, threads);
    if (*dual) return run_dual(config, out, threads);
    if (*verify) return run_verify(solution, out);
    if (*tables) return run_tables(lambdas, v, n_max, lp, out);
    if (*green) return run_green(config, out, threads);
  } catch (const ValidationError& e) {
    std::cerr << "kzl1: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "kzl1: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
