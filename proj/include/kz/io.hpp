#pragma once

#include <cmath>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "functional.hpp"
#include "interval.hpp"
#include "l1.hpp"
#include "markov.hpp"
#include "potential.hpp"
#include "verify.hpp"

namespace kz {

using json = nlohmann::json;

inline constexpr const char* config_schema = "kzl1.config/1";
inline constexpr const char* report_schema = "kzl1.report/1";

// Malformed configuration; carries every problem found, not just the first.
struct ConfigError : ValidationError {
  std::vector<std::string> problems;
  explicit ConfigError(std::vector<std::string> p) : ValidationError(join(p)), problems(std::move(p)) {}

 private:
  static std::string join(const std::vector<std::string>& p) {
    std::string s = "invalid config:";
    for (auto& m : p) s += "\n  " + m;
    return s;
  }
};

struct Assertion {
  std::string name;  // a result key, e.g. "M" or "L"
  double expected = 0.0;
  double tol = 0.0;
};

struct ProblemConfig {
  std::vector<std::pair<double, double>> bands;
  std::optional<double> truncation;
  std::string weight = "unit";  // unit, reciprocal_abs, tabulated
  std::vector<double> weight_x, weight_y;
  std::string mode = "functional";  // functional, normalized_at_zero, approximate
  std::string functional = "infinity";  // infinity, point, coefficients
  double x0 = 0.0;
  std::vector<double> lambdas;
  double markov_u = 0.0;  // approximate mode: f(x) = 1/(x - u)
  int degree = 0;

  IntervalSystem system() const { return IntervalSystem::make(bands, truncation); }
  WeightSpec weight_spec() const {
    if (weight == "reciprocal_abs") return WeightSpec::reciprocal_abs();
    if (weight == "tabulated") return WeightSpec::tabulated(weight_x, weight_y);
    return WeightSpec::unit();
  }
  std::optional<LinearFunctional> linear_functional() const {
    if (mode == "normalized_at_zero") return LinearFunctional::point(0.0, degree);
    if (mode != "functional") return std::nullopt;
    if (functional == "point") return LinearFunctional::point(x0, degree);
    if (functional == "coefficients") return LinearFunctional::from_lambdas(lambdas);
    return LinearFunctional::infinity(degree);
  }
  L1Mode l1_mode() const {
    if (mode == "normalized_at_zero") return NormalizedAtZero{};
    if (mode == "approximate") {
      double u = markov_u;
      return Approximate{[u](double x) { return 1.0 / (x - u); }, "1/(x-u)"};
    }
    return FunctionalMode{*linear_functional()};
  }
};

struct GreenConfig {
  std::optional<double> pole;  // finite pole; infinity when absent
  std::vector<cplx> points;
};

struct VerifyConfig {
  double zero_condition_tol = 1e-3;
  double representation_tol = 1e-6;
  double error_identity_tol = 5e-2;
};

struct RunConfig {
  ProblemConfig problem;
  SolveOptions solve;
  MarkovOptions dual;
  double duality_tol = 2e-2;
  VerifyConfig verify;
  GreenConfig green;
  std::vector<Assertion> assertions;
  std::string json_out, csv_out;
  int threads = 0;
};

namespace detail {

class ConfigReader {
 public:
  std::vector<std::string> problems;

  const json* get(const json& j, const std::string& key, const std::string& path) {
    if (!j.is_object()) {
      problems.push_back(path + ": expected an object");
      return nullptr;
    }
    auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
  }
  template <class T>
  void read(const json& j, const std::string& key, const std::string& path, T& out) {
    const json* v = get(j, key, path);
    if (!v) return;
    try {
      out = v->get<T>();
    } catch (const std::exception&) {
      problems.push_back(path + "." + key + ": wrong type");
    }
  }
  void positive(double v, const std::string& name) {
    if (!(v > 0.0) || !std::isfinite(v)) problems.push_back(name + ": must be positive");
  }
  void one_of(const std::string& v, std::initializer_list<const char*> allowed, const std::string& name) {
    for (auto a : allowed)
      if (v == a) return;
    std::string s = name + ": '" + v + "' is not one of";
    for (auto a : allowed) s += std::string(" ") + a;
    problems.push_back(s);
  }
  void known_keys(const json& j, std::initializer_list<const char*> keys, const std::string& path) {
    if (!j.is_object()) return;
    for (auto it = j.begin(); it != j.end(); ++it) {
      bool ok = false;
      for (auto k : keys) ok = ok || it.key() == k;
      if (!ok) problems.push_back(path + "." + it.key() + ": unknown key");
    }
  }
};

}  // namespace detail

inline RunConfig parse_config(const json& j) {
  detail::ConfigReader r;
  RunConfig c;
  if (!j.is_object()) throw ConfigError({"config: top level must be an object"});
  std::string schema;
  r.read(j, "schema", "config", schema);
  if (schema != config_schema) r.problems.push_back("config.schema: expected '" + std::string(config_schema) + "'");
  r.known_keys(j, {"schema", "problem", "solver", "dual", "verify", "green", "assertions", "output", "threads"}, "config");

  if (const json* p = r.get(j, "problem", "config")) {
    auto& pc = c.problem;
    r.known_keys(*p, {"bands", "truncation", "weight", "mode", "functional", "degree", "markov_u"}, "problem");
    if (const json* b = r.get(*p, "bands", "problem")) {
      if (!b->is_array() || b->empty()) r.problems.push_back("problem.bands: expected a non-empty array of [l, r]");
      else
        for (auto& x : *b) {
          if (!x.is_array() || x.size() != 2 || !x[0].is_number() || !x[1].is_number()) {
            r.problems.push_back("problem.bands: each band must be [l, r]");
            break;
          }
          pc.bands.emplace_back(x[0].get<double>(), x[1].get<double>());
        }
    } else {
      r.problems.push_back("problem.bands: required");
    }
    if (const json* t = r.get(*p, "truncation", "problem"); t && !t->is_null()) {
      if (t->is_number()) pc.truncation = t->get<double>();
      else r.problems.push_back("problem.truncation: expected a number or null");
    }
    if (const json* w = r.get(*p, "weight", "problem")) {
      if (w->is_string()) {
        pc.weight = w->get<std::string>();
      } else if (w->is_object()) {
        r.read(*w, "kind", "problem.weight", pc.weight);
        r.read(*w, "x", "problem.weight", pc.weight_x);
        r.read(*w, "y", "problem.weight", pc.weight_y);
      } else {
        r.problems.push_back("problem.weight: expected a string or an object");
      }
      r.one_of(pc.weight, {"unit", "reciprocal_abs", "tabulated"}, "problem.weight");
    }
    r.read(*p, "mode", "problem", pc.mode);
    r.one_of(pc.mode, {"functional", "normalized_at_zero", "approximate"}, "problem.mode");
    if (const json* f = r.get(*p, "functional", "problem")) {
      if (f->is_string()) {
        pc.functional = f->get<std::string>();
      } else if (f->is_object()) {
        r.read(*f, "kind", "problem.functional", pc.functional);
        r.read(*f, "x0", "problem.functional", pc.x0);
        r.read(*f, "lambdas", "problem.functional", pc.lambdas);
      } else {
        r.problems.push_back("problem.functional: expected a string or an object");
      }
      r.one_of(pc.functional, {"infinity", "point", "coefficients"}, "problem.functional");
    }
    r.read(*p, "degree", "problem", pc.degree);
    if (pc.degree < 0) r.problems.push_back("problem.degree: must be >= 0");
    r.read(*p, "markov_u", "problem", pc.markov_u);
    if (pc.mode == "functional" && pc.functional == "coefficients" && int(pc.lambdas.size()) != pc.degree + 1)
      r.problems.push_back("problem.functional.lambdas: need degree + 1 entries");
    if (pc.mode == "approximate" && !r.get(*p, "markov_u", "problem"))
      r.problems.push_back("problem.markov_u: required in approximate mode");
  } else {
    r.problems.push_back("config.problem: required");
  }

  if (const json* s = r.get(j, "solver", "config")) {
    r.known_keys(*s, {"order", "initial_panels", "max_nodes_per_band", "min_levels", "max_levels", "tolerance",
                      "graded_layers", "polish", "cell_refine", "formulation"},
                 "solver");
    auto& g = c.solve.grid;
    r.read(*s, "order", "solver", g.order);
    r.read(*s, "initial_panels", "solver", g.initial_panels);
    r.read(*s, "max_nodes_per_band", "solver", g.max_nodes_per_band);
    r.read(*s, "min_levels", "solver", g.min_levels);
    r.read(*s, "max_levels", "solver", g.max_levels);
    r.read(*s, "tolerance", "solver", g.tolerance);
    r.read(*s, "graded_layers", "solver", g.graded_layers);
    r.read(*s, "polish", "solver", c.solve.polish);
    r.read(*s, "cell_refine", "solver", c.solve.cell_refine);
    std::string f = "moment_dual";
    r.read(*s, "formulation", "solver", f);
    r.one_of(f, {"moment_dual", "primal"}, "solver.formulation");
    c.solve.formulation = f == "primal" ? Formulation::primal : Formulation::moment_dual;
    r.positive(g.tolerance, "solver.tolerance");
    if (g.order < 1 || g.initial_panels < 1 || g.max_levels < 1) r.problems.push_back("solver: order, initial_panels and max_levels must be >= 1");
  }
  if (const json* d = r.get(j, "dual", "config")) {
    r.known_keys(*d, {"tol", "lo", "hi", "hankel_tol", "max_steps", "duality_tol"}, "dual");
    r.read(*d, "tol", "dual", c.dual.tol);
    r.read(*d, "lo", "dual", c.dual.lo);
    r.read(*d, "hi", "dual", c.dual.hi);
    r.read(*d, "hankel_tol", "dual", c.dual.hankel_tol);
    r.read(*d, "max_steps", "dual", c.dual.max_steps);
    r.read(*d, "duality_tol", "dual", c.duality_tol);
    for (auto [v, n] : {std::pair{c.dual.tol, "dual.tol"}, {c.dual.lo, "dual.lo"}, {c.dual.hi, "dual.hi"},
                        {c.dual.hankel_tol, "dual.hankel_tol"}, {c.duality_tol, "dual.duality_tol"}})
      r.positive(v, n);
  }
  if (const json* v = r.get(j, "verify", "config")) {
    r.known_keys(*v, {"zero_condition_tol", "representation_tol", "error_identity_tol"}, "verify");
    r.read(*v, "zero_condition_tol", "verify", c.verify.zero_condition_tol);
    r.read(*v, "representation_tol", "verify", c.verify.representation_tol);
    r.read(*v, "error_identity_tol", "verify", c.verify.error_identity_tol);
    r.positive(c.verify.zero_condition_tol, "verify.zero_condition_tol");
    r.positive(c.verify.representation_tol, "verify.representation_tol");
    r.positive(c.verify.error_identity_tol, "verify.error_identity_tol");
  }
  if (const json* g = r.get(j, "green", "config")) {
    r.known_keys(*g, {"pole", "points"}, "green");
    if (const json* p = r.get(*g, "pole", "green"); p && !p->is_null()) {
      if (p->is_number()) c.green.pole = p->get<double>();
      else r.problems.push_back("green.pole: expected a number or null");
    }
    if (const json* pts = r.get(*g, "points", "green")) {
      if (!pts->is_array()) r.problems.push_back("green.points: expected an array");
      else
        for (auto& z : *pts) {
          if (z.is_number()) c.green.points.emplace_back(z.get<double>(), 0.0);
          else if (z.is_array() && z.size() == 2 && z[0].is_number() && z[1].is_number())
            c.green.points.emplace_back(z[0].get<double>(), z[1].get<double>());
          else {
            r.problems.push_back("green.points: each point must be x or [re, im]");
            break;
          }
        }
    }
  }
  if (const json* a = r.get(j, "assertions", "config")) {
    if (!a->is_object()) r.problems.push_back("assertions: expected an object");
    else
      for (auto it = a->begin(); it != a->end(); ++it) {
        Assertion as{it.key()};
        r.read(it.value(), "expected", "assertions." + it.key(), as.expected);
        r.read(it.value(), "tol", "assertions." + it.key(), as.tol);
        r.positive(as.tol, "assertions." + it.key() + ".tol");
        c.assertions.push_back(as);
      }
  }
  if (const json* o = r.get(j, "output", "config")) {
    r.known_keys(*o, {"json", "csv"}, "output");
    r.read(*o, "json", "output", c.json_out);
    r.read(*o, "csv", "output", c.csv_out);
  }
  r.read(j, "threads", "config", c.threads);
  if (c.threads < 0) r.problems.push_back("config.threads: must be >= 0");
  c.dual.threads = c.threads;

  if (r.problems.empty()) {
    try {
      auto e = c.problem.system();
      c.problem.weight_spec().validate(e);
      (void)c.problem.linear_functional();
    } catch (const ValidationError& ex) {
      r.problems.push_back(std::string("problem: ") + ex.what());
    }
  }
  if (!r.problems.empty()) throw ConfigError(std::move(r.problems));
  return c;
}

// Normalized echo: every field with its effective value. parse_config(config_echo(c)) reproduces c.
inline json config_echo(const RunConfig& c) {
  const auto& p = c.problem;
  json bands = json::array();
  for (auto& [l, r] : p.bands) bands.push_back({l, r});
  json weight = p.weight == "tabulated" ? json{{"kind", p.weight}, {"x", p.weight_x}, {"y", p.weight_y}} : json(p.weight);
  json problem = {{"bands", bands},
                  {"truncation", p.truncation ? json(*p.truncation) : json(nullptr)},
                  {"weight", weight},
                  {"mode", p.mode},
                  {"functional", {{"kind", p.functional}, {"x0", p.x0}, {"lambdas", p.lambdas}}},
                  {"degree", p.degree}};
  if (p.mode == "approximate") problem["markov_u"] = p.markov_u;
  auto& g = c.solve.grid;
  json solver = {{"order", g.order},
                 {"initial_panels", g.initial_panels},
                 {"max_nodes_per_band", g.max_nodes_per_band},
                 {"min_levels", g.min_levels},
                 {"max_levels", g.max_levels},
                 {"tolerance", g.tolerance},
                 {"graded_layers", g.graded_layers},
                 {"polish", c.solve.polish},
                 {"cell_refine", c.solve.cell_refine},
                 {"formulation", c.solve.formulation == Formulation::primal ? "primal" : "moment_dual"}};
  json dual = {{"tol", c.dual.tol},   {"lo", c.dual.lo},           {"hi", c.dual.hi},
               {"hankel_tol", c.dual.hankel_tol}, {"max_steps", c.dual.max_steps}, {"duality_tol", c.duality_tol}};
  json verify = {{"zero_condition_tol", c.verify.zero_condition_tol}, {"representation_tol", c.verify.representation_tol}, {"error_identity_tol", c.verify.error_identity_tol}};
  json pts = json::array();
  for (auto z : c.green.points) pts.push_back({z.real(), z.imag()});
  json green = {{"pole", c.green.pole ? json(*c.green.pole) : json(nullptr)}, {"points", pts}};
  json asserts = json::object();
  for (auto& a : c.assertions) asserts[a.name] = {{"expected", a.expected}, {"tol", a.tol}};
  return {{"schema", config_schema}, {"problem", problem}, {"solver", solver}, {"dual", dual},
          {"verify", verify},        {"green", green},     {"assertions", asserts},
          {"output", {{"json", c.json_out}, {"csv", c.csv_out}}}, {"threads", c.threads}};
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

// ---- results ----

// A number with the tolerance it was computed to and the grid level it came from.
inline json measured(double value, double tol, int level, int nodes) {
  return {{"value", value}, {"tolerance", tol}, {"grid_level", level}, {"grid_nodes", nodes}};
}

inline json to_json(const CheckResult& c, int level = 0) {
  return {{"name", c.name}, {"value", c.value}, {"tolerance", c.tolerance}, {"pass", c.pass},
          {"grid_level", level}, {"note", c.note}};
}

inline json to_json(const ExtremalSolution& s) {
  const auto& d = s.diagnostics;
  double mtol = d.polished ? std::max(d.polish_residual, 1e-12) : std::abs(d.richardson_M - d.lp_M) + 1e-15;
  json levels = json::array();
  for (auto& l : d.levels) levels.push_back({{"nodes", l.nodes}, {"M", l.M}, {"lp_iterations", l.lp_iterations}});
  return {{"degree", s.degree},
          {"M", measured(s.M, mtol, d.level, d.grid_nodes)},
          {"lp_M", measured(d.lp_M, std::abs(d.richardson_M - d.lp_M), d.level, d.grid_nodes)},
          {"F_monomial", s.F.coeffs()},
          {"F_chebyshev", {{"domain", {s.F_cheb.domain().lo, s.F_cheb.domain().hi}}, {"coeffs", s.F_cheb.coeffs()}}},
          {"zeros", s.zeros.roots},
          {"zero_multiplicities", s.zeros.multiplicities},
          {"sign_changes", s.sign_changes},
          {"gap_signs", s.gap_signs},
          {"lambda0", s.lambda0 ? json(*s.lambda0) : json(nullptr)},
          {"violations", s.violations},
          {"diagnostics",
           {{"levels", levels},
            {"grid_converged", d.grid_converged},
            {"richardson_M", d.richardson_M},
            {"alternative_optima", d.alternative_optima},
            {"dual_sup", d.dual_sup},
            {"polished", d.polished},
            {"polish_status", d.polish_status},
            {"source", d.source},
            {"polish_residual", d.polish_residual},
            {"polish_iterations", d.polish_iterations},
            {"formulation", d.formulation}}}};
}

// Rebuilds the parts of a stored solution that verification reads. Zeros are taken as stored.
inline ExtremalSolution solution_from_json(const json& j) {
  try {
    ExtremalSolution s;
    s.degree = j.at("degree").get<int>();
    s.M = j.at("M").at("value").get<double>();
    s.F = Polynomial(j.at("F_monomial").get<std::vector<double>>());
    auto dom = j.at("F_chebyshev").at("domain").get<std::vector<double>>();
    if (dom.size() != 2) throw ValidationError("solution: F_chebyshev.domain must have two entries");
    s.F_cheb = ChebyshevSeries(j.at("F_chebyshev").at("coeffs").get<std::vector<double>>(), Interval{dom[0], dom[1]});
    s.zeros.roots = j.at("zeros").get<std::vector<double>>();
    s.zeros.multiplicities = j.at("zero_multiplicities").get<std::vector<int>>();
    if (s.zeros.roots.size() != s.zeros.multiplicities.size())
      throw ValidationError("solution: zeros and zero_multiplicities differ in length");
    s.sign_changes = j.at("sign_changes").get<std::vector<double>>();
    s.gap_signs = j.at("gap_signs").get<std::vector<int>>();
    if (!j.at("lambda0").is_null()) s.lambda0 = j.at("lambda0").get<double>();
    return s;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("solution: ") + e.what());
  }
}

inline json to_json(const GreenData& d) {
  json bands = json::array();
  for (auto& b : d.E.bands()) bands.push_back({b.lo, b.hi});
  json crit = json::array();
  for (double c : d.critical_points) crit.push_back(std::isfinite(c) ? json(c) : json("inf"));
  return {{"bands", bands},
          {"pole", d.pole.at_infinity ? json("inf") : json(d.pole.point)},
          {"numerator", d.numerator.coeffs()},
          {"numerator_variable", d.pole.at_infinity ? "t" : "1/(t - pole)"},
          {"critical_points", crit},
          {"gap_residuals", d.gap_residuals},
          {"widom_sum", d.widom_sum},
          {"widom_terms", d.critical_points.size()},
          {"robin", d.robin ? json(*d.robin) : json(nullptr)}};
}

// ---- CSV ----

inline std::string csv_number(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

inline std::string to_csv(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
  std::string out;
  for (size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
  out += "\n";
  for (auto& r : rows) {
    for (size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + csv_number(r[i]);
    out += "\n";
  }
  return out;
}

inline std::string green_table_csv(const std::vector<cplx>& zs, const std::vector<double>& g) {
  std::vector<std::vector<double>> rows;
  for (size_t i = 0; i < zs.size(); ++i) rows.push_back({zs[i].real(), zs[i].imag(), g[i]});
  return to_csv({"re_z", "im_z", "G"}, rows);
}

inline std::string lambda_table_csv(const std::vector<double>& lambdas) {
  std::vector<std::vector<double>> rows;
  for (double l : lambdas) rows.push_back({l, halfline_error(l)});
  return to_csv({"lambda", "M_2lambda"}, rows);
}

}  // namespace kz
