#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "kz/error.hpp"
#include "kz/interval.hpp"
#include "kz/l1.hpp"
#include "kz/parallel.hpp"
#include "kz/quadrature.hpp"

namespace kz {

using cplx = std::complex<double>;

enum class Kernel { plain, regularized };  // 1/(x-z)  or  1/(x-z) - 1/x

namespace detail {

// int_a^b dx/(x-z) for a real segment not containing z.
inline cplx log_segment(double a, double b, cplx z) { return std::log(cplx(b) - z) - std::log(cplx(a) - z); }

// int_a^b {1/(x-z) - 1/x} dx with a or b possibly infinite; the segment must not contain 0.
inline cplx regularized_segment(double a, double b, cplx z) {
  if (a < 0.0 && b > 0.0) throw ValidationError("regularized kernel: segment contains 0");
  cplx s = 0.0;
  if (std::isfinite(b)) s += std::log(cplx(b) - z) - std::log(std::abs(b));
  if (std::isfinite(a)) s -= std::log(cplx(a) - z) - std::log(std::abs(a));
  else s -= cplx(0.0, z.imag() > 0.0 ? -M_PI : M_PI);  // limit of i arg(x - z) as x -> -inf
  return s;
}

}  // namespace detail

// int_E g(x) K(x, z) dx. Near a band the smooth part g(x) - g(Re z) is integrated
// numerically and the rest in closed form.
inline cplx cauchy_transform(const IntervalSystem& e, const std::function<double(double)>& g, cplx z,
                             Kernel kernel = Kernel::plain, std::vector<double> breaks = {}, bool singular = false,
                             double tol = 1e-12) {
  if (e.distance(z) < 1e-8) throw ProximityError("cauchy_transform: z within 1e-8 of E");
  if (kernel == Kernel::regularized && e.contains(0.0))
    throw ValidationError("cauchy_transform: regularized kernel needs 0 outside E");
  IntegrateOptions o;
  o.tol = tol;
  o.singular = singular ? Endpoints::both : Endpoints::regular;
  cplx total = 0.0;
  for (auto& b : e.bands()) {
    double xr = z.real();
    bool near = xr > b.lo && xr < b.hi && std::abs(z.imag()) < 0.25 * b.width();
    if (near) {
      double gr = g(xr);
      auto br = breaks;
      br.push_back(xr);
      total += integrate([&](double x) { return cplx(g(x) - gr) / (x - z); }, b.lo, b.hi, o, br);
      total += gr * detail::log_segment(b.lo, b.hi, z);
    } else {
      total += integrate([&](double x) { return cplx(g(x)) / (x - z); }, b.lo, b.hi, o, breaks);
    }
    if (kernel == Kernel::regularized) total -= integrate([&](double x) { return g(x) / x; }, b.lo, b.hi, o, breaks);
  }
  return total;
}

// PV int_a^b g(x)/(x - x0) dx by symmetric excision of radius h and Richardson extrapolation
// over h, h/2, h/4.
template <class G>
double principal_value(G&& g, double a, double b, double x0, double h = -1.0, double tol = 1e-13,
                       const std::vector<double>& breaks = {}) {
  if (!(x0 > a && x0 < b)) throw ValidationError("principal_value: x0 must be inside (a, b)");
  if (h <= 0.0) h = 1e-3 * std::min(x0 - a, b - x0);
  IntegrateOptions o;
  o.tol = tol;
  auto f = [&](double x) { return g(x) / (x - x0); };
  auto excised = [&](double r) { return integrate(f, a, x0 - r, o, breaks) + integrate(f, x0 + r, b, o, breaks); };
  return (8.0 * excised(h / 4.0) - 6.0 * excised(h / 2.0) + excised(h)) / 3.0;
}

struct CheckResult {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string note;
};

struct VerificationReport {
  std::vector<CheckResult> checks;
  bool pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
  }
  void add(std::string name, double value, double tol, std::string note = {}) {
    checks.push_back({std::move(name), value, tol, value <= tol, std::move(note)});
  }
  const CheckResult* find(const std::string& name) const {
    for (auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
};

// Signed pieces of E and of its complement cut at the real zeros of F.
struct SignSegments {
  std::vector<std::pair<double, double>> plus, minus;  // E_+ and E_-
  std::vector<std::pair<double, double>> off_minus;    // complement of E where F < 0
};

inline SignSegments sign_segments(const IntervalSystem& e, const std::function<double(double)>& F,
                                  const std::vector<double>& real_zeros) {
  SignSegments s;
  auto cut = [&](double a, double b, auto&& sink) {
    std::vector<double> pts{a};
    for (double z : real_zeros)
      if (z > a && z < b) pts.push_back(z);
    pts.push_back(b);
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
      double lo = pts[i], hi = pts[i + 1];
      double mid = std::isfinite(lo) && std::isfinite(hi) ? 0.5 * (lo + hi)
                   : std::isfinite(hi)                   ? hi - 1.0 - std::abs(hi)
                                                         : lo + 1.0 + std::abs(lo);
      sink(lo, hi, F(mid) >= 0.0);
    }
  };
  for (auto& b : e.bands())
    cut(b.lo, b.hi, [&](double lo, double hi, bool pos) { (pos ? s.plus : s.minus).emplace_back(lo, hi); });
  auto off = [&](double lo, double hi, bool pos) {
    if (!pos) s.off_minus.emplace_back(lo, hi);
  };
  cut(-INFINITY, e.left(), off);
  for (auto& g : e.gaps()) cut(g.lo, g.hi, off);
  cut(e.right(), INFINITY, off);
  return s;
}

struct CauchyValues {
  cplx z, w, S, omega_plus, omega_minus, eps_minus;
};

// All real zeros of F (not only those in the hull).
inline std::vector<double> all_real_zeros(const ExtremalSolution& sol) {
  std::vector<double> z;
  if (sol.F_cheb.degree() < 1) return z;
  double span = sol.F_cheb.domain().width();
  for (auto& r : sol.F_cheb.complex_roots())
    if (std::abs(r.imag()) <= 1e-7 * std::max(span, std::abs(r))) z.push_back(r.real());
  std::sort(z.begin(), z.end());
  return z;
}

// w, S, omega_+-, eps_- of an extremal F with F(0) = 1 (regularized kernel throughout).
inline CauchyValues cauchy_transforms(const IntervalSystem& e, const ExtremalSolution& sol, cplx z) {
  auto F = [&](double x) { return sol(x); };
  auto segs = sign_segments(e, F, all_real_zeros(sol));
  CauchyValues v;
  v.z = z;
  v.w = cauchy_transform(
      e, [&](double x) { return std::abs(x * F(x)); }, z, Kernel::regularized, sol.zeros.roots);
  for (auto& [a, b] : segs.plus) v.omega_plus += detail::regularized_segment(a, b, z);
  for (auto& [a, b] : segs.minus) v.omega_minus += detail::regularized_segment(a, b, z);
  for (auto& [a, b] : segs.off_minus) v.eps_minus += detail::regularized_segment(a, b, z);
  // sgn(xF) = -sgn F on the negative axis, sgn F on the positive axis.
  for (auto& [a, b] : segs.plus) v.S += (a < 0 ? -1.0 : 1.0) * detail::regularized_segment(a, b, z);
  for (auto& [a, b] : segs.minus) v.S += (a < 0 ? 1.0 : -1.0) * detail::regularized_segment(a, b, z);
  return v;
}

inline std::vector<cplx> verification_contour(const IntervalSystem& e, int points = 64) {
  double r = 2.0 * std::max(std::abs(e.left()), std::abs(e.right()));
  std::vector<cplx> z;
  for (int k = 0; k < points; ++k) {
    double t = 2.0 * M_PI * (k + 0.5) / points;
    z.push_back(std::polar(r, t));
  }
  return z;
}

// w(z) = z F(z) (S(z) + M) on a contour, with w'(0) = M and S(0) = 0.
inline VerificationReport functional_residual(const IntervalSystem& e, const ExtremalSolution& sol,
                                              std::vector<cplx> zs = {}, double tol = 1e-6, int threads = 0) {
  if (e.contains(0.0) || e.hull().contains(0.0)) throw ValidationError("functional_residual: 0 must lie outside E");
  if (zs.empty()) zs = verification_contour(e);
  VerificationReport rep;
  auto vals = parallel_map(int(zs.size()), [&](int i) { return cauchy_transforms(e, sol, zs[i]); }, threads);
  double worst = 0.0, defn = 0.0;
  for (auto& v : vals) {
    // G(z) = w / (zF) - S is the constant M; S + M -> 0 at infinity, so compare G with M.
    cplx zF = v.z * sol.F(v.z);
    worst = std::max(worst, std::abs(v.w / zF - v.S - sol.M) / sol.M);
    defn = std::max(defn, std::abs(v.S - (-v.omega_plus + v.omega_minus)));
  }
  rep.add("representation_residual", worst, tol, "max |w/(zF) - S - M| / M over the contour");
  rep.add("S_split_identity", defn, 1e-12, "S = -omega_+ + omega_-");
  // w'(0) from the Cauchy integral over a small circle around 0.
  double r0 = 0.5 * e.distance(0.0);
  const int K = 32;
  cplx d = 0.0;
  for (int k = 0; k < K; ++k) {
    cplx z = std::polar(r0, 2.0 * M_PI * k / K);
    d += cauchy_transforms(e, sol, z).w / z;
  }
  d /= double(K);
  rep.add("w_prime_0_over_M", std::abs(d.real() / sol.M - 1.0), 1e-3, "w'(0)/M - 1");
  rep.add("S_at_0", std::abs(cauchy_transforms(e, sol, 0.0).S), 1e-6);
  return rep;
}

struct NearAxisTrace {
  double x, alpha_plus, alpha_minus, u, v;
};

// Re omega_+-(x + i0) and w(x + i0) = u + i v at points of E.
inline std::vector<NearAxisTrace> near_axis_traces(const IntervalSystem& e, const ExtremalSolution& sol,
                                                   const std::vector<double>& xs, double eta = 1e-7) {
  std::vector<NearAxisTrace> out;
  for (double x : xs) {
    auto c = cauchy_transforms(e, sol, cplx(x, eta));
    out.push_back({x, c.omega_plus.real(), c.omega_minus.real(), c.w.real(), c.w.imag()});
  }
  return out;
}

struct ZeroCheck {
  double x0;
  double residual;  // |int |F| K dx| / M
  double derivative;
  bool simple;
  bool on_band;
};

struct ZeroReport {
  VerificationReport report;
  std::vector<ZeroCheck> zeros;
  std::vector<int> gap_occupancy;
};

// Variational zero conditions: for each real zero x0, int_E |F(x)| q(x) w(x) / (x - x0) dx = 0
// with q the admissible linear factor for the functional (q = 1 for the leading coefficient,
// q = x - x0' for a point functional at x0', otherwise the line annihilated by Lambda).
inline ZeroReport zero_condition_check(const IntervalSystem& e, const WeightSpec& w, const ExtremalSolution& sol,
                                       const LinearFunctional& lam, double tol = 1e-3) {
  ZeroReport zr;
  auto F = [&](double x) { return sol(x); };
  double half = 0.5 * e.hull().width(), mid = e.hull().mid();
  double fnorm = 0.0;
  for (int k = 0; k <= 200; ++k) fnorm = std::max(fnorm, std::abs(F(mid + half * std::cos(M_PI * k / 200.0))));
  auto dF = sol.F.derivative();
  double dscale = fnorm / half;
  zr.gap_occupancy.assign(e.gap_count(), 0);
  double worst = 0.0;
  bool all_simple = true;
  for (double x0 : sol.zeros.roots) {
    int gi = e.gap_of(x0);
    if (gi >= 0) ++zr.gap_occupancy[gi];
  }
  for (size_t i = 0; i < sol.zeros.roots.size(); ++i) {
    double x0 = sol.zeros.roots[i];
    std::function<double(double)> q;
    if (lam.kind() == LinearFunctional::Kind::infinity) {
      q = [](double) { return 1.0; };
    } else if (lam.kind() == LinearFunctional::Kind::point) {
      double p = lam.x0(), s = std::max(std::abs(e.left() - p), std::abs(e.right() - p));
      q = [p, s](double x) { return (x - p) / s; };
    } else {
      // alpha Lambda(F/(x-x0)) + beta Lambda(xF/(x-x0)) = 0, normalized.
      Polynomial G = sol.F.divmod(Polynomial({-x0, 1.0})).first;
      double l0 = lam(G), l1 = lam(G * Polynomial({0.0, 1.0}));
      double al = l1, be = -l0;
      double s = std::max(std::abs(al + be * e.left()), std::abs(al + be * e.right()));
      if (s == 0.0) s = 1.0;
      q = [al, be, s](double x) { return (al + be * x) / s; };
    }
    auto g = [&](double x) { return std::abs(F(x)) * q(x) * w(x); };
    double r = 0.0;
    bool on_band = false;
    IntegrateOptions o;
    o.tol = 1e-12;
    if (w.kind() == WeightSpec::Kind::density && w.singular_endpoints()) o.singular = Endpoints::both;
    for (auto& b : e.bands()) {
      if (x0 > b.lo && x0 < b.hi) {
        on_band = true;
        r += principal_value(g, b.lo, b.hi, x0, -1.0, 1e-13, sol.zeros.roots);
      } else {
        r += integrate([&](double x) { return g(x) / (x - x0); }, b.lo, b.hi, o, sol.zeros.roots);
      }
    }
    double res = std::abs(r) / sol.M;
    double der = std::abs(dF(x0));
    bool simple = der > 1e-6 * dscale && sol.zeros.multiplicities[i] == 1;
    all_simple = all_simple && simple;
    worst = std::max(worst, res);
    zr.zeros.push_back({x0, res, der, simple, on_band});
  }
  zr.report.add("zero_condition_residual", worst, tol, "max over zeros of |int |F| q w/(x-x0)| / M");
  int over = 0;
  for (int c : zr.gap_occupancy) over = std::max(over, c);
  zr.report.add("max_zeros_per_gap", double(over), 1.0);
  zr.report.add("nonsimple_zeros", all_simple ? 0.0 : 1.0, 0.0);
  return zr;
}

struct RefinementRow {
  int nodes = 0;
  double M = 0.0;
  double zero_condition = 0.0;
  double representation = 0.0;  // only in normalized-at-0 mode
};

// Unpolished LP solves on a doubling schedule and the residual trends.
inline std::vector<RefinementRow> refinement_study(const IntervalSystem& e, const WeightSpec& w, const L1Mode& mode,
                                                   int n, int levels, int initial_panels = 2, int order = 8) {
  std::vector<RefinementRow> rows;
  LinearFunctional lam = std::holds_alternative<FunctionalMode>(mode) ? std::get<FunctionalMode>(mode).functional
                                                                      : LinearFunctional::point(0.0, n);
  for (int l = 0, p = initial_panels; l < levels; ++l, p *= 2) {
    SolveOptions o;
    o.polish = false;
    o.grid.order = order;
    o.grid.initial_panels = p;
    o.grid.min_levels = 1;
    o.grid.max_levels = 1;
    auto sol = solve_l1(e, w, mode, n, o);
    RefinementRow r;
    r.nodes = sol.diagnostics.grid_nodes;
    r.M = sol.M;
    r.zero_condition = zero_condition_check(e, w, sol, lam).report.find("zero_condition_residual")->value;
    if (std::holds_alternative<NormalizedAtZero>(mode))
      r.representation = functional_residual(e, sol).find("representation_residual")->value;
    rows.push_back(r);
  }
  return rows;
}

}  // namespace kz
