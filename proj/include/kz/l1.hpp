#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "kz/error.hpp"
#include "kz/functional.hpp"
#include "kz/interval.hpp"
#include "kz/lp.hpp"
#include "kz/poly.hpp"

namespace kz {

// Problem modes.
struct FunctionalMode {
  LinearFunctional functional;
};
// F(0) = 1; pair with the reciprocal-abs weight for the half-line problem.
struct NormalizedAtZero {};
// Best weighted L1 approximation of f by polynomials of degree <= n.
struct Approximate {
  std::function<double(double)> f;
  std::string label = "f";
};
using L1Mode = std::variant<FunctionalMode, NormalizedAtZero, Approximate>;

enum class Formulation { moment_dual, primal };

struct GridSchedule {
  int order = 8;            // Gauss nodes per panel
  int initial_panels = 8;   // per band, doubled each level
  int max_nodes_per_band = 4096;
  int min_levels = 2;
  int max_levels = 12;
  double tolerance = 1e-4;  // stop when |M_k - M_{k-1}| < tolerance
  int graded_layers = -1;   // -1: automatic (graded only in approximation mode)
};

struct SolveOptions {
  GridSchedule grid;
  bool polish = true;
  bool cell_refine = true;  // move LP sign changes to their position inside the quadrature cell
  Formulation formulation = Formulation::moment_dual;
  LPOptions lp;
};

struct RefinementLevel {
  int nodes = 0;
  double M = 0.0;
  int lp_iterations = 0;
};

struct SolveDiagnostics {
  std::vector<RefinementLevel> levels;
  int grid_nodes = 0;
  int level = 0;
  bool grid_converged = false;
  double lp_M = 0.0;
  double richardson_M = 0.0;
  bool alternative_optima = false;
  double dual_sup = 0.0;  // max |f_i| of the dual density, bounded by 1/M
  bool polished = false;
  std::string polish_status = "off";
  std::string source = "lp";  // lp, cell or polished
  double polish_residual = 0.0;
  int polish_iterations = 0;
  std::string formulation = "moment_dual";
};

struct ExtremalSolution {
  int degree = 0;
  ChebyshevSeries F_cheb;  // on the hull of E
  Polynomial F;
  double M = 0.0;
  RootList zeros;                   // real zeros of F in the hull
  std::vector<double> sign_changes; // sign changes of F (or f - P) inside E
  std::vector<int> gap_signs;       // sign of F at each gap midpoint
  std::optional<double> lambda0;    // exp(-M/2) in normalized-at-0 mode
  std::vector<std::string> violations;
  SolveDiagnostics diagnostics;

  double operator()(double x) const { return F_cheb(x); }
};

namespace detail {

struct SegmentRule {
  std::vector<double> x, w;
};

// Quadrature for int_a^b g(x) w(x) dx with [a, b] inside one band; exact for
// polynomials of the given degree times the unit weight.
inline SegmentRule segment_rule(double a, double b, const WeightSpec& wt, int degree,
                                bool sing_a = false, bool sing_b = false) {
  SegmentRule r;
  if (!(b > a)) return r;
  auto add = [&](double lo, double hi, const GaussRule& g) {
    double h = 0.5 * (hi - lo), c = 0.5 * (hi + lo);
    for (size_t k = 0; k < g.nodes.size(); ++k) {
      double x = c + h * g.nodes[k];
      r.x.push_back(x);
      r.w.push_back(h * g.weights[k] * wt(x));
    }
  };
  switch (wt.kind()) {
    case WeightSpec::Kind::unit: {
      add(a, b, gauss_legendre(std::max(8, degree / 2 + 4)));
      break;
    }
    case WeightSpec::Kind::reciprocal_abs: {
      GaussRule g = gauss_legendre(std::max(16, degree / 2 + 8));
      double lo = std::min(std::abs(a), std::abs(b)), hi = std::max(std::abs(a), std::abs(b));
      int panels = std::max(1, int(std::ceil(std::log(hi / lo) / std::log(1.25))));
      auto edges = panel_edges(a, b, panels, true);
      for (int p = 0; p < panels; ++p) add(edges[p], edges[p + 1], g);
      break;
    }
    default: {
      GaussRule g = gauss_legendre(std::max(20, degree / 2 + 8));
      const int panels = 8;
      double m = 0.5 * (a + b);
      auto substituted = [&](double end, double other, bool at_left) {
        // x = end +- t^2 over the half segment
        double tmax = std::sqrt(std::abs(other - end));
        for (int p = 0; p < panels; ++p) {
          double t0 = tmax * p / panels, t1 = tmax * (p + 1) / panels;
          double h = 0.5 * (t1 - t0), c = 0.5 * (t0 + t1);
          for (size_t k = 0; k < g.nodes.size(); ++k) {
            double t = c + h * g.nodes[k];
            double x = at_left ? end + t * t : end - t * t;
            r.x.push_back(x);
            r.w.push_back(h * g.weights[k] * 2.0 * t * wt(x));
          }
        }
      };
      bool sa = sing_a && wt.singular_endpoints(), sb = sing_b && wt.singular_endpoints();
      if (sa) substituted(a, m, true);
      else for (int p = 0; p < panels; ++p) add(a + (m - a) * p / panels, a + (m - a) * (p + 1) / panels, g);
      if (sb) substituted(b, m, false);
      else for (int p = 0; p < panels; ++p) add(m + (b - m) * p / panels, m + (b - m) * (p + 1) / panels, g);
      break;
    }
  }
  return r;
}

// int_a^b T_k(t(x)) w(x) dx for k = 0..n.
inline Eigen::VectorXd segment_moments(double a, double b, const WeightSpec& wt, int n, Interval dom,
                                       bool sing_a, bool sing_b) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n + 1);
  auto r = segment_rule(a, b, wt, n, sing_a, sing_b);
  double mid = dom.mid(), half = 0.5 * dom.width();
  for (size_t i = 0; i < r.x.size(); ++i) {
    auto t = chebyshev_t_values((r.x[i] - mid) / half, n);
    for (int k = 0; k <= n; ++k) out[k] += r.w[i] * t[k];
  }
  return out;
}

struct Segment {
  double a, b;
  int band;
  bool band_start, band_end;
};

// Pieces of E between consecutive breakpoints (sorted, interior to bands).
inline std::vector<Segment> split_bands(const IntervalSystem& e, const std::vector<double>& cuts) {
  std::vector<Segment> out;
  for (int bi = 0; bi < e.band_count(); ++bi) {
    const Interval& b = e.bands()[bi];
    double prev = b.lo;
    bool first = true;
    for (double z : cuts) {
      if (z > b.lo && z < b.hi) {
        out.push_back({prev, z, bi, first, false});
        prev = z;
        first = false;
      }
    }
    out.push_back({prev, b.hi, bi, first, true});
  }
  return out;
}

inline std::vector<double> chebyshev_row(double x, int n, Interval dom) {
  return chebyshev_t_values((x - dom.mid()) / (0.5 * dom.width()), n);
}

struct LpOutcome {
  ChebyshevSeries P;
  double M = 0.0;
  int iterations = 0;
  bool alternative = false;
  double dual_sup = 0.0;
  std::vector<double> y;  // dual density times node weight, |y_i| <= w_i
};

// One LP solve on a fixed grid. g holds the functional images (empty in approximation mode).
inline LpOutcome solve_grid_lp(const QuadratureGrid& grid, Interval dom, int n, const std::vector<double>& g,
                               const std::function<double(double)>* f, Formulation form,
                               const LPOptions& base, const ChebyshevSeries* warm) {
  const int N = int(grid.size());
  const bool approx = f != nullptr;
  std::vector<double> fv;
  if (approx) {
    fv.resize(N);
    for (int i = 0; i < N; ++i) fv[i] = (*f)(grid.nodes[i]);
  }
  Eigen::MatrixXd phi(N, n + 1);
  for (int i = 0; i < N; ++i) {
    auto t = chebyshev_row(grid.nodes[i], n, dom);
    for (int k = 0; k <= n; ++k) phi(i, k) = t[k];
  }
  LpOutcome out;
  std::vector<double> coef(n + 1, 0.0);
  std::vector<double> y(N, 0.0);
  LPOptions opt = base;

  if (form == Formulation::moment_dual) {
    LPInstance lp;
    int nv = approx ? N : N + 1;
    lp.objective.assign(nv, 0.0);
    lp.lower.assign(nv, 0.0);
    lp.upper.assign(nv, 0.0);
    for (int i = 0; i < N; ++i) {
      lp.lower[i] = -grid.weights[i];
      lp.upper[i] = grid.weights[i];
      if (approx) lp.objective[i] = -fv[i];
    }
    if (!approx) {
      lp.objective[N] = -1.0;
      lp.lower[N] = -INFINITY;
      lp.upper[N] = INFINITY;
    }
    lp.A = Eigen::MatrixXd::Zero(n + 1, nv);
    lp.A.leftCols(N) = phi.transpose();
    if (!approx)
      for (int k = 0; k <= n; ++k) lp.A(k, N) = -g[k];
    lp.sense.assign(n + 1, RowSense::equal);
    lp.rhs.assign(n + 1, 0.0);
    if (warm) {
      opt.start_at_upper.assign(nv, 0);
      for (int i = 0; i < N; ++i) {
        double v = (*warm)(grid.nodes[i]);
        opt.start_at_upper[i] = approx ? fv[i] - v > 0 : v > 0;
      }
    }
    auto r = solve_dense_lp(lp, opt);
    for (int k = 0; k <= n; ++k) coef[k] = approx ? -r.duals[k] : r.duals[k];
    for (int i = 0; i < N; ++i) y[i] = r.x[i];
    out.M = -r.objective;
    out.iterations = r.iterations;
    out.alternative = r.alternative_optima;
  } else {
    // Variables d_0..d_n (free), t_1..t_N >= 0; rows t_i - P(x_i) >= 0, t_i + P(x_i) >= 0,
    // and Lambda(P) = 1 outside approximation mode.
    LPInstance lp;
    int nv = n + 1 + N;
    int rows = 2 * N + (approx ? 0 : 1);
    lp.objective.assign(nv, 0.0);
    lp.lower.assign(nv, 0.0);
    lp.upper.assign(nv, INFINITY);
    for (int k = 0; k <= n; ++k) lp.lower[k] = -INFINITY;
    for (int i = 0; i < N; ++i) lp.objective[n + 1 + i] = grid.weights[i];
    lp.A = Eigen::MatrixXd::Zero(rows, nv);
    lp.sense.assign(rows, RowSense::greater_equal);
    lp.rhs.assign(rows, 0.0);
    for (int i = 0; i < N; ++i) {
      lp.A(2 * i, n + 1 + i) = 1.0;
      lp.A(2 * i + 1, n + 1 + i) = 1.0;
      for (int k = 0; k <= n; ++k) {
        lp.A(2 * i, k) = -phi(i, k);
        lp.A(2 * i + 1, k) = phi(i, k);
      }
      if (approx) {
        lp.rhs[2 * i] = -fv[i];
        lp.rhs[2 * i + 1] = fv[i];
      }
    }
    if (!approx) {
      for (int k = 0; k <= n; ++k) lp.A(2 * N, k) = g[k];
      lp.sense[2 * N] = RowSense::equal;
      lp.rhs[2 * N] = 1.0;
    }
    auto r = solve_dense_lp(lp, opt);
    for (int k = 0; k <= n; ++k) coef[k] = r.x[k];
    for (int i = 0; i < N; ++i) y[i] = r.duals[2 * i + 1] - r.duals[2 * i];
    out.M = r.objective;
    out.iterations = r.iterations;
    out.alternative = r.alternative_optima;
  }
  out.P = ChebyshevSeries(coef, dom);
  out.y = y;
  double sup = 0.0;
  for (int i = 0; i < N; ++i) sup = std::max(sup, std::abs(y[i]) / grid.weights[i]);
  out.dual_sup = out.M > 0 ? sup / out.M : 0.0;
  return out;
}

struct CellZero {
  double node;  // grid node carrying the LP sign change
  double x;     // sign change reconstructed inside the node's quadrature cell
};

// The point x of band b with int_{b.lo}^x w = W.
inline double weight_cdf_inverse(const Interval& b, const WeightSpec& wt, double W) {
  switch (wt.kind()) {
    case WeightSpec::Kind::unit:
      return std::clamp(b.lo + W, b.lo, b.hi);
    case WeightSpec::Kind::reciprocal_abs:
      return std::clamp(b.lo > 0 ? b.lo * std::exp(W) : b.lo * std::exp(-W), b.lo, b.hi);
    default: {
      IntegrateOptions o;
      o.tol = 1e-12;
      if (wt.singular_endpoints()) o.singular = Endpoints::left;
      double a = b.lo, c = b.hi;
      for (int it = 0; it < 60 && c - a > 1e-14 * b.width(); ++it) {
        double m = 0.5 * (a + c);
        (integrate([&](double x) { return wt(x); }, b.lo, m, o) < W ? a : c) = m;
      }
      return 0.5 * (a + c);
    }
  }
}

// A basic LP node with |y_i| < w_i sits where the continuous sign changes. Reading
// the node's quadrature weight as a cell of measure, y_i/w_i says which share of
// the cell lies on each side, which places the sign change to within the cell.
inline std::vector<CellZero> cell_sign_changes(const IntervalSystem& e, const WeightSpec& wt,
                                               const QuadratureGrid& grid, const std::vector<double>& y) {
  std::vector<CellZero> out;
  if (y.size() != grid.size()) return out;
  for (int bi = 0; bi < e.band_count(); ++bi) {
    std::vector<int> idx;
    for (size_t i = 0; i < grid.size(); ++i)
      if (grid.band[i] == bi) idx.push_back(int(i));
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return grid.nodes[a] < grid.nodes[b]; });
    double W = 0.0;
    for (size_t j = 0; j < idx.size(); ++j) {
      int i = idx[j];
      double wi = grid.weights[i];
      double t = wi > 0 ? y[i] / wi : 1.0;
      if (std::abs(t) < 1.0 - 1e-9 && j > 0 && j + 1 < idx.size()) {
        double sl = y[idx[j - 1]] >= 0 ? 1.0 : -1.0, sr = y[idx[j + 1]] >= 0 ? 1.0 : -1.0;
        if (sl != sr) out.push_back({grid.nodes[i], weight_cdf_inverse(e.bands()[bi], wt, W + 0.5 * (1.0 + sl * t) * wi)});
      }
      W += wi;
    }
  }
  return out;
}

struct RootSplit {
  std::vector<std::complex<double>> fixed;  // roots kept as they are
  std::vector<double> z;                    // real roots inside E, ascending
};

// Roots of P split into sign changes inside E and the rest; roots on a cell node
// are moved to the reconstructed position.
inline RootSplit split_roots(const IntervalSystem& e, Interval dom, const ChebyshevSeries& P,
                             const std::vector<CellZero>* cells) {
  RootSplit s;
  double span = dom.width();
  for (auto& r : P.complex_roots()) {
    double x = r.real();
    int b = e.band_of(x);
    bool real = std::abs(r.imag()) <= 1e-7 * span;
    if (real && b >= 0 && x > e.bands()[b].lo && x < e.bands()[b].hi) {
      if (cells)
        for (auto& c : *cells)
          if (std::abs(x - c.node) <= 1e-6 * span) {
            x = c.x;
            break;
          }
      s.z.push_back(x);
    } else {
      s.fixed.push_back(real ? std::complex<double>(x, 0.0) : r);
    }
  }
  std::sort(s.z.begin(), s.z.end());
  return s;
}

// Chebyshev coefficients of the degree-n interpolant of f at the points z.
inline ChebyshevSeries interpolate_at(const std::function<double(double)>& f, const std::vector<double>& z, int n,
                                      Interval dom) {
  Eigen::MatrixXd V(n + 1, n + 1);
  Eigen::VectorXd rhs(n + 1);
  for (int j = 0; j <= n; ++j) {
    auto t = chebyshev_row(z[j], n, dom);
    for (int k = 0; k <= n; ++k) V(j, k) = t[k];
    rhs[j] = f(z[j]);
  }
  Eigen::VectorXd c = V.colPivHouseholderQr().solve(rhs);
  return ChebyshevSeries(std::vector<double>(c.data(), c.data() + n + 1), dom);
}

struct PolishResult {
  bool ok = false;
  std::string status;
  ChebyshevSeries F;
  double M = 0.0;
  std::vector<double> sign_changes;
  double residual = 0.0;
  int iterations = 0;
};

inline bool strictly_inside_bands(const IntervalSystem& e, const std::vector<double>& z,
                                  const std::vector<int>& band) {
  for (size_t j = 0; j < z.size(); ++j) {
    const Interval& b = e.bands()[band[j]];
    if (!(z[j] > b.lo && z[j] < b.hi)) return false;
    if (j > 0 && !(z[j] > z[j - 1])) return false;
  }
  return true;
}

// Newton / Gauss-Newton on the continuous optimality conditions
//   sum_seg sigma_seg int_seg T_k w dx = mu g_k   (functional)     or   = 0   (approximation)
// with the sign-change points z as unknowns. sigma(x) is supplied per segment.
template <class SignOf>
inline bool newton_sign_changes(const IntervalSystem& e, const WeightSpec& wt, int n, Interval dom,
                                const std::vector<double>& g, std::vector<double>& z, std::vector<int>& zband,
                                double& mu, SignOf&& sign_of, double& residual, int& iters,
                                std::string& status) {
  const bool with_mu = !g.empty();
  const int r = int(z.size());
  const int unknowns = r + (with_mu ? 1 : 0);
  auto eval = [&](const std::vector<double>& zz, double m, Eigen::VectorXd& res) {
    res = Eigen::VectorXd::Zero(n + 1);
    for (auto& s : split_bands(e, zz)) {
      double sg = sign_of(s, zz);
      res += sg * segment_moments(s.a, s.b, wt, n, dom, s.band_start, s.band_end);
    }
    if (with_mu)
      for (int k = 0; k <= n; ++k) res[k] -= m * g[k];
  };
  auto scale_of = [&](double m) {
    double s = 0.0;
    for (auto& b : e.bands()) s += std::abs(integrate([&](double x) { return wt(x); }, b.lo, b.hi,
                                                      IntegrateOptions{1e-10, 12, wt.singular_endpoints() ? Endpoints::both : Endpoints::regular}));
    if (with_mu)
      for (double v : g) s = std::max(s, std::abs(m * v));
    return s;
  };
  Eigen::VectorXd res;
  eval(z, mu, res);
  double sc = scale_of(mu);
  if (unknowns == 0) {
    residual = res.lpNorm<Eigen::Infinity>() / sc;
    status = residual < 1e-10 ? "converged" : "no unknowns";
    return residual < 1e-10;
  }
  for (iters = 0; iters < 80; ++iters) {
    double norm = res.norm();
    if (res.lpNorm<Eigen::Infinity>() <= 1e-14 * sc) break;
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n + 1, unknowns);
    for (int j = 0; j < r; ++j) {
      double eps = 1e-9 * dom.width();
      Segment left{z[j] - eps, z[j], zband[j], false, false};
      double sl = sign_of(left, z);
      auto t = chebyshev_row(z[j], n, dom);
      double wz = wt(z[j]);
      for (int k = 0; k <= n; ++k) J(k, j) = 2.0 * sl * t[k] * wz;
    }
    if (with_mu)
      for (int k = 0; k <= n; ++k) J(k, r) = -g[k];
    Eigen::VectorXd step = J.colPivHouseholderQr().solve(-res);
    double lam = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 40; ++ls, lam *= 0.5) {
      std::vector<double> zn = z;
      for (int j = 0; j < r; ++j) zn[j] += lam * step[j];
      if (!strictly_inside_bands(e, zn, zband)) continue;
      double mn = with_mu ? mu + lam * step[r] : mu;
      Eigen::VectorXd rn;
      eval(zn, mn, rn);
      if (rn.norm() < norm * (1.0 - 1e-4 * lam) || rn.lpNorm<Eigen::Infinity>() <= 1e-14 * sc) {
        z = zn;
        mu = mn;
        res = rn;
        moved = true;
        break;
      }
    }
    if (!moved) {
      // A sign change pushed against a band end: report which one.
      for (int j = 0; j < r; ++j) {
        const Interval& b = e.bands()[zband[j]];
        double target = z[j] + step[j];
        if (target <= b.lo || target >= b.hi) {
          status = "boundary:" + std::to_string(j);
          residual = res.lpNorm<Eigen::Infinity>() / sc;
          return false;
        }
      }
      break;
    }
  }
  residual = res.lpNorm<Eigen::Infinity>() / sc;
  if (residual <= 1e-11) {
    status = "converged";
    return true;
  }
  status = "stalled";
  return false;
}

inline std::vector<int> bands_of(const IntervalSystem& e, const std::vector<double>& z) {
  std::vector<int> b;
  for (double x : z) b.push_back(e.band_of(x));
  return b;
}

// Real product of (x - root) over a list of complex roots (conjugate pairs assumed).
inline double root_product(double x, const std::vector<std::complex<double>>& roots, double half) {
  std::complex<double> p = 1.0;
  for (auto& r : roots) p *= (x - r) / half;
  return p.real();
}

inline PolishResult polish_functional(const IntervalSystem& e, const WeightSpec& wt, int n, Interval dom,
                                      const std::vector<double>& g, const LinearFunctional& lam,
                                      const ChebyshevSeries& P, double lpM,
                                      const std::vector<CellZero>* cells = nullptr) {
  PolishResult out;
  double half = 0.5 * dom.width();
  auto [fixed, z] = split_roots(e, dom, P, cells);
  double mu = lpM;
  for (int attempt = 0; attempt <= n; ++attempt) {
    auto zb = bands_of(e, z);
    auto sign_of = [&](const Segment& s, const std::vector<double>& zz) {
      double x = 0.5 * (s.a + s.b);
      double p = root_product(x, fixed, half);
      for (double v : zz) p *= (x - v) / half;
      return p >= 0 ? 1.0 : -1.0;
    };
    // Orient mu with the LP sign: Lambda(Pi) has the sign of the LP leading factor.
    std::vector<double> zz = z;
    double resid = 0.0;
    int it = 0;
    std::string status;
    // Sign of Lambda(Pi) decides the sign of mu.
    auto pi_series = [&](const std::vector<double>& zs) {
      return ChebyshevSeries::interpolate(
          [&](double x) {
            double p = root_product(x, fixed, half);
            for (double v : zs) p *= (x - v) / half;
            return p;
          },
          n, dom);
    };
    double lam_pi = lam(pi_series(zz));
    double mu0 = lam_pi >= 0 ? std::abs(mu) : -std::abs(mu);
    bool ok = newton_sign_changes(e, wt, n, dom, g, zz, zb, mu0, sign_of, resid, it, status);
    out.iterations += it;
    out.residual = resid;
    if (!ok && status.rfind("boundary:", 0) == 0) {
      int j = std::stoi(status.substr(9));
      const Interval& b = e.bands()[zb[j]];
      double end = std::abs(zz[j] - b.lo) < std::abs(zz[j] - b.hi) ? b.lo : b.hi;
      fixed.emplace_back(end, 0.0);
      z = zz;
      z.erase(z.begin() + j);
      continue;
    }
    if (!ok) {
      out.status = status;
      return out;
    }
    auto pis = pi_series(zz);
    double c = 1.0 / lam(pis);
    out.F = pis * c;
    double Mi = mu0 * (c > 0 ? 1.0 : -1.0);
    if (!(Mi > 0)) {
      out.status = "sign inconsistent";
      return out;
    }
    std::vector<double> cuts = zz;
    for (auto& f : fixed)
      if (f.imag() == 0.0) cuts.push_back(f.real());
    double direct = integrate_over(e, wt, [&](double x) { return std::abs(out.F(x)); }, cuts, 1e-13);
    if (std::abs(direct - Mi) > 1e-8 * Mi) {
      out.status = "value mismatch";
      return out;
    }
    out.M = direct;
    out.sign_changes = zz;
    out.ok = true;
    out.status = attempt ? "converged (boundary zero fixed)" : "converged";
    return out;
  }
  out.status = "boundary";
  return out;
}

inline PolishResult polish_approximation(const IntervalSystem& e, const WeightSpec& wt, int n, Interval dom,
                                         const std::function<double(double)>& f, const ChebyshevSeries& P,
                                         const QuadratureGrid& grid,
                                         const std::vector<CellZero>* cells = nullptr) {
  PolishResult out;
  auto err = [&](double x) { return f(x) - P(x); };
  // Sign changes of f - P along the grid within each band.
  std::vector<double> z;
  std::vector<double> first_sign(e.band_count(), 0.0);
  for (int bi = 0; bi < e.band_count(); ++bi) {
    std::vector<double> xs{e.bands()[bi].lo};
    for (size_t i = 0; i < grid.size(); ++i)
      if (grid.band[i] == bi) xs.push_back(grid.nodes[i]);
    xs.push_back(e.bands()[bi].hi);
    std::sort(xs.begin(), xs.end());
    double prev = 0.0, xprev = xs.front();
    for (double x : xs) {
      double v = err(x);
      if (v == 0.0) continue;
      if (first_sign[bi] == 0.0) first_sign[bi] = v > 0 ? 1.0 : -1.0;
      if (prev != 0.0 && (v > 0) != (prev > 0)) {
        double a = xprev, b = x, fa = prev;
        for (int it = 0; it < 100; ++it) {
          double m = 0.5 * (a + b), fm = err(m);
          if ((fm > 0) == (fa > 0)) { a = m; fa = fm; } else { b = m; }
        }
        z.push_back(0.5 * (a + b));
      }
      prev = v;
      xprev = x;
    }
  }
  if (int(z.size()) != n + 1) {
    out.status = "skipped: " + std::to_string(z.size()) + " sign changes";
    return out;
  }
  if (cells && cells->size() == z.size()) {
    std::vector<double> zc;
    for (auto& c : *cells) zc.push_back(c.x);
    std::sort(zc.begin(), zc.end());
    if (strictly_inside_bands(e, zc, bands_of(e, zc))) z = zc;
  }
  auto zb = bands_of(e, z);
  // Sign on a segment: the band's initial sign flipped once per sign change to its left.
  auto sign_of = [&](const Segment& s, const std::vector<double>& zz) {
    double sg = first_sign[s.band];
    double x = 0.5 * (s.a + s.b);
    for (double v : zz)
      if (v > e.bands()[s.band].lo && v < x) sg = -sg;
    return sg;
  };
  double mu = 0.0;
  std::string status;
  bool ok = newton_sign_changes(e, wt, n, dom, {}, z, zb, mu, sign_of, out.residual, out.iterations, status);
  if (!ok) {
    out.status = status;
    return out;
  }
  out.F = interpolate_at(f, z, n, dom);
  auto e2 = [&](double x) { return f(x) - out.F(x); };
  double M = 0.0;
  for (auto& s : split_bands(e, z)) {
    double sg = sign_of(s, z);
    for (int k = 1; k < 64; ++k) {
      double x = s.a + (s.b - s.a) * k / 64.0;
      if (e2(x) * sg < 0.0) {
        out.status = "sign pattern mismatch";
        return out;
      }
    }
    IntegrateOptions o;
    o.tol = 1e-13;
    if (wt.kind() == WeightSpec::Kind::density && wt.singular_endpoints()) {
      o.singular = s.band_start && s.band_end ? Endpoints::both
                   : s.band_start           ? Endpoints::left
                   : s.band_end             ? Endpoints::right
                                            : Endpoints::regular;
    }
    M += sg * integrate([&](double x) { return e2(x) * wt(x); }, s.a, s.b, o);
  }
  out.M = M;
  out.sign_changes = z;
  out.ok = true;
  out.status = "converged";
  return out;
}

// F with the LP roots moved to their cell positions, normalized by the functional.
inline PolishResult cell_functional(const IntervalSystem& e, const WeightSpec& wt, int n, Interval dom,
                                    const LinearFunctional& lam, const ChebyshevSeries& P,
                                    const std::vector<CellZero>& cells) {
  PolishResult out;
  double half = 0.5 * dom.width();
  auto [fixed, z] = split_roots(e, dom, P, &cells);
  auto pis = ChebyshevSeries::interpolate(
      [&](double x) {
        double p = root_product(x, fixed, half);
        for (double v : z) p *= (x - v) / half;
        return p;
      },
      n, dom);
  double l = lam(pis);
  if (!std::isfinite(l) || l == 0.0) {
    out.status = "cell: degenerate";
    return out;
  }
  out.F = pis * (1.0 / l);
  std::vector<double> cuts = z;
  for (auto& r : fixed)
    if (r.imag() == 0.0) cuts.push_back(r.real());
  out.M = integrate_over(e, wt, [&](double x) { return std::abs(out.F(x)); }, cuts, 1e-12);
  out.sign_changes = z;
  out.ok = true;
  out.status = "cell";
  return out;
}

// Interpolant of f at the cell sign changes.
inline PolishResult cell_approximation(const IntervalSystem& e, const WeightSpec& wt, int n, Interval dom,
                                       const std::function<double(double)>& f, const std::vector<CellZero>& cells) {
  PolishResult out;
  if (int(cells.size()) != n + 1) {
    out.status = "cell: " + std::to_string(cells.size()) + " sign changes";
    return out;
  }
  std::vector<double> z;
  for (auto& c : cells) z.push_back(c.x);
  std::sort(z.begin(), z.end());
  out.F = interpolate_at(f, z, n, dom);
  out.M = integrate_over(e, wt, [&](double x) { return std::abs(f(x) - out.F(x)); }, z, 1e-10);
  out.sign_changes = z;
  out.ok = true;
  out.status = "cell";
  return out;
}

}  // namespace detail

// Grid LP for the L1 extremal problem, refined until the value settles, then
// optionally polished on the continuous optimality conditions.
inline ExtremalSolution solve_l1(const IntervalSystem& e, const WeightSpec& w, const L1Mode& mode, int n,
                                 const SolveOptions& opt = {}) {
  if (n < 0) throw ValidationError("solve_l1: degree must be >= 0");
  w.validate(e);
  const Interval dom = e.hull();
  std::optional<LinearFunctional> lam;
  const std::function<double(double)>* f = nullptr;
  if (auto* fm = std::get_if<FunctionalMode>(&mode)) {
    if (fm->functional.degree() != n) throw ValidationError("solve_l1: functional degree differs from n");
    lam = fm->functional;
  } else if (std::holds_alternative<NormalizedAtZero>(mode)) {
    if (dom.contains(0.0)) throw ValidationError("solve_l1: normalized-at-0 mode needs 0 outside the hull");
    lam = LinearFunctional::point(0.0, n);
  } else {
    f = &std::get<Approximate>(mode).f;
    for (auto& b : e.bands())
      for (double x : {b.lo, b.mid(), b.hi})
        if (!std::isfinite((*f)(x))) throw ValidationError("solve_l1: f not finite on E");
  }
  std::vector<double> g;
  if (lam) g = lam->chebyshev_images(dom);

  ExtremalSolution sol;
  sol.degree = n;
  auto& dg = sol.diagnostics;
  dg.formulation = opt.formulation == Formulation::primal ? "primal" : "moment_dual";
  const GridSchedule& gs = opt.grid;
  int graded = gs.graded_layers >= 0 ? gs.graded_layers : (f ? 10 : 0);
  std::optional<ChebyshevSeries> prev;
  detail::LpOutcome best;
  QuadratureGrid grid;
  for (int level = 0, panels = gs.initial_panels; level < gs.max_levels; ++level, panels *= 2) {
    QuadratureOptions qo;
    qo.order = gs.order;
    qo.panels = panels;
    qo.graded_layers = graded;
    grid = build_quadrature(e, w, qo);
    auto out = detail::solve_grid_lp(grid, dom, n, g, f, opt.formulation, opt.lp, prev ? &*prev : nullptr);
    dg.levels.push_back({int(grid.size()), out.M, out.iterations});
    best = out;
    prev = out.P;
    dg.level = level;
    dg.grid_nodes = int(grid.size());
    size_t L = dg.levels.size();
    if (int(L) >= gs.min_levels && std::abs(dg.levels[L - 1].M - dg.levels[L - 2].M) < gs.tolerance) {
      dg.grid_converged = true;
      break;
    }
    if (panels * 2 * gs.order > gs.max_nodes_per_band) break;
  }
  dg.lp_M = best.M;
  dg.alternative_optima = best.alternative;
  dg.dual_sup = best.dual_sup;
  {
    size_t L = dg.levels.size();
    double p = 2.0;
    if (L >= 3) {
      double d1 = std::abs(dg.levels[L - 2].M - dg.levels[L - 3].M), d2 = std::abs(dg.levels[L - 1].M - dg.levels[L - 2].M);
      if (d1 > 0 && d2 > 0) p = std::clamp(std::log2(d1 / d2), 1.0, 4.0);
    }
    dg.richardson_M = L >= 2 ? dg.levels[L - 1].M + (dg.levels[L - 1].M - dg.levels[L - 2].M) / (std::pow(2.0, p) - 1.0)
                             : best.M;
  }

  sol.F_cheb = best.P;
  sol.M = best.M;
  const double guard = std::max(50.0 * gs.tolerance, 2e-2 * best.M);
  std::vector<detail::CellZero> cells;
  if (opt.cell_refine) {
    cells = detail::cell_sign_changes(e, w, grid, best.y);
    detail::PolishResult cr = lam ? detail::cell_functional(e, w, n, dom, *lam, best.P, cells)
                                  : detail::cell_approximation(e, w, n, dom, *f, cells);
    if (cr.ok && std::abs(cr.M - best.M) <= guard) {
      sol.F_cheb = cr.F;
      sol.M = cr.M;
      sol.sign_changes = cr.sign_changes;
      dg.source = "cell";
    }
  }
  if (opt.polish) {
    const auto* seed = cells.empty() ? nullptr : &cells;
    detail::PolishResult pr = lam ? detail::polish_functional(e, w, n, dom, g, *lam, best.P, best.M, seed)
                                  : detail::polish_approximation(e, w, n, dom, *f, best.P, grid, seed);
    dg.polish_status = pr.status;
    dg.polish_residual = pr.residual;
    dg.polish_iterations = pr.iterations;
    if (pr.ok && std::abs(pr.M - best.M) > guard) dg.polish_status = "rejected: far from grid value";
    else if (pr.ok) {
      sol.F_cheb = pr.F;
      sol.M = pr.M;
      sol.sign_changes = pr.sign_changes;
      dg.polished = true;
      dg.source = "polished";
    }
  }
  sol.F = sol.F_cheb.to_polynomial();
  if (sol.F_cheb.degree() >= 0) sol.zeros = sol.F_cheb.real_roots(dom);
  if (sol.sign_changes.empty()) {
    for (double x : sol.zeros.roots) {
      int b = e.band_of(x);
      if (b >= 0 && x > e.bands()[b].lo && x < e.bands()[b].hi) sol.sign_changes.push_back(x);
    }
  }
  for (auto& gap : e.gaps()) sol.gap_signs.push_back(sol.F_cheb(gap.mid()) >= 0 ? 1 : -1);
  if (lam) {
    if (!f) {
      std::vector<int> per_gap(e.gap_count(), 0);
      for (double x : sol.zeros.roots) {
        int gi = e.gap_of(x);
        if (gi >= 0) ++per_gap[gi];
      }
      for (int j = 0; j < e.gap_count(); ++j)
        if (per_gap[j] > 1) sol.violations.push_back("gap " + std::to_string(j) + " holds " + std::to_string(per_gap[j]) + " zeros");
    }
    if (std::holds_alternative<NormalizedAtZero>(mode)) sol.lambda0 = std::exp(-0.5 * sol.M);
  }
  if (!(sol.M > 0.0)) sol.violations.push_back("nonpositive value");
  return sol;
}

// The primal LP of the discretized problem (2N+1 rows) on an explicit grid.
inline LPInstance make_l1_primal_lp(const QuadratureGrid& grid, Interval dom, const LinearFunctional& lam) {
  int n = lam.degree();
  int N = int(grid.size());
  auto g = lam.chebyshev_images(dom);
  LPInstance lp;
  int nv = n + 1 + N;
  lp.objective.assign(nv, 0.0);
  lp.lower.assign(nv, 0.0);
  lp.upper.assign(nv, INFINITY);
  for (int k = 0; k <= n; ++k) lp.lower[k] = -INFINITY;
  for (int i = 0; i < N; ++i) lp.objective[n + 1 + i] = grid.weights[i];
  lp.A = Eigen::MatrixXd::Zero(2 * N + 1, nv);
  lp.sense.assign(2 * N + 1, RowSense::greater_equal);
  lp.rhs.assign(2 * N + 1, 0.0);
  for (int i = 0; i < N; ++i) {
    auto t = detail::chebyshev_row(grid.nodes[i], n, dom);
    lp.A(2 * i, n + 1 + i) = 1.0;
    lp.A(2 * i + 1, n + 1 + i) = 1.0;
    for (int k = 0; k <= n; ++k) {
      lp.A(2 * i, k) = -t[k];
      lp.A(2 * i + 1, k) = t[k];
    }
  }
  for (int k = 0; k <= n; ++k) lp.A(2 * N, k) = g[k];
  lp.sense[2 * N] = RowSense::equal;
  lp.rhs[2 * N] = 1.0;
  return lp;
}

}  // namespace kz
