#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "error.hpp"
#include "interval.hpp"
#include "parallel.hpp"
#include "poly.hpp"
#include "quadrature.hpp"

namespace kz {

using cplx = std::complex<double>;

// Pole of the Green function: infinity or a real point off E.
struct GreenPole {
  bool at_infinity = true;
  double point = 0.0;

  static GreenPole infinity() { return {}; }
  static GreenPole at(double x) { return {false, x}; }
};

struct GreenData {
  IntervalSystem E;
  GreenPole pole;
  // Monic P with dG = P(s) ds / sqrt(prod (s - l_i)(s - r_i)). For a finite pole z0 the
  // variable is s = 1/(t - z0) and the bands are the images of E.
  Polynomial numerator;
  IntervalSystem model;  // the set the numerator refers to (E itself for a pole at infinity)
  std::vector<double> critical_points;  // in the original variable, one per gap; +inf when at infinity
  std::vector<double> gap_residuals;    // |period| / integral of |dG| over the gap
  double widom_sum = 0.0;
  std::optional<double> robin;  // lim G(z) - ln|z|, pole at infinity only
};

namespace detail {

// prod sqrt(t - l) sqrt(t - r) at t = a + delta, principal branches; analytic off the bands.
// Differences are formed as (a - p) + delta so that t - a stays exact near an endpoint a.
inline cplx sqrt_h(const IntervalSystem& e, double a, cplx delta) {
  cplx s = 1.0;
  for (auto& b : e.bands()) s *= std::sqrt((a - b.lo) + delta) * std::sqrt((a - b.hi) + delta);
  return s;
}

// prod over bands other than the ones bounding the gap of sqrt|t - l| sqrt|t - r|.
inline double abs_h_outside(const IntervalSystem& e, int gap, double t) {
  double s = 1.0;
  for (int i = 0; i < e.band_count(); ++i) {
    auto& b = e.bands()[i];
    double f = std::abs(t - b.lo) * std::abs(t - b.hi);
    if (i == gap) f = std::abs(t - b.lo);
    if (i == gap + 1) f = std::abs(t - b.hi);
    s *= std::sqrt(f);
  }
  return s;
}

// Integral of f(start, rho d) along t = start + rho d, rho in [0, len], with an inverse square root at
// rho = 0. Beyond rho = 1 the substitution rho = e^u keeps 1/t tails cheap.
template <class F>
cplx ray_integral(F&& f, double start, cplx d, double len, double tol) {
  IntegrateOptions o;
  o.tol = tol;
  // rho = near u^2; the offset is passed exactly, so tiny len is as cheap as len = 1.
  double near = std::min(1.0, len);
  cplx s = integrate([&](double u) { return f(start, near * u * u * d) * d * (2.0 * near * u); }, 0.0, 1.0, o);
  if (len > 1.0) {
    s += integrate([&](double u) { double r = std::exp(u); return f(start, r * d) * d * r; }, 0.0, std::log(len), o);
  }
  return s;
}

}  // namespace detail

struct GreenOptions {
  int chebyshev_nodes = 96;
  double tol = 1e-11;
};

// Green function of C \ E for a finite union of bands, built from the abelian differential
// whose real periods over the gaps vanish.
class GreenFunction {
 public:
  using Options = GreenOptions;

  static GreenFunction build(const IntervalSystem& e, GreenPole pole = {}, Options opt = {}) {
    GreenFunction g;
    g.opt_ = opt;
    g.data_.E = e;
    g.data_.pole = pole;
    if (pole.at_infinity) {
      g.data_.model = e;
    } else {
      double z0 = pole.point;
      if (!std::isfinite(z0)) throw ValidationError("green: finite pole must be a finite number");
      if (e.contains(z0)) throw ValidationError("green: pole lies on E");
      std::vector<std::pair<double, double>> img;
      for (auto& b : e.bands()) img.emplace_back(1.0 / (b.hi - z0), 1.0 / (b.lo - z0));
      g.data_.model = IntervalSystem::make(img);
    }
    g.solve_numerator();
    g.finish();
    return g;
  }

  const GreenData& data() const { return data_; }

  // G(z) with the configured pole; 0 on E, +inf at a finite pole.
  double operator()(cplx z) const {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw ValidationError("green: non-finite argument");
    if (data_.pole.at_infinity) return model_value(z);
    cplx w = z - data_.pole.point;
    if (w == cplx(0.0)) return std::numeric_limits<double>::infinity();
    return model_value(1.0 / w);
  }
  double operator()(double x) const { return (*this)(cplx(x, 0.0)); }

  std::vector<double> values(const std::vector<cplx>& zs, int threads = 0) const {
    return parallel_map(int(zs.size()), [&](int k) { return (*this)(zs[k]); }, threads);
  }

 private:
  GreenData data_;
  Options opt_;
  double scale_c_ = 0.0, scale_h_ = 1.0;  // tau = (s - c) / h for conditioning

  const IntervalSystem& m() const { return data_.model; }

  // Period of tau^k over gap j by Gauss-Chebyshev: the gap's own endpoint factors are the weight.
  double gap_moment(int j, int k) const {
    auto& gap = m().gaps()[j];
    int n = opt_.chebyshev_nodes;
    double mid = gap.mid(), half = 0.5 * gap.width(), s = 0.0;
    for (int i = 1; i <= n; ++i) {
      double t = mid + half * std::cos((2.0 * i - 1.0) * std::numbers::pi / (2.0 * n));
      s += std::pow((t - scale_c_) / scale_h_, k) / detail::abs_h_outside(m(), j, t);
    }
    return s * std::numbers::pi / n;
  }

  void solve_numerator() {
    const auto& e = m();
    int gaps = e.gap_count();
    scale_c_ = 0.5 * (e.left() + e.right());
    scale_h_ = 0.5 * (e.right() - e.left());
    std::vector<double> q(gaps + 1, 0.0);
    q[gaps] = 1.0;
    if (gaps > 0) {
      Eigen::MatrixXd A(gaps, gaps);
      Eigen::VectorXd rhs(gaps);
      for (int j = 0; j < gaps; ++j) {
        for (int k = 0; k < gaps; ++k) A(j, k) = gap_moment(j, k);
        rhs(j) = -gap_moment(j, gaps);
      }
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
      auto sv = svd.singularValues();
      if (sv(sv.size() - 1) <= 1e-13 * sv(0)) throw SingularError("green: singular period matrix");
      Eigen::VectorXd sol = qr.solve(rhs);
      for (int k = 0; k < gaps; ++k) q[k] = sol(k);
    }
    // Back to the s variable and normalized to be monic.
    data_.numerator = Polynomial(q).compose_affine(-scale_c_ / scale_h_, 1.0 / scale_h_).monic();
  }

  cplx dg(double a, cplx delta) const { return data_.numerator(a + delta) / detail::sqrt_h(m(), a, delta); }
  cplx dg(cplx s) const { return dg(0.0, s); }

  // Green function of C \ model with pole at infinity.
  double model_value(cplx z) const {
    const auto& e = m();
    if (z.imag() < 0.0) z = std::conj(z);
    double tol = opt_.tol;
    auto f = [&](double a, cplx delta) { return dg(a, delta); };
    if (z.imag() == 0.0) {
      double x = z.real();
      if (e.contains(x)) return 0.0;
      if (x > e.right()) return std::abs(detail::ray_integral(f, e.right(), 1.0, x - e.right(), tol).real());
      if (x < e.left()) return std::abs(detail::ray_integral(f, e.left(), -1.0, e.left() - x, tol).real());
      auto& gap = e.gaps()[e.gap_of(x)];
      if (x - gap.lo <= gap.hi - x) return std::abs(detail::ray_integral(f, gap.lo, 1.0, x - gap.lo, tol).real());
      return std::abs(detail::ray_integral(f, gap.hi, -1.0, gap.hi - x, tol).real());
    }
    // Straight path from the right end of the hull through the upper half plane.
    cplx d = z - e.right();
    double len = std::abs(d);
    return detail::ray_integral(f, e.right(), d / len, len, tol).real();
  }

  void finish() {
    const auto& e = m();
    // Periods again, now with adaptive endpoint quadrature as an independent check.
    IntegrateOptions o;
    o.tol = 1e-12;
    for (auto& gap : e.gaps()) {
      // Split at the midpoint so each half is anchored at its own endpoint.
      double mid = gap.mid();
      o.singular = Endpoints::left;
      auto lo = [&](double u) { return dg(gap.lo, cplx(u, 0.0)).real(); };
      auto hi = [&](double u) { return dg(gap.hi, cplx(-u, 0.0)).real(); };
      double per = integrate(lo, 0.0, mid - gap.lo, o) + integrate(hi, 0.0, gap.hi - mid, o);
      double mass = integrate([&](double u) { return std::abs(lo(u)); }, 0.0, mid - gap.lo, o) +
                    integrate([&](double u) { return std::abs(hi(u)); }, 0.0, gap.hi - mid, o);
      data_.gap_residuals.push_back(std::abs(per) / mass);
    }
    // Critical points: zeros of P in the gaps of the model set.
    Interval hull{e.left(), e.right()};
    auto roots = e.gap_count() > 0 ? poly_real_roots(data_.numerator, hull).roots : std::vector<double>{};
    data_.widom_sum = 0.0;
    for (double c : roots) {
      if (e.gap_of(c) < 0) continue;
      double back = c;
      if (!data_.pole.at_infinity)
        back = c == 0.0 ? std::numeric_limits<double>::infinity() : data_.pole.point + 1.0 / c;
      data_.critical_points.push_back(back);
      data_.widom_sum += model_value(cplx(c, 0.0));
    }
    std::sort(data_.critical_points.begin(), data_.critical_points.end());
    if (int(data_.critical_points.size()) != e.gap_count())
      throw NumericalError("green: numerator zeros do not interlace the gaps");
    if (data_.pole.at_infinity) {
      // lim G(x) - ln(x - r): near piece plus the tail in w = 1/(x - r).
      double r = e.right();
      double near = detail::ray_integral([&](double a, cplx d) { return dg(a, d); }, r, 1.0, 1.0, 1e-12).real();
      IntegrateOptions ot;
      ot.tol = 1e-12;
      double tail = integrate([&](double w) { return (dg(cplx(r + 1.0 / w, 0.0)).real() - w) / (w * w); }, 0.0, 1.0, ot);
      data_.robin = near + tail;
    }
  }
};

struct GreenValue {
  GreenData data;
  double value = 0.0;
};

inline GreenValue finite_gap_green(const IntervalSystem& e, cplx z, GreenPole pole = {}) {
  if (e.distance(z) == 0.0) throw ValidationError("finite_gap_green: z lies on E");
  auto g = GreenFunction::build(e, pole);
  return {g.data(), g(z)};
}

// ---- E = (-inf, -1] ----

struct MartinData {
  double value = 0.0;  // M(z) = Re sqrt(z + 1)
  double conjugate = 0.0;  // M_*(z)
  cplx theta;  // Theta = -M_* + i M
  double normalization = 1.0;  // M(0)
};

inline MartinData halfline_martin(cplx z) {
  cplx w = std::sqrt(z + 1.0);
  cplx theta = cplx(0.0, 1.0) * w;
  return {w.real(), -theta.real(), theta, std::sqrt(cplx(1.0)).real()};
}

struct HalflineRow {
  int n = 0;
  double v = 0.0;
  double u = 0.0;
  double M = 0.0;  // 2 ln((1 + v^n) / (1 - v^n))
};

struct HalflineReport {
  double lambda = 0.0;
  double M2lambda = 0.0;                // 2 ln coth(lambda)
  double M2lambda_exponential = 0.0;    // 2 ln((1 + e^{-2 lambda}) / (1 - e^{-2 lambda}))
  std::optional<MartinData> martin;
  std::optional<cplx> extremal;         // G_{2 lambda}(z)
  std::vector<HalflineRow> table;
};

inline double halfline_error(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ValidationError("halfline: lambda must be positive");
  return 2.0 * std::log(1.0 / std::tanh(lambda));
}

inline double polynomial_limit_error(int n, double v) {
  if (n < 1) throw ValidationError("polynomial_limit_error: n must be positive");
  if (!(v > 0.0 && v < 1.0)) throw ValidationError("polynomial_limit_error: v must lie in (0, 1)");
  double p = std::pow(v, n);
  return 2.0 * std::log1p(p) - 2.0 * std::log1p(-p);
}

// (1/z)(1 - sinh(2 lambda w) / (2 lambda w)), w = sqrt(z + 1). Infinite at z = 0.
inline cplx halfline_extremal(double lambda, cplx z) {
  if (!(lambda > 0.0)) throw ValidationError("halfline: lambda must be positive");
  cplx a = 2.0 * lambda * std::sqrt(z + 1.0);
  cplx shc = std::abs(a) < 1e-4 ? 1.0 + a * a / 6.0 + a * a * a * a / 120.0 : std::sinh(a) / a;
  if (z == cplx(0.0)) return {std::numeric_limits<double>::infinity(), 0.0};
  return (1.0 - shc) / z;
}

// Closed forms for the half line. The table lists M_n(v) for n = 1..n_max at v (default
// e^{-2 lambda}, where M_1 matches M(2 lambda)).
inline HalflineReport halfline_formulas(double lambda, std::optional<cplx> z = {}, int n_max = 8,
                                        std::optional<double> v = {}) {
  HalflineReport r;
  r.lambda = lambda;
  r.M2lambda = halfline_error(lambda);
  double q = std::exp(-2.0 * lambda);
  r.M2lambda_exponential = 2.0 * std::log((1.0 + q) / (1.0 - q));
  if (z) {
    r.martin = halfline_martin(*z);
    r.extremal = halfline_extremal(lambda, *z);
  }
  double vv = v.value_or(q);
  for (int n = 1; n <= n_max; ++n) r.table.push_back({n, vv, 0.5 * (vv + 1.0 / vv), polynomial_limit_error(n, vv)});
  return r;
}

// Mean of M over a circle minus the centre value; zero for a harmonic function.
inline double martin_mean_value_defect(cplx c, double radius, int samples = 256) {
  double s = 0.0;
  for (int k = 0; k < samples; ++k) s += halfline_martin(c + std::polar(radius, 2.0 * std::numbers::pi * k / samples)).value;
  return s / samples - halfline_martin(c).value;
}

// Integral over (-inf, -1] of |1/x - G_{2 lambda}(x)|, reported next to 2 ln coth(lambda).
struct ExtremalDiscrepancy {
  double lambda = 0.0;
  double reduced = 0.0;  // (1/lambda) int_0^inf |sin 2 lambda s| / (1 + s^2) ds
  double direct = 0.0;   // the x integral, truncated at x = -x_max
  double closed_form = 0.0;
};

inline ExtremalDiscrepancy extremal_discrepancy(double lambda, double x_max = 1e6) {
  ExtremalDiscrepancy d;
  d.lambda = lambda;
  d.closed_form = halfline_error(lambda);
  // Half periods of |sin 2 lambda s| up to S, then the averaged tail (2/pi) int_S^inf ds/(1+s^2).
  IntegrateOptions o;
  o.tol = 1e-13;
  double hp = std::numbers::pi / (2.0 * lambda);
  int periods = int(std::ceil(2000.0 / hp));
  double s = 0.0;
  for (int k = 0; k < periods; ++k)
    s += integrate([&](double t) { return std::abs(std::sin(2.0 * lambda * t)) / (1.0 + t * t); }, k * hp, (k + 1) * hp, o);
  double S = periods * hp;
  s += (2.0 / std::numbers::pi) * (std::numbers::pi / 2.0 - std::atan(S));
  d.reduced = s / lambda;
  // x = -1 - s^2: 1/x - G(x) = sin(2 lambda s) / (2 lambda s x).
  auto g = [&](double t) {
    double x = -1.0 - t * t;
    double a = 2.0 * lambda * t;
    double sinc = t == 0.0 ? 1.0 : std::sin(a) / a;
    return std::abs(sinc / x) * 2.0 * t;
  };
  double smax = std::sqrt(x_max - 1.0);
  int pieces = int(std::ceil(smax / hp));
  double acc = 0.0;
  for (int k = 0; k < pieces; ++k) acc += integrate(g, k * hp, std::min(smax, (k + 1) * hp), o);
  d.direct = acc;
  return d;
}

// ---- exponential type ----

using Majorant = std::function<double(double)>;

inline Majorant halfline_majorant() {
  return [](double x) { return halfline_martin(cplx(x, 0.0)).value; };
}
inline Majorant green_majorant(const GreenFunction& g) {
  if (!g.data().pole.at_infinity) throw ValidationError("green_majorant: pole must be at infinity");
  return [g](double x) { return g(x); };
}

struct ExponentialTypeOptions {
  double x_min = 1e2;
  double x_max = 1e6;
  int points = 9;
  double fit_tol = 1e-3;  // relative rms of the fit before the trend counts as erratic
};

struct ExponentialTypeSample {
  double x = 0.0;
  double log_abs_f = 0.0;
  double majorant = 0.0;
  double ratio = 0.0;
};

struct ExponentialTypeResult {
  std::string status;  // "ok" or "inconclusive"
  double estimate = std::numeric_limits<double>::quiet_NaN();
  double slope = 0.0;  // c in ratio = estimate + c / majorant
  double fit_rms = 0.0;
  bool monotone = true;
  int sign_changes = 0;
  std::vector<ExponentialTypeSample> samples;
  std::string note;
};

// Limit of log|F(x)| / majorant(x) as x -> +inf, from a geometric sample schedule and the
// model ratio = limit + c / majorant. log_abs_f returns log|F(x)|.
inline ExponentialTypeResult exponential_type(const std::function<double(double)>& log_abs_f, const Majorant& majorant,
                                              const ExponentialTypeOptions& opt = {}) {
  if (!(opt.x_min > 0.0 && opt.x_max > opt.x_min) || opt.points < 3)
    throw ValidationError("exponential_type: need 0 < x_min < x_max and at least 3 points");
  ExponentialTypeResult r;
  double q = std::pow(opt.x_max / opt.x_min, 1.0 / (opt.points - 1));
  for (int k = 0; k < opt.points; ++k) {
    double x = opt.x_min * std::pow(q, k);
    ExponentialTypeSample s{x, log_abs_f(x), majorant(x), 0.0};
    s.ratio = s.log_abs_f / s.majorant;
    r.samples.push_back(s);
  }
  for (auto& s : r.samples)
    if (!std::isfinite(s.ratio) || !(s.majorant > 0.0)) {
      r.status = "inconclusive";
      r.note = "non-finite ratio or non-positive majorant";
      return r;
    }
  int n = opt.points;
  Eigen::MatrixXd A(n, 2);
  Eigen::VectorXd b(n);
  for (int k = 0; k < n; ++k) {
    A(k, 0) = 1.0;
    A(k, 1) = 1.0 / r.samples[k].majorant;
    b(k) = r.samples[k].ratio;
  }
  Eigen::VectorXd c = A.colPivHouseholderQr().solve(b);
  r.estimate = c(0);
  r.slope = c(1);
  r.fit_rms = std::sqrt((A * c - b).squaredNorm() / n);
  int last = 0;
  for (int k = 0; k + 1 < n; ++k) {
    double d = r.samples[k + 1].ratio - r.samples[k].ratio;
    int sg = std::abs(d) <= 1e-14 * (1.0 + std::abs(r.samples[k].ratio)) ? 0 : (d > 0 ? 1 : -1);
    if (sg != 0 && last != 0 && sg != last) ++r.sign_changes;
    if (sg != 0) last = sg;
  }
  r.monotone = r.sign_changes == 0;
  double scale = std::max(1.0, std::abs(r.estimate));
  if (!r.monotone && r.fit_rms > opt.fit_tol * scale) {
    r.status = "inconclusive";
    r.note = "ratio oscillates and does not follow the c / majorant model";
  } else {
    r.status = "ok";
  }
  return r;
}

}  // namespace kz
