#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kz/error.hpp"
#include "kz/quadrature.hpp"

namespace kz {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double width() const { return hi - lo; }
  double mid() const { return 0.5 * (lo + hi); }
  bool contains(double x) const { return x >= lo && x <= hi; }
  bool contains_open(double x) const { return x > lo && x < hi; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

// E as ordered, disjoint closed bands; gaps are the open intervals between them.
class IntervalSystem {
 public:
  IntervalSystem() = default;

  static IntervalSystem make(std::vector<std::pair<double, double>> raw,
                             std::optional<double> truncation = std::nullopt) {
    if (raw.empty()) throw ValidationError("interval system: no bands");
    for (auto& [l, r] : raw) {
      if (!std::isfinite(l) || !std::isfinite(r))
        throw ValidationError("interval system: endpoints must be finite");
      if (!(l < r)) throw ValidationError("interval system: band with l >= r");
    }
    std::sort(raw.begin(), raw.end());
    IntervalSystem e;
    for (size_t i = 0; i < raw.size(); ++i) {
      if (i > 0 && !(raw[i - 1].second < raw[i].first))
        throw ValidationError("interval system: overlapping or touching bands");
      e.bands_.push_back({raw[i].first, raw[i].second});
    }
    for (size_t i = 0; i + 1 < e.bands_.size(); ++i)
      e.gaps_.push_back({e.bands_[i].hi, e.bands_[i + 1].lo});
    if (truncation) {
      double t = *truncation;
      if (!(t > 0.0)) throw ValidationError("interval system: truncation level must be positive");
      if (std::abs(e.bands_.front().lo + t) > 1e-12 * t)
        throw ValidationError("interval system: truncated system must start at -T");
      e.truncation_ = t;
    }
    return e;
  }

  static IntervalSystem from_bands(const std::vector<Interval>& bands,
                             std::optional<double> truncation = std::nullopt) {
    std::vector<std::pair<double, double>> raw;
    for (auto& b : bands) raw.emplace_back(b.lo, b.hi);
    return make(std::move(raw), truncation);
  }

  const std::vector<Interval>& bands() const { return bands_; }
  const std::vector<Interval>& gaps() const { return gaps_; }
  int gap_count() const { return static_cast<int>(gaps_.size()); }
  int band_count() const { return static_cast<int>(bands_.size()); }
  std::optional<double> truncation() const { return truncation_; }

  Interval hull() const { return {bands_.front().lo, bands_.back().hi}; }
  // Left and right ends of the hull, b_0 and a_0.
  double left() const { return bands_.front().lo; }
  double right() const { return bands_.back().hi; }

  // Sorted band endpoints l_0 < r_0 < l_1 < ... < r_m.
  std::vector<double> endpoints() const {
    std::vector<double> out;
    for (auto& b : bands_) {
      out.push_back(b.lo);
      out.push_back(b.hi);
    }
    return out;
  }

  int band_of(double x) const {
    for (size_t i = 0; i < bands_.size(); ++i)
      if (bands_[i].contains(x)) return static_cast<int>(i);
    return -1;
  }
  int gap_of(double x) const {
    for (size_t i = 0; i < gaps_.size(); ++i)
      if (gaps_[i].contains_open(x)) return static_cast<int>(i);
    return -1;
  }
  bool contains(double x) const { return band_of(x) >= 0; }

  double distance(std::complex<double> z) const {
    double best = INFINITY;
    for (auto& b : bands_) {
      double dx = std::clamp(z.real(), b.lo, b.hi) - z.real();
      best = std::min(best, std::hypot(dx, z.imag()));
    }
    return best;
  }

  double length() const {
    double s = 0.0;
    for (auto& b : bands_) s += b.width();
    return s;
  }

  friend bool operator==(const IntervalSystem& a, const IntervalSystem& b) {
    return a.bands_ == b.bands_ && a.truncation_ == b.truncation_;
  }

 private:
  std::vector<Interval> bands_;
  std::vector<Interval> gaps_;
  std::optional<double> truncation_;
};

// One sign per gap; index bit j set means delta_j = -1.
struct SignConfiguration {
  std::vector<int> delta;

  static SignConfiguration from_index(int m, std::uint64_t index) {
    SignConfiguration s;
    s.delta.resize(m);
    for (int j = 0; j < m; ++j) s.delta[j] = (index >> j) & 1u ? -1 : 1;
    return s;
  }
  std::uint64_t index() const {
    std::uint64_t k = 0;
    for (size_t j = 0; j < delta.size(); ++j)
      if (delta[j] < 0) k |= std::uint64_t{1} << j;
    return k;
  }
  int size() const { return static_cast<int>(delta.size()); }
  int operator[](int j) const { return delta[j]; }
  SignConfiguration flipped() const {
    SignConfiguration s = *this;
    for (int& d : s.delta) d = -d;
    return s;
  }
  friend bool operator==(const SignConfiguration&, const SignConfiguration&) = default;
};

inline std::vector<SignConfiguration> enumerate_sign_configurations(int m) {
  if (m < 0 || m > 20) throw ValidationError("sign configurations: gap count out of range");
  std::vector<SignConfiguration> out;
  for (std::uint64_t k = 0; k < (std::uint64_t{1} << m); ++k)
    out.push_back(SignConfiguration::from_index(m, k));
  return out;
}

class WeightSpec {
 public:
  enum class Kind { unit, reciprocal_abs, density };

  static WeightSpec unit() { return WeightSpec(Kind::unit); }
  static WeightSpec reciprocal_abs() { return WeightSpec(Kind::reciprocal_abs); }
  static WeightSpec density(std::function<double(double)> f, bool singular_endpoints,
                            std::string label = "density") {
    WeightSpec w(Kind::density);
    w.f_ = std::move(f);
    w.singular_ = singular_endpoints;
    w.label_ = std::move(label);
    return w;
  }
  // Piecewise-linear interpolation of positive samples (xs ascending).
  static WeightSpec tabulated(std::vector<double> xs, std::vector<double> ys) {
    if (xs.size() < 2 || xs.size() != ys.size())
      throw ValidationError("tabulated weight: need >= 2 matching samples");
    for (size_t i = 0; i < xs.size(); ++i) {
      if (!(ys[i] > 0.0)) throw ValidationError("tabulated weight: samples must be positive");
      if (i && !(xs[i] > xs[i - 1])) throw ValidationError("tabulated weight: abscissae must increase");
    }
    auto f = [xs = std::move(xs), ys = std::move(ys)](double x) {
      if (x <= xs.front()) return ys.front();
      if (x >= xs.back()) return ys.back();
      auto it = std::upper_bound(xs.begin(), xs.end(), x);
      size_t i = it - xs.begin();
      double t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
      return (1 - t) * ys[i - 1] + t * ys[i];
    };
    return density(std::move(f), false, "tabulated");
  }

  Kind kind() const { return kind_; }
  bool singular_endpoints() const { return singular_; }
  std::string name() const {
    switch (kind_) {
      case Kind::unit: return "unit";
      case Kind::reciprocal_abs: return "recip_abs";
      default: return label_;
    }
  }

  double operator()(double x) const {
    switch (kind_) {
      case Kind::unit: return 1.0;
      case Kind::reciprocal_abs: return 1.0 / std::abs(x);
      default: return f_(x);
    }
  }

  void validate(const IntervalSystem& e) const {
    if (kind_ == Kind::reciprocal_abs && e.hull().contains(0.0))
      throw ValidationError("reciprocal-abs weight requires 0 outside the hull of E");
  }

 private:
  explicit WeightSpec(Kind k) : kind_(k) {}
  Kind kind_;
  std::function<double(double)> f_;
  bool singular_ = false;
  std::string label_;
};

struct QuadratureGrid {
  std::vector<double> nodes;
  std::vector<double> weights;  // include the weight function
  std::vector<int> band;
  bool singular = false;

  size_t size() const { return nodes.size(); }
  double mass() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
  }
};

enum class Spacing { automatic, uniform, logarithmic };

struct QuadratureOptions {
  int order = 16;        // Gauss nodes per panel
  int panels = 1;        // panels per band
  bool singular = false; // x = a + t^2 substitution at every band end
  int graded_layers = 0; // geometric refinement of the end panels (non-singular mode)
  Spacing spacing = Spacing::automatic;
};

namespace detail {

inline void append_panel(QuadratureGrid& g, const GaussRule& rule, double a, double b, int band,
                         const WeightSpec& w) {
  double h = 0.5 * (b - a), c = 0.5 * (a + b);
  for (size_t k = 0; k < rule.nodes.size(); ++k) {
    double x = c + h * rule.nodes[k];
    g.nodes.push_back(x);
    g.weights.push_back(h * rule.weights[k] * w(x));
    g.band.push_back(band);
  }
}

// Panel edges across [lo, hi]: uniform, or geometric in |x| for one-signed bands.
inline std::vector<double> panel_edges(double lo, double hi, int panels, bool logarithmic) {
  std::vector<double> e(panels + 1);
  if (logarithmic && lo * hi > 0.0) {
    double a = std::min(std::abs(lo), std::abs(hi)), b = std::max(std::abs(lo), std::abs(hi));
    for (int k = 0; k <= panels; ++k) e[k] = a * std::pow(b / a, double(k) / panels);
    if (hi < 0) {
      for (double& x : e) x = -x;
      std::reverse(e.begin(), e.end());
    }
  } else {
    for (int k = 0; k <= panels; ++k) e[k] = lo + (hi - lo) * double(k) / panels;
  }
  e.front() = lo;
  e.back() = hi;
  return e;
}

}  // namespace detail

// Composite Gauss rule over E carrying the weight w.
inline QuadratureGrid build_quadrature(const IntervalSystem& e, const WeightSpec& w,
                                       const QuadratureOptions& opt) {
  if (opt.order < 1 || opt.panels < 1) throw ValidationError("build_quadrature: order and panels must be >= 1");
  w.validate(e);
  GaussRule rule = gauss_legendre(opt.order);
  QuadratureGrid g;
  g.singular = opt.singular;
  bool logsp = opt.spacing == Spacing::logarithmic ||
               (opt.spacing == Spacing::automatic && w.kind() == WeightSpec::Kind::reciprocal_abs);
  for (int bi = 0; bi < e.band_count(); ++bi) {
    const Interval& b = e.bands()[bi];
    if (opt.singular) {
      double half = 0.5 * b.width();
      double tmax = std::sqrt(half);
      for (int side = 0; side < 2; ++side) {
        for (int p = 0; p < opt.panels; ++p) {
          double t0 = tmax * p / opt.panels, t1 = tmax * (p + 1) / opt.panels;
          double h = 0.5 * (t1 - t0), c = 0.5 * (t0 + t1);
          for (size_t k = 0; k < rule.nodes.size(); ++k) {
            double t = c + h * rule.nodes[k];
            double x = side == 0 ? b.lo + t * t : b.hi - t * t;
            g.nodes.push_back(x);
            g.weights.push_back(h * rule.weights[k] * 2.0 * t * w(x));
            g.band.push_back(bi);
          }
        }
      }
      continue;
    }
    auto edges = detail::panel_edges(b.lo, b.hi, opt.panels, logsp);
    for (int p = 0; p < opt.panels; ++p) {
      double a0 = edges[p], a1 = edges[p + 1];
      bool first = p == 0, last = p == opt.panels - 1;
      if (opt.graded_layers > 0 && (first || last)) {
        // Split toward the band end(s) geometrically with ratio 1/2.
        std::vector<double> cuts{a0, a1};
        int layers = opt.graded_layers;
        if (first) {
          double h = a1 - a0;
          for (int k = 1; k <= layers; ++k) cuts.push_back(a0 + h * std::ldexp(1.0, -k));
        }
        if (last) {
          double h = a1 - a0;
          for (int k = 1; k <= layers; ++k) cuts.push_back(a1 - h * std::ldexp(1.0, -k));
        }
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
        for (size_t k = 0; k + 1 < cuts.size(); ++k) detail::append_panel(g, rule, cuts[k], cuts[k + 1], bi, w);
      } else {
        detail::append_panel(g, rule, a0, a1, bi, w);
      }
    }
  }
  return g;
}

inline QuadratureGrid build_quadrature(const IntervalSystem& e, const WeightSpec& w, int order,
                                       bool singular) {
  QuadratureOptions o;
  o.order = order;
  o.singular = singular;
  return build_quadrature(e, w, o);
}

// Weighted integral of f over E, adaptive per band.
template <class F>
double integrate_over(const IntervalSystem& e, const WeightSpec& w, F&& f,
                      const std::vector<double>& breaks = {}, double tol = 1e-12) {
  double s = 0.0;
  IntegrateOptions o;
  o.tol = tol;
  if (w.kind() == WeightSpec::Kind::density && w.singular_endpoints()) o.singular = Endpoints::both;
  for (auto& b : e.bands()) {
    auto g = [&](double x) { return f(x) * w(x); };
    s += integrate(g, b.lo, b.hi, o, breaks);
  }
  return s;
}

}  // namespace kz
