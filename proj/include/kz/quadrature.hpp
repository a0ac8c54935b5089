#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/legendre.hpp>

#include "kz/error.hpp"

namespace kz {

struct GaussRule {
  std::vector<double> nodes;  // ascending, on [-1, 1]
  std::vector<double> weights;
};

// n-point Gauss-Legendre rule on [-1, 1].
inline GaussRule gauss_legendre(int n) {
  if (n < 1) throw ValidationError("gauss_legendre: order must be >= 1");
  GaussRule g;
  g.nodes.reserve(n);
  g.weights.reserve(n);
  auto pos = boost::math::legendre_p_zeros<double>(n);  // nonnegative zeros
  auto weight = [n](double x) {
    double dp = boost::math::legendre_p_prime(n, x);
    return 2.0 / ((1.0 - x * x) * dp * dp);
  };
  for (auto it = pos.rbegin(); it != pos.rend(); ++it) {
    if (*it == 0.0) continue;
    g.nodes.push_back(-*it);
    g.weights.push_back(weight(*it));
  }
  if (n % 2 == 1) {
    g.nodes.push_back(0.0);
    g.weights.push_back(weight(0.0));
  }
  for (double x : pos) {
    if (x == 0.0) continue;
    g.nodes.push_back(x);
    g.weights.push_back(weight(x));
  }
  return g;
}

// Which ends of [a, b] carry an integrable x^{-1/2}-type singularity.
enum class Endpoints { regular, left, right, both };

struct IntegrateOptions {
  double tol = 1e-12;
  unsigned max_depth = 18;
  Endpoints singular = Endpoints::regular;
};

namespace detail {

template <class F>
auto gk(F&& f, double a, double b, const IntegrateOptions& o) {
  using boost::math::quadrature::gauss_kronrod;
  return gauss_kronrod<double, 15>::integrate(f, a, b, o.max_depth, o.tol);
}

// x = a + t^2 on the left piece, x = b - t^2 on the right piece.
template <class F>
auto integrate_piece(F& f, double a, double b, bool left_sing, bool right_sing,
                     const IntegrateOptions& o) -> decltype(f(a)) {
  if (left_sing && right_sing) {
    double m = 0.5 * (a + b);
    return integrate_piece(f, a, m, true, false, o) + integrate_piece(f, m, b, false, true, o);
  }
  if (left_sing || right_sing) {
    auto g = [&](double t) { return f(left_sing ? a + t * t : b - t * t) * (2.0 * t); };
    // x = a + t^2 carries an absolute rounding error of eps |a|, which swamps t^2 near t = 0.
    // The innermost panel uses a fixed rule whose nodes stay clear of the endpoint.
    double T = std::sqrt(b - a), t1 = T / 8.0;
    static const GaussRule inner = gauss_legendre(24);
    decltype(f(a)) s{};
    for (size_t k = 0; k < inner.nodes.size(); ++k) s += g(0.5 * t1 * (1.0 + inner.nodes[k])) * (0.5 * t1 * inner.weights[k]);
    return s + gk(g, t1, T, o);
  }
  return gk(f, a, b, o);
}

}  // namespace detail

// Adaptive Gauss-Kronrod integral of f over [a, b]; f may be real or complex valued.
// Interior breakpoints (kinks, sign changes) split the range; endpoint singularity
// flags refer to a and b only.
template <class F>
auto integrate(F&& f, double a, double b, const IntegrateOptions& o = {},
               std::vector<double> breaks = {}) {
  std::vector<double> pts{a};
  std::sort(breaks.begin(), breaks.end());
  for (double x : breaks)
    if (x > a && x < b && x > pts.back()) pts.push_back(x);
  pts.push_back(b);
  bool ls = o.singular == Endpoints::left || o.singular == Endpoints::both;
  bool rs = o.singular == Endpoints::right || o.singular == Endpoints::both;
  using R = decltype(f(a));
  R total{};
  for (size_t i = 0; i + 1 < pts.size(); ++i) {
    if (!(pts[i + 1] > pts[i])) continue;
    total += detail::integrate_piece(f, pts[i], pts[i + 1], ls && i == 0, rs && i + 2 == pts.size(), o);
  }
  return total;
}

}  // namespace kz
