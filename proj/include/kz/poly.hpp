#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <numbers>
#include <sstream>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "kz/error.hpp"
#include "kz/interval.hpp"

namespace kz {

// Real polynomial, coefficients in ascending degree. The zero polynomial has no
// stored coefficients and degree -1.
class Polynomial {
 public:
  Polynomial() = default;
  Polynomial(std::initializer_list<double> c) : c_(c) { trim(); }
  explicit Polynomial(std::vector<double> c) : c_(std::move(c)) { trim(); }

  static Polynomial constant(double v) { return Polynomial({v}); }
  static Polynomial monomial(int k, double v = 1.0) {
    std::vector<double> c(k + 1, 0.0);
    c[k] = v;
    return Polynomial(std::move(c));
  }
  template <class Range>
  static Polynomial from_roots(const Range& roots, double lead = 1.0) {
    Polynomial p = constant(lead);
    for (double r : roots) p = p * Polynomial({-r, 1.0});
    return p;
  }

  const std::vector<double>& coeffs() const { return c_; }
  int degree() const { return static_cast<int>(c_.size()) - 1; }
  bool is_zero() const { return c_.empty(); }
  double operator[](int k) const { return k >= 0 && k < int(c_.size()) ? c_[k] : 0.0; }
  double leading() const { return c_.empty() ? 0.0 : c_.back(); }

  template <class T>
  T operator()(T x) const {
    T acc = T(0);
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + T(*it);
    return acc;
  }

  Polynomial derivative() const {
    if (c_.size() <= 1) return {};
    std::vector<double> d(c_.size() - 1);
    for (size_t k = 1; k < c_.size(); ++k) d[k - 1] = double(k) * c_[k];
    return Polynomial(std::move(d));
  }

  // p(a + b x)
  Polynomial compose_affine(double a, double b) const {
    Polynomial lin({a, b}), acc;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * lin + constant(*it);
    return acc;
  }

  Polynomial monic() const {
    if (c_.empty()) throw ValidationError("monic: zero polynomial");
    return *this * (1.0 / leading());
  }

  // Quotient and remainder of division by d.
  std::pair<Polynomial, Polynomial> divmod(const Polynomial& d) const {
    if (d.is_zero()) throw ValidationError("divmod: division by zero polynomial");
    std::vector<double> r = c_;
    int nd = d.degree();
    if (degree() < nd) return {Polynomial{}, *this};
    std::vector<double> q(degree() - nd + 1, 0.0);
    for (int k = degree() - nd; k >= 0; --k) {
      double f = r[k + nd] / d.leading();
      q[k] = f;
      for (int j = 0; j <= nd; ++j) r[k + j] -= f * d.c_[j];
    }
    r.resize(nd);
    return {Polynomial(std::move(q)), Polynomial(std::move(r))};
  }

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    std::vector<double> c(std::max(a.c_.size(), b.c_.size()), 0.0);
    for (size_t k = 0; k < c.size(); ++k) c[k] = a[k] + b[k];
    return Polynomial(std::move(c));
  }
  friend Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + b * -1.0; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<double> c(a.c_.size() + b.c_.size() - 1, 0.0);
    for (size_t i = 0; i < a.c_.size(); ++i)
      for (size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
    return Polynomial(std::move(c));
  }
  friend Polynomial operator*(const Polynomial& a, double s) {
    std::vector<double> c = a.c_;
    for (double& x : c) x *= s;
    return Polynomial(std::move(c));
  }
  friend Polynomial operator*(double s, const Polynomial& a) { return a * s; }

 private:
  void trim() {
    while (!c_.empty() && c_.back() == 0.0) c_.pop_back();
  }
  std::vector<double> c_;
};

template <class T>
T poly_eval(const Polynomial& p, T x) {
  return p(x);
}

// Monic second-kind Chebyshev polynomial U_n / 2^n.
inline Polynomial monic_chebyshev_second(int n) {
  if (n < 0) throw ValidationError("monic_chebyshev_second: negative degree");
  Polynomial prev = Polynomial::constant(1.0), cur({0.0, 1.0});
  if (n == 0) return prev;
  for (int k = 1; k < n; ++k) {
    Polynomial next = Polynomial({0.0, 1.0}) * cur - 0.25 * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

struct RootList {
  std::vector<double> roots;  // ascending
  std::vector<int> multiplicities;

  size_t size() const { return roots.size(); }
  bool empty() const { return roots.empty(); }
  bool all_simple() const {
    return std::all_of(multiplicities.begin(), multiplicities.end(), [](int m) { return m == 1; });
  }
};

namespace detail {

// Turn approximate eigenvalues into polished real roots in [lo, hi].
// eval(x) evaluates the polynomial, scale(x) bounds the rounding level of eval at x.
template <class Eval, class Scale>
RootList polish_real_roots(const std::vector<std::complex<double>>& eig, double lo, double hi,
                           Eval&& eval, Scale&& scale, double span) {
  std::vector<double> cand;
  for (auto& l : eig) {
    double mag = std::max(span, std::abs(l));
    if (std::abs(l.imag()) > 1e-5 * mag) continue;
    double slack = 1e-9 * span;
    if (l.real() < lo - slack || l.real() > hi + slack) continue;
    cand.push_back(l.real());
  }
  std::sort(cand.begin(), cand.end());
  std::vector<double> pol(cand.size());
  for (size_t i = 0; i < cand.size(); ++i) {
    double r0 = cand[i];
    double room = span;
    if (i > 0) room = std::min(room, 0.5 * (r0 - cand[i - 1]));
    if (i + 1 < cand.size()) room = std::min(room, 0.5 * (cand[i + 1] - r0));
    double x = r0;
    for (double d = 1e-13 * span; d <= room && d > 0; d *= 8.0) {
      double a = r0 - d, b = r0 + d;
      double fa = eval(a), fb = eval(b);
      if (fa == 0.0) { x = a; break; }
      if (fb == 0.0) { x = b; break; }
      if ((fa < 0) != (fb < 0)) {
        for (int it = 0; it < 200 && b - a > 4e-16 * std::max(1.0, std::abs(a)); ++it) {
          double m = 0.5 * (a + b), fm = eval(m);
          if (fm == 0.0) { a = b = m; break; }
          if ((fm < 0) == (fa < 0)) { a = m; fa = fm; } else { b = m; }
        }
        x = 0.5 * (a + b);
        break;
      }
    }
    pol[i] = std::clamp(x, lo, hi);
  }
  RootList out;
  double tol = 1e-7 * span;
  for (size_t i = 0; i < pol.size();) {
    size_t j = i + 1;
    double sum = pol[i];
    while (j < pol.size() && pol[j] - pol[j - 1] <= tol) sum += pol[j++];
    double r = sum / double(j - i);
    int mult = int(j - i);
    double res = std::abs(eval(r)), sc = scale(r);
    if (res > 1e-6 * sc) {
      std::ostringstream msg;
      msg << "root isolation: defective companion, |p(" << r << ")| = " << res << " vs scale " << sc;
      throw NumericalError(msg.str());
    }
    out.roots.push_back(r);
    out.multiplicities.push_back(mult);
    i = j;
  }
  return out;
}

inline std::vector<std::complex<double>> eigenvalues(const Eigen::MatrixXd& m) {
  if (m.rows() == 0) return {};
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
  if (es.info() != Eigen::Success) throw NumericalError("root isolation: eigenvalue iteration failed");
  std::vector<std::complex<double>> out;
  for (int i = 0; i < es.eigenvalues().size(); ++i) out.push_back(es.eigenvalues()[i]);
  return out;
}

}  // namespace detail

// Real roots of p inside the closed interval hull.
inline RootList poly_real_roots(const Polynomial& p, Interval hull) {
  if (p.is_zero()) throw ValidationError("poly_real_roots: zero polynomial");
  int n = p.degree();
  if (n == 0) return {};
  if (n == 1) {
    double r = -p[0] / p[1];
    if (hull.contains(r)) return {{r}, {1}};
    return {};
  }
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) comp(i, n - 1) = -p[i] / p.leading();
  auto eig = detail::eigenvalues(comp);
  double span = std::max({1.0, std::abs(hull.lo), std::abs(hull.hi)});
  auto scale = [&](double x) {
    double s = 0.0, xp = 1.0, ax = std::max(1.0, std::abs(x));
    for (int k = 0; k <= n; ++k, xp *= ax) s += std::abs(p[k]) * xp;
    return s;
  };
  return detail::polish_real_roots(eig, hull.lo, hull.hi, [&](double x) { return p(x); }, scale, span);
}

// Chebyshev series sum c_k T_k(t) with t the affine image of x in domain onto [-1, 1].
class ChebyshevSeries {
 public:
  ChebyshevSeries() = default;
  ChebyshevSeries(std::vector<double> c, Interval domain) : c_(std::move(c)), dom_(domain) {
    if (!(dom_.hi > dom_.lo)) throw ValidationError("ChebyshevSeries: empty domain");
  }

  template <class F>
  static ChebyshevSeries interpolate(F&& f, int n, Interval domain) {
    std::vector<double> vals(n + 1), c(n + 1, 0.0);
    const double pi = std::numbers::pi;
    for (int j = 0; j <= n; ++j) {
      double t = std::cos(pi * (j + 0.5) / (n + 1));
      vals[j] = f(domain.mid() + 0.5 * domain.width() * t);
    }
    for (int k = 0; k <= n; ++k) {
      double s = 0.0;
      for (int j = 0; j <= n; ++j) s += vals[j] * std::cos(pi * k * (j + 0.5) / (n + 1));
      c[k] = 2.0 * s / (n + 1);
    }
    c[0] *= 0.5;
    return ChebyshevSeries(std::move(c), domain);
  }

  static ChebyshevSeries from_polynomial(const Polynomial& p, Interval domain) {
    Polynomial q = p.compose_affine(domain.mid(), 0.5 * domain.width());
    // Horner in the Chebyshev basis: acc <- t * acc + q_k.
    std::vector<double> acc;
    for (int k = q.degree(); k >= 0; --k) {
      std::vector<double> next(acc.size() + 1, 0.0);
      for (size_t j = 0; j < acc.size(); ++j) {
        if (j == 0) {
          next[1] += acc[0];
        } else {
          next[j + 1] += 0.5 * acc[j];
          next[j - 1] += 0.5 * acc[j];
        }
      }
      next[0] += q[k];
      acc = std::move(next);
    }
    return ChebyshevSeries(std::move(acc), domain);
  }

  Polynomial to_polynomial() const {
    // Monomial coefficients in t, then t = (x - mid) / half.
    std::vector<double> sum(c_.size(), 0.0);
    std::vector<double> tkm1{1.0}, tk{0.0, 1.0};
    for (size_t k = 0; k < c_.size(); ++k) {
      const std::vector<double>& tkk = k == 0 ? tkm1 : tk;
      for (size_t j = 0; j < tkk.size(); ++j) sum[j] += c_[k] * tkk[j];
      if (k >= 1) {
        std::vector<double> next(tk.size() + 1, 0.0);
        for (size_t j = 0; j < tk.size(); ++j) next[j + 1] += 2.0 * tk[j];
        for (size_t j = 0; j < tkm1.size(); ++j) next[j] -= tkm1[j];
        tkm1 = std::move(tk);
        tk = std::move(next);
      }
    }
    double half = 0.5 * dom_.width();
    return Polynomial(std::move(sum)).compose_affine(-dom_.mid() / half, 1.0 / half);
  }

  const std::vector<double>& coeffs() const { return c_; }
  Interval domain() const { return dom_; }
  int degree() const {
    int d = int(c_.size()) - 1;
    while (d >= 0 && c_[d] == 0.0) --d;
    return d;
  }

  template <class T>
  T to_local(T x) const {
    return (x - dom_.mid()) / (0.5 * dom_.width());
  }

  // Clenshaw recurrence.
  template <class T>
  T operator()(T x) const {
    T t = to_local(x);
    T b1 = T(0), b2 = T(0);
    for (int k = int(c_.size()) - 1; k >= 1; --k) {
      T b0 = T(2) * t * b1 - b2 + T(c_[k]);
      b2 = b1;
      b1 = b0;
    }
    return t * b1 - b2 + T(c_.empty() ? 0.0 : c_[0]);
  }

  ChebyshevSeries derivative() const {
    int n = int(c_.size()) - 1;
    if (n <= 0) return ChebyshevSeries({0.0}, dom_);
    std::vector<double> d(n + 2, 0.0);
    for (int k = n; k >= 1; --k) d[k - 1] = d[k + 1] + 2.0 * k * c_[k];
    d[0] *= 0.5;
    d.resize(n);
    double half = 0.5 * dom_.width();
    for (double& x : d) x /= half;
    return ChebyshevSeries(std::move(d), dom_);
  }

  // Sum |c_k|: bound on |f| over the domain, used as the rounding scale.
  double coefficient_norm() const {
    double s = 0.0;
    for (double x : c_) s += std::abs(x);
    return s;
  }

  // All roots in the local variable mapped back to x, via the colleague matrix.
  std::vector<std::complex<double>> complex_roots() const {
    int n = degree();
    std::vector<std::complex<double>> out;
    if (n <= 0) return out;
    double mid = dom_.mid(), half = 0.5 * dom_.width();
    if (n == 1) {
      out.emplace_back(mid + half * (-c_[0] / c_[1]));
      return out;
    }
    Eigen::MatrixXd col = Eigen::MatrixXd::Zero(n, n);
    col(0, 1) = 1.0;
    for (int i = 1; i < n; ++i) {
      col(i, i - 1) = 0.5;
      if (i + 1 < n) col(i, i + 1) = 0.5;
    }
    for (int j = 0; j < n; ++j) col(n - 1, j) -= c_[j] / (2.0 * c_[n]);
    for (auto& t : detail::eigenvalues(col)) out.push_back(mid + half * t);
    return out;
  }

  RootList real_roots(Interval within) const {
    int n = degree();
    if (n < 0) throw ValidationError("real_roots: zero series");
    if (n == 0) return {};
    double span = std::max({1.0, std::abs(within.lo), std::abs(within.hi), dom_.width()});
    double sc = coefficient_norm();
    return detail::polish_real_roots(
        complex_roots(), within.lo, within.hi, [&](double x) { return (*this)(x); },
        [&](double x) {
          double t = std::max(1.0, std::abs(to_local(x)));
          return sc * std::pow(t, n);
        },
        span);
  }

  ChebyshevSeries operator*(double s) const {
    std::vector<double> c = c_;
    for (double& x : c) x *= s;
    return ChebyshevSeries(std::move(c), dom_);
  }

 private:
  std::vector<double> c_;
  Interval dom_{-1.0, 1.0};
};

// T_k(t) for k = 0..n at a single point.
inline std::vector<double> chebyshev_t_values(double t, int n) {
  std::vector<double> v(n + 1);
  v[0] = 1.0;
  if (n >= 1) v[1] = t;
  for (int k = 2; k <= n; ++k) v[k] = 2.0 * t * v[k - 1] - v[k - 2];
  return v;
}

}  // namespace kz
