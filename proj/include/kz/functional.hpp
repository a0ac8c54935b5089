#pragma once

#include <cmath>
#include <vector>

#include "kz/error.hpp"
#include "kz/poly.hpp"

namespace kz {

// Linear functional on polynomials of degree <= n, Lambda(P) = sum lambda_k c_k.
class LinearFunctional {
 public:
  enum class Kind { infinity, point, coefficients };

  // Leading coefficient of degree n.
  static LinearFunctional infinity(int n) {
    if (n < 0) throw ValidationError("functional: negative degree");
    LinearFunctional f(Kind::infinity, n);
    f.lambdas_.assign(n + 1, 0.0);
    f.lambdas_[n] = 1.0;
    return f;
  }
  // Evaluation at x0.
  static LinearFunctional point(double x0, int n) {
    if (n < 0) throw ValidationError("functional: negative degree");
    LinearFunctional f(Kind::point, n);
    f.x0_ = x0;
    double p = 1.0;
    for (int k = 0; k <= n; ++k, p *= x0) f.lambdas_.push_back(p);
    return f;
  }
  static LinearFunctional from_lambdas(std::vector<double> l) {
    if (l.empty()) throw ValidationError("functional: empty coefficient vector");
    double s = 0.0;
    for (double x : l) s += x * x;
    if (!(s > 0.0)) throw ValidationError("functional: all coefficients vanish");
    LinearFunctional f(Kind::coefficients, int(l.size()) - 1);
    f.lambdas_ = std::move(l);
    return f;
  }

  Kind kind() const { return kind_; }
  int degree() const { return n_; }
  double x0() const { return x0_; }
  double scale() const { return scale_; }
  // Effective lambda_k including the scale factor.
  std::vector<double> lambdas() const {
    std::vector<double> l = lambdas_;
    for (double& x : l) x *= scale_;
    return l;
  }

  double operator()(const Polynomial& p) const {
    if (p.degree() > n_) throw ValidationError("functional: polynomial degree exceeds n");
    if (kind_ == Kind::point) return scale_ * p(x0_);
    double s = 0.0;
    for (int k = 0; k <= n_; ++k) s += lambdas_[k] * p[k];
    return scale_ * s;
  }

  double operator()(const ChebyshevSeries& p) const {
    if (kind_ == Kind::point) return scale_ * p(x0_);
    auto img = chebyshev_images(p.domain());
    double s = 0.0;
    for (size_t k = 0; k < p.coeffs().size() && k < img.size(); ++k) s += img[k] * p.coeffs()[k];
    return s;
  }

  LinearFunctional scaled(double c) const {
    LinearFunctional f = *this;
    f.scale_ *= c;
    return f;
  }

  // g_k = Lambda(T_k(t(x))) for the Chebyshev basis on dom, k = 0..n.
  std::vector<double> chebyshev_images(Interval dom) const {
    std::vector<double> g(n_ + 1, 0.0);
    double half = 0.5 * dom.width();
    if (kind_ == Kind::point) {
      g = chebyshev_t_values((x0_ - dom.mid()) / half, n_);
    } else if (kind_ == Kind::infinity) {
      g[n_] = n_ == 0 ? 1.0 : std::ldexp(1.0, n_ - 1) / std::pow(half, n_);
    } else {
      for (int k = 0; k <= n_; ++k) {
        std::vector<double> e(k + 1, 0.0);
        e[k] = 1.0;
        Polynomial tk = ChebyshevSeries(std::move(e), dom).to_polynomial();
        double s = 0.0;
        for (int j = 0; j <= k; ++j) s += lambdas_[j] * tk[j];
        g[k] = s;
      }
    }
    for (double& x : g) x *= scale_;
    return g;
  }

 private:
  LinearFunctional(Kind k, int n) : kind_(k), n_(n) {}
  Kind kind_;
  int n_;
  double x0_ = 0.0;
  double scale_ = 1.0;
  std::vector<double> lambdas_;
};

}  // namespace kz
