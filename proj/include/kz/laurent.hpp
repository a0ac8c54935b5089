#pragma once

#include <algorithm>
#include <cmath>
#include <variant>
#include <vector>

#include "kz/error.hpp"
#include "kz/functional.hpp"
#include "kz/interval.hpp"

namespace kz {

// Truncated expansion sum_{k=0}^{K} c_k z^{-k} about infinity.
struct LaurentSeries {
  std::vector<double> c;

  LaurentSeries() = default;
  explicit LaurentSeries(std::vector<double> coeffs) : c(std::move(coeffs)) {
    if (c.empty()) throw ValidationError("LaurentSeries: order must be >= 0");
  }
  static LaurentSeries one(int K) {
    std::vector<double> c(K + 1, 0.0);
    c[0] = 1.0;
    return LaurentSeries(std::move(c));
  }
  // 1 - a/z
  static LaurentSeries linear(double a, int K) {
    LaurentSeries s = one(K);
    if (K >= 1) s.c[1] = -a;
    return s;
  }

  int order() const { return int(c.size()) - 1; }
  double operator[](int k) const { return c[k]; }
  LaurentSeries truncated(int K) const {
    return LaurentSeries(std::vector<double>(c.begin(), c.begin() + std::min<size_t>(K + 1, c.size())));
  }
};

// Moments s_0..s_{n+1} of an expanded symbol.
struct MomentSequence {
  std::vector<double> s;

  size_t size() const { return s.size(); }
  double operator[](size_t k) const { return s[k]; }
};

inline LaurentSeries series_mul(const LaurentSeries& a, const LaurentSeries& b) {
  int K = std::min(a.order(), b.order());
  std::vector<double> c(K + 1, 0.0);
  for (int i = 0; i <= K; ++i)
    for (int j = 0; i + j <= K; ++j) c[i + j] += a.c[i] * b.c[j];
  return LaurentSeries(std::move(c));
}

inline LaurentSeries series_scale(const LaurentSeries& a, double s) {
  LaurentSeries r = a;
  for (double& x : r.c) x *= s;
  return r;
}

inline LaurentSeries series_add(const LaurentSeries& a, const LaurentSeries& b) {
  int K = std::min(a.order(), b.order());
  std::vector<double> c(K + 1);
  for (int k = 0; k <= K; ++k) c[k] = a.c[k] + b.c[k];
  return LaurentSeries(std::move(c));
}

// E' = S' E in the variable u = 1/z gives k E_k = sum_{j=1}^k j s_j E_{k-j}.
inline LaurentSeries series_exp(const LaurentSeries& s) {
  if (!std::isfinite(s.c[0])) throw BranchError("series exp: c_0 not finite");
  int K = s.order();
  std::vector<double> e(K + 1, 0.0);
  e[0] = std::exp(s.c[0]);
  for (int k = 1; k <= K; ++k) {
    double acc = 0.0;
    for (int j = 1; j <= k; ++j) acc += j * s.c[j] * e[k - j];
    e[k] = acc / k;
  }
  return LaurentSeries(std::move(e));
}

// Formal integral of S'/S.
inline LaurentSeries series_log(const LaurentSeries& s) {
  if (!(s.c[0] > 0.0)) throw BranchError("series log: c_0 must be positive");
  int K = s.order();
  std::vector<double> l(K + 1, 0.0);
  l[0] = std::log(s.c[0]);
  for (int k = 1; k <= K; ++k) {
    double acc = k * s.c[k];
    for (int j = 1; j < k; ++j) acc -= j * l[j] * s.c[k - j];
    l[k] = acc / (k * s.c[0]);
  }
  return LaurentSeries(std::move(l));
}

// sqrt((z - a) / (z - b)) = exp(1/2 (log(1 - a/z) - log(1 - b/z))).
inline LaurentSeries series_sqrt_ratio(double a, double b, int K) {
  auto la = series_log(LaurentSeries::linear(a, K));
  auto lb = series_log(LaurentSeries::linear(b, K));
  return series_exp(series_scale(series_add(la, series_scale(lb, -1.0)), 0.5));
}

// S^{delta/2}
inline LaurentSeries series_pow_half(const LaurentSeries& s, int delta) {
  return series_exp(series_scale(series_log(s), 0.5 * delta));
}

namespace series_op {
struct SqrtRatio {
  double a, b;
};
struct Exp {
  LaurentSeries s;
};
struct Log {
  LaurentSeries s;
};
struct Mul {
  LaurentSeries a, b;
};
struct PowHalf {
  LaurentSeries s;
  int delta;
};
}  // namespace series_op

using SeriesOp = std::variant<series_op::SqrtRatio, series_op::Exp, series_op::Log, series_op::Mul,
                              series_op::PowHalf>;

inline LaurentSeries series_elementary(const SeriesOp& op, int K) {
  if (K < 0 || K > 64) throw ValidationError("series: truncation order must be in [0, 64]");
  struct V {
    int K;
    LaurentSeries operator()(const series_op::SqrtRatio& o) const { return series_sqrt_ratio(o.a, o.b, K); }
    LaurentSeries operator()(const series_op::Exp& o) const { return series_exp(o.s.truncated(K)); }
    LaurentSeries operator()(const series_op::Log& o) const { return series_log(o.s.truncated(K)); }
    LaurentSeries operator()(const series_op::Mul& o) const {
      return series_mul(o.a.truncated(K), o.b.truncated(K));
    }
    LaurentSeries operator()(const series_op::PowHalf& o) const {
      return series_pow_half(o.s.truncated(K), o.delta);
    }
  };
  return std::visit(V{K}, op);
}

// Coefficients s_0..s_{n+1} of
//   sqrt((z-a0)/(z-b0)) prod_j sqrt((z-a_j)/(z-b_j))^{delta_j} exp((1/2L) sum_k lambda_k z^{-k-1}),
// with a0/b0 the right/left ends of the hull and (a_j, b_j) the j-th gap.
inline MomentSequence expand_dual_symbol(const IntervalSystem& e, const SignConfiguration& delta,
                                         const std::vector<double>& lambdas, double L) {
  if (!(L > 0.0)) throw ValidationError("expand_dual_symbol: L must be positive");
  if (delta.size() != e.gap_count()) throw ValidationError("expand_dual_symbol: sign configuration length");
  if (lambdas.empty()) throw ValidationError("expand_dual_symbol: empty functional");
  int n = int(lambdas.size()) - 1;
  int K = n + 1;
  LaurentSeries acc = series_sqrt_ratio(e.right(), e.left(), K);
  for (int j = 0; j < e.gap_count(); ++j) {
    const Interval& g = e.gaps()[j];
    auto f = delta[j] > 0 ? series_sqrt_ratio(g.lo, g.hi, K) : series_sqrt_ratio(g.hi, g.lo, K);
    acc = series_mul(acc, f);
  }
  std::vector<double> ex(K + 1, 0.0);
  for (int k = 0; k <= n; ++k) ex[k + 1] = lambdas[k] / (2.0 * L);
  acc = series_mul(acc, series_exp(LaurentSeries(std::move(ex))));
  return MomentSequence{acc.c};
}

inline MomentSequence expand_dual_symbol(const IntervalSystem& e, const SignConfiguration& delta,
                                         const LinearFunctional& f, double L) {
  return expand_dual_symbol(e, delta, f.lambdas(), L);
}

// Moments of the positive measure behind the symbol: 1 - symbol = sum mu_k z^{-k-1}.
inline std::vector<double> dual_measure_moments(const MomentSequence& s) {
  std::vector<double> mu;
  for (size_t k = 1; k < s.size(); ++k) mu.push_back(-s[k]);
  return mu;
}

}  // namespace kz
