#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kz/error.hpp"
#include "kz/interval.hpp"
#include "kz/laurent.hpp"
#include "kz/parallel.hpp"
#include "kz/poly.hpp"
#include "kz/quadrature.hpp"

namespace kz {

// Positive density on a system of bands; `singular` marks x^{-1/2}-type behaviour at band ends.
struct Measure {
  IntervalSystem support;
  std::function<double(double)> density;
  bool singular = false;
  std::string label;

  static Measure lebesgue(const IntervalSystem& e) { return {e, [](double) { return 1.0; }, false, "lebesgue"}; }
  static Measure arcsine() {
    return {IntervalSystem::make({{-1.0, 1.0}}), [](double x) { return 1.0 / (M_PI * std::sqrt(1.0 - x * x)); },
            true, "arcsine"};
  }
  double operator()(double x) const { return density(x); }

  // int g(x) rho(x) dx over the support.
  template <class G>
  auto integrate(G&& g, double tol = 1e-13) const {
    IntegrateOptions o;
    o.tol = tol;
    o.singular = singular ? Endpoints::both : Endpoints::regular;
    using R = decltype(g(0.0));
    R s{};
    for (auto& b : support.bands())
      s += kz::integrate([&](double x) { return g(x) * density(x); }, b.lo, b.hi, o);
    return s;
  }
};

// |R(x)| / pi on E where R + 1 = sqrt((z-a0)/(z-b0)) prod_j sqrt((z-a_j)/(z-b_j))^{delta_j}.
// R is the Cauchy transform int rho(x) dx / (x - z).
class SpectralDensity {
 public:
  SpectralDensity(IntervalSystem e, SignConfiguration delta) : e_(std::move(e)), delta_(std::move(delta)) {
    if (delta_.size() != e_.gap_count()) throw ValidationError("SpectralDensity: sign configuration length");
  }

  const IntervalSystem& support() const { return e_; }
  const SignConfiguration& delta() const { return delta_; }

  // Principal-branch product; analytic off E.
  std::complex<double> symbol(std::complex<double> z) const {
    std::complex<double> s = std::sqrt((z - e_.right()) / (z - e_.left()));
    for (int j = 0; j < e_.gap_count(); ++j) {
      const Interval& g = e_.gaps()[j];
      s *= delta_[j] > 0 ? std::sqrt((z - g.lo) / (z - g.hi)) : std::sqrt((z - g.hi) / (z - g.lo));
    }
    return s;
  }
  std::complex<double> R(std::complex<double> z) const { return symbol(z) - 1.0; }

  // Boundary value from the upper half plane. Every factor sqrt((x-a)/(x-b)) equals
  // sqrt(ratio) when the ratio is positive and i sgn(a-b) sqrt(|ratio|) between a and b.
  std::complex<double> symbol_upper(double x) const {
    std::complex<double> s = factor(x, e_.right(), e_.left());
    for (int j = 0; j < e_.gap_count(); ++j) {
      const Interval& g = e_.gaps()[j];
      s *= delta_[j] > 0 ? factor(x, g.lo, g.hi) : factor(x, g.hi, g.lo);
    }
    return s;
  }
  std::complex<double> R_upper(double x) const { return symbol_upper(x) - 1.0; }

  double density(double x) const {
    if (!e_.contains(x)) return 0.0;
    return std::abs(symbol_upper(x)) / M_PI;
  }

  Measure measure() const {
    auto self = *this;
    return {e_, [self](double x) { return self.density(x); }, true, "spectral"};
  }

  std::vector<double> samples(const std::vector<double>& xs) const {
    std::vector<double> out;
    for (double x : xs) out.push_back(density(x));
    return out;
  }

 private:
  static std::complex<double> factor(double x, double a, double b) {
    double r = (x - a) / (x - b);
    if (r >= 0.0) return std::sqrt(r);
    return {0.0, (a > b ? 1.0 : -1.0) * std::sqrt(-r)};
  }

  IntervalSystem e_;
  SignConfiguration delta_;
};

// int x^k rho(x) dx for k = 0..K.
inline MomentSequence measure_moments(const Measure& rho, int K) {
  if (K < 0) throw ValidationError("measure_moments: negative count");
  MomentSequence s;
  for (int k = 0; k <= K; ++k) s.s.push_back(rho.integrate([k](double x) { return std::pow(x, k); }));
  if (!(s.s[0] > 0.0)) throw ValidationError("measure_moments: nonpositive mass");
  return s;
}

inline MomentSequence measure_moments(const SpectralDensity& rho, int K) {
  return measure_moments(rho.measure(), K);
}

// Orthonormal recurrence x p_k = b_k p_{k+1} + a_k p_k + b_{k-1} p_{k-1}.
struct Recurrence {
  std::vector<double> a, b;
  double mass = 1.0;

  int size() const { return int(a.size()); }
  // mass * (J^k)_{00} for k = 0..K using the truncated Jacobi matrix.
  std::vector<double> moments(int K) const {
    int n = size();
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      J(i, i) = a[i];
      if (i + 1 < n) J(i, i + 1) = J(i + 1, i) = b[i];
    }
    std::vector<double> out;
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    v[0] = 1.0;
    for (int k = 0; k <= K; ++k) {
      out.push_back(mass * v[0]);
      v = J * v;
    }
    return out;
  }
};

struct OrthoPair {
  int degree = 0;
  Polynomial C;  // orthonormal, first kind
  Polynomial A;  // int (C(z) - C(x)) / (z - x) d rho(x)
  double leading = 1.0;   // leading coefficient of C
  double monic_norm2 = 1.0;  // int (C / leading)^2 d rho
};

struct OrthoSystem {
  Recurrence recurrence;
  std::vector<OrthoPair> pairs;  // degrees 0..N
};

namespace detail {

inline std::vector<double> map_moment_vector(const std::vector<double>& s, double c, double h) {
  std::vector<double> m(s.size(), 0.0);
  for (size_t k = 0; k < s.size(); ++k) {
    double binom = 1.0;
    for (size_t j = 0; j <= k; ++j) {
      m[k] += binom * std::pow(-c, double(k - j)) * s[j];
      binom = binom * double(k - j) / double(j + 1);
    }
    m[k] /= std::pow(h, double(k));
  }
  return m;
}

// Second kind polynomial from moments m: sum_j c_j sum_{i<j} z^i m_{j-1-i}.
inline Polynomial second_kind(const Polynomial& C, const std::vector<double>& m) {
  int n = C.degree();
  if (n <= 0) return Polynomial();
  std::vector<double> a(n, 0.0);
  for (int j = 1; j <= n; ++j)
    for (int i = 0; i < j; ++i) a[i] += C[j] * m[j - 1 - i];
  return Polynomial(a);
}

// Orthonormal polynomials in the variable t from moments m_0..m_{2N} (t-moments).
inline OrthoSystem orthosystem_t(const std::vector<double>& m, int N, double tol) {
  if (int(m.size()) < 2 * N + 1) throw ValidationError("orthopolys: need moments up to 2N");
  if (!(m[0] > 0.0)) throw ValidationError("orthopolys: nonpositive mass");
  Eigen::MatrixXd H(N + 1, N + 1);
  for (int i = 0; i <= N; ++i)
    for (int j = 0; j <= N; ++j) H(i, j) = m[i + j];
  // Cholesky H = L L^T with a rank check per degree.
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(N + 1, N + 1);
  for (int j = 0; j <= N; ++j) {
    double d = H(j, j);
    for (int k = 0; k < j; ++k) d -= L(j, k) * L(j, k);
    if (!(d > tol * std::abs(H(j, j)))) throw RankError("orthopolys: Hankel matrix singular at degree " + std::to_string(j), j);
    L(j, j) = std::sqrt(d);
    for (int i = j + 1; i <= N; ++i) {
      double s = H(i, j);
      for (int k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
      L(i, j) = s / L(j, j);
    }
  }
  // Rows of L^{-1} are the coefficient vectors of p_0..p_N.
  Eigen::MatrixXd Li = L.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(N + 1, N + 1));
  OrthoSystem os;
  std::vector<Polynomial> p;
  for (int k = 0; k <= N; ++k) {
    std::vector<double> c(k + 1);
    for (int j = 0; j <= k; ++j) c[j] = Li(k, j);
    p.emplace_back(c);
  }
  os.recurrence.mass = m[0];
  for (int k = 0; k < N; ++k) {
    double bk = p[k].leading() / p[k + 1].leading();
    Polynomial r = Polynomial({0.0, 1.0}) * p[k] - p[k + 1] * bk;
    if (k > 0) r = r - p[k - 1] * os.recurrence.b[k - 1];
    os.recurrence.a.push_back(r.degree() >= k ? r[k] / p[k].leading() : 0.0);
    os.recurrence.b.push_back(bk);
  }
  for (int k = 0; k <= N; ++k) {
    OrthoPair op;
    op.degree = k;
    op.C = p[k];
    op.A = second_kind(p[k], m);
    op.leading = p[k].leading();
    op.monic_norm2 = 1.0 / (op.leading * op.leading);
    os.pairs.push_back(op);
  }
  return os;
}

// Map an orthosystem in t = (x - c) / h back to x.
inline OrthoSystem unmap(OrthoSystem os, double c, double h) {
  for (double& a : os.recurrence.a) a = c + h * a;
  for (double& b : os.recurrence.b) b *= h;
  for (auto& op : os.pairs) {
    op.C = op.C.compose_affine(-c / h, 1.0 / h);
    op.A = op.A.compose_affine(-c / h, 1.0 / h) * (1.0 / h);
    op.leading = op.C.degree() >= 0 ? op.C.leading() : 0.0;
    op.monic_norm2 = 1.0 / (op.leading * op.leading);
  }
  return os;
}

}  // namespace detail

// Orthonormal polynomials of degrees 0..N by Cholesky of the Hankel matrix. When a support
// interval is given, the moments are mapped to [-1, 1] first for conditioning.
inline OrthoSystem orthopolys_from_moments(const MomentSequence& s, int N,
                                           std::optional<Interval> support = std::nullopt, double tol = 1e-13) {
  if (N < 0) throw ValidationError("orthopolys: negative degree");
  double c = 0.0, h = 1.0;
  if (support) {
    c = support->mid();
    h = 0.5 * support->width();
  }
  auto m = support ? detail::map_moment_vector(s.s, c, h) : s.s;
  return detail::unmap(detail::orthosystem_t(m, N, tol), c, h);
}

// Same, with the t-moments computed directly by quadrature on the measure.
inline OrthoSystem orthopolys(const Measure& rho, int N, double tol = 1e-13) {
  Interval hull = rho.support.hull();
  double c = hull.mid(), h = 0.5 * hull.width();
  std::vector<double> m;
  for (int k = 0; k <= 2 * N; ++k) m.push_back(rho.integrate([&](double x) { return std::pow((x - c) / h, k); }));
  return detail::unmap(detail::orthosystem_t(m, N, tol), c, h);
}

struct PeherstorferCandidate {
  SignConfiguration delta;
  Polynomial C;  // monic denominator of degree ceil(n/2)
  Polynomial A;  // second kind of C with respect to rho_delta
  Polynomial F;  // monic candidate of degree n
  double monic_norm2 = 0.0;  // int C^2 d rho (even n), int q^2 (x - b0) d rho (odd n)
  double M = 0.0;            // 2 * monic_norm2
  double C_norm2 = 0.0;      // int C^2 d rho
  RootList zeros;            // zeros of F
  int gap_zeros = 0;         // zeros of F in the open gaps
};

struct PeherstorferResult {
  SignConfiguration delta;  // minimal monic norm
  OrthoPair pair;           // orthonormalized C and its A
  Polynomial F;
  double M = 0.0;
  std::vector<PeherstorferCandidate> candidates;
  int min_norm_index = -1;  // first minimizer
  int no_gap_zero_index = -1;  // first candidate with all zeros in E, -1 when none
  bool criteria_agree = false;
};

// Candidate monic extremal polynomial of degree n for the leading coefficient functional:
// even n: F = C (C - A) with C the monic orthogonal polynomial of degree n/2;
// odd n: C = (x - b0) q with q monic orthogonal for (x - b0) rho, F = C (C - A) / (x - b0).
inline PeherstorferCandidate peherstorfer_candidate(const IntervalSystem& e, const SignConfiguration& delta, int n) {
  if (n < 1) throw ValidationError("peherstorfer: degree must be >= 1");
  SpectralDensity sd(e, delta);
  Measure rho = sd.measure();
  Interval hull = e.hull();
  double c = hull.mid(), h = 0.5 * hull.width();
  const double b0 = e.left();
  int k = n / 2;
  std::vector<double> m;  // t-moments of rho
  for (int j = 0; j <= 2 * k + 2; ++j) m.push_back(rho.integrate([&](double x) { return std::pow((x - c) / h, j); }));
  PeherstorferCandidate pc;
  pc.delta = delta;
  Polynomial lin = Polynomial({-b0, 1.0});
  if (n % 2 == 0) {
    auto os = detail::unmap(detail::orthosystem_t(m, k, 1e-14), c, h);
    pc.C = os.pairs[k].C.monic();
  } else {
    // (x - b0) rho in t: t-moments m_{j+1} + (c - b0)/h m_j, times h.
    double tb = (b0 - c) / h;
    std::vector<double> mm;
    for (int j = 0; j <= 2 * k; ++j) mm.push_back(m[j + 1] - tb * m[j]);
    Polynomial q = k == 0 ? Polynomial({1.0}) : detail::unmap(detail::orthosystem_t(mm, k, 1e-14), c, h).pairs[k].C.monic();
    pc.C = lin * q;
  }
  // A from x-moments of rho computed through t.
  {
    Polynomial Ct = pc.C.compose_affine(c, h);  // C(c + h t)
    Polynomial At = detail::second_kind(Ct, m);  // in t, A_x(z) = A_t(tau) / h
    pc.A = At.compose_affine(-c / h, 1.0 / h) * (1.0 / h);
  }
  // Monic L2 norm of the orthogonal polynomial in its own measure: C for even n,
  // q = C / (x - b0) against (x - b0) rho for odd n.
  pc.C_norm2 = rho.integrate([&](double x) { double v = pc.C(x); return v * v; });
  if (n % 2 == 0) {
    pc.monic_norm2 = pc.C_norm2;
  } else {
    Polynomial q = pc.C.divmod(lin).first;
    pc.monic_norm2 = rho.integrate([&](double x) { double v = q(x); return v * v * (x - b0); });
  }
  pc.M = 2.0 * pc.monic_norm2;
  Polynomial F = pc.C * (pc.C - pc.A);
  if (n % 2 == 1) F = F.divmod(lin).first;
  pc.F = F.monic();
  pc.zeros = poly_real_roots(pc.F, hull);
  for (double x : pc.zeros.roots)
    if (e.gap_of(x) >= 0) ++pc.gap_zeros;
  return pc;
}

inline PeherstorferResult peherstorfer_select(const IntervalSystem& e, int n, int threads = 0) {
  auto configs = enumerate_sign_configurations(e.gap_count());
  PeherstorferResult r;
  r.candidates = parallel_map(int(configs.size()), [&](int i) { return peherstorfer_candidate(e, configs[i], n); },
                              threads);
  for (int i = 0; i < int(r.candidates.size()); ++i) {
    if (r.min_norm_index < 0 || r.candidates[i].monic_norm2 < r.candidates[r.min_norm_index].monic_norm2)
      r.min_norm_index = i;
    if (r.no_gap_zero_index < 0 && r.candidates[i].gap_zeros == 0) r.no_gap_zero_index = i;
  }
  const auto& best = r.candidates[r.min_norm_index];
  r.delta = best.delta;
  r.F = best.F;
  r.M = best.M;
  double s = 1.0 / std::sqrt(best.C_norm2);
  r.pair.degree = best.C.degree();
  r.pair.C = best.C * s;
  r.pair.A = best.A * s;
  r.pair.leading = s;
  r.pair.monic_norm2 = best.C_norm2;
  r.criteria_agree = best.gap_zeros == 0;
  return r;
}

}  // namespace kz
