#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_complex.hpp>

#include "kz/error.hpp"
#include "kz/l1.hpp"
#include "kz/orthopoly.hpp"
#include "kz/parallel.hpp"
#include "kz/verify.hpp"

namespace kz {

// Chains of length n have entries of size |z / b|^n; the determinant and the J-form
// cancel the square of that growth, so both are carried in 200-digit arithmetic.
using xcomplex = boost::multiprecision::cpp_complex<200>;
using xreal = std::decay_t<decltype(std::declval<xcomplex>().real())>;
inline constexpr int working_digits = 200;

inline std::complex<double> to_cplx(const xcomplex& v) {
  return {static_cast<double>(v.real()), static_cast<double>(v.imag())};
}

struct CanonicalMatrix {
  xcomplex z, A, B, C, D;

  static CanonicalMatrix identity(xcomplex z = xcomplex(0)) { return {z, xcomplex(1), xcomplex(0), xcomplex(0), xcomplex(1)}; }
  // J = [[0, -1], [1, 0]]
  static std::array<std::array<double, 2>, 2> J() { return {{{0.0, -1.0}, {1.0, 0.0}}}; }

  // log10 of the largest entry modulus squared: the cancellation depth of det and J-form.
  double cancellation_digits() const {
    xreal m = std::max({abs(A), abs(B), abs(C), abs(D)});
    return m > 0 ? 2.0 * static_cast<double>(log10(m)) : 0.0;
  }
  void require_precision(const char* what) const {
    if (cancellation_digits() > working_digits - 30)
      throw NumericalError(std::string(what) + ": entries exceed the working precision");
  }
  xcomplex det() const { return A * D - B * C; }
  double det_residual() const {
    require_precision("det");
    return static_cast<double>(abs(det() - xcomplex(1)));
  }
  std::array<std::complex<double>, 4> entries() const { return {to_cplx(A), to_cplx(B), to_cplx(C), to_cplx(D)}; }

  CanonicalMatrix operator*(const CanonicalMatrix& o) const {
    return {z, A * o.A + B * o.C, A * o.B + B * o.D, C * o.A + D * o.C, C * o.B + D * o.D};
  }
};

// 2x2 matrix whose entries are real polynomials in z (ascending coefficients).
struct MatrixPolynomial {
  std::vector<xreal> A, B, C, D;

  static xcomplex eval(const std::vector<xreal>& p, const xcomplex& z) {
    xcomplex s(0);
    for (size_t k = p.size(); k-- > 0;) s = s * z + xcomplex(p[k]);
    return s;
  }
  static xreal coef(const std::vector<xreal>& p, size_t k) { return k < p.size() ? p[k] : xreal(0); }

  CanonicalMatrix operator()(std::complex<double> z) const { return at(xcomplex(z.real(), z.imag())); }
  CanonicalMatrix at(const xcomplex& z) const { return {z, eval(A, z), eval(B, z), eval(C, z), eval(D, z)}; }
  int degree() const { return int(std::max({A.size(), B.size(), C.size(), D.size()})) - 1; }
  bool identity_at_zero(double tol = 1e-30) const {
    return abs(coef(A, 0) - 1) <= tol && abs(coef(B, 0)) <= tol && abs(coef(C, 0)) <= tol && abs(coef(D, 0) - 1) <= tol;
  }
};

namespace detail {

inline std::vector<xreal> poly_mul(const std::vector<xreal>& p, const std::vector<xreal>& q) {
  if (p.empty() || q.empty()) return {};
  std::vector<xreal> r(p.size() + q.size() - 1, xreal(0));
  for (size_t i = 0; i < p.size(); ++i)
    for (size_t j = 0; j < q.size(); ++j) r[i + j] += p[i] * q[j];
  return r;
}

inline std::vector<xreal> poly_add(std::vector<xreal> p, const std::vector<xreal>& q, const xreal& s = xreal(1)) {
  if (p.size() < q.size()) p.resize(q.size(), xreal(0));
  for (size_t k = 0; k < q.size(); ++k) p[k] += s * q[k];
  return p;
}

inline std::vector<xreal> poly_scale(std::vector<xreal> p, const xreal& s) {
  for (auto& c : p) c *= s;
  return p;
}

// Coefficients of p(z) / z^k, dropping the k lowest ones.
inline std::vector<xreal> poly_shift_down(const std::vector<xreal>& p, size_t k) {
  if (p.size() <= k) return {};
  return std::vector<xreal>(p.begin() + k, p.end());
}

inline MatrixPolynomial matmul(const MatrixPolynomial& l, const MatrixPolynomial& r) {
  return {poly_add(poly_mul(l.A, r.A), poly_mul(l.B, r.C)), poly_add(poly_mul(l.A, r.B), poly_mul(l.B, r.D)),
          poly_add(poly_mul(l.C, r.A), poly_mul(l.D, r.C)), poly_add(poly_mul(l.C, r.B), poly_mul(l.D, r.D))};
}

inline MatrixPolynomial constant_matrix(const xreal& a, const xreal& b, const xreal& c, const xreal& d) {
  return {{a}, {b}, {c}, {d}};
}

}  // namespace detail

// Ordered product M_{n-1}(z) ... M_0(z) of the steps M_k = [[(z - a_k)/b_k, -1/b_k], [b_k, 0]].
// With p_k the orthonormal polynomials of the recurrence and q_k their second-kind
// companions int (p_k(z) - p_k(x)) / (z - x) d rho, the first row is
// [sqrt(m0) p_n(z), -q_n(z) / sqrt(m0)].
class TransferChain {
 public:
  TransferChain(Recurrence rec, int n) : rec_(std::move(rec)), n_(n) {
    if (n < 0) throw ValidationError("transfer chain: negative length");
    if (n > int(rec_.a.size()) || n > int(rec_.b.size()))
      throw ValidationError("transfer chain: recurrence shorter than " + std::to_string(n) + " steps");
    for (int k = 0; k < n; ++k)
      if (!(rec_.b[k] > 0.0)) throw ValidationError("transfer chain: b_" + std::to_string(k) + " must be positive");
  }

  int length() const { return n_; }
  const Recurrence& recurrence() const { return rec_; }

  CanonicalMatrix step(int k, const xcomplex& z) const {
    xreal a = rec_.a[k], b = rec_.b[k];
    return {z, (z - xcomplex(a)) / xcomplex(b), xcomplex(-1 / b), xcomplex(b), xcomplex(0)};
  }

  CanonicalMatrix at(const xcomplex& z) const {
    CanonicalMatrix m = CanonicalMatrix::identity(z);
    for (int k = 0; k < n_; ++k) m = step(k, z) * m;
    return m;
  }
  CanonicalMatrix operator()(std::complex<double> z) const { return at(xcomplex(z.real(), z.imag())); }

  MatrixPolynomial polynomial() const {
    MatrixPolynomial m = detail::constant_matrix(1, 0, 0, 1);
    for (int k = 0; k < n_; ++k) {
      xreal a = rec_.a[k], b = rec_.b[k];
      MatrixPolynomial s{{-a / b, 1 / b}, {-1 / b}, {b}, {xreal(0)}};
      m = detail::matmul(s, m);
    }
    return m;
  }

  // P(0)^{-1} P(z): equal to the identity at the origin. The constant factor is real
  // with determinant one, hence J-unitary, so the J-form is unchanged.
  MatrixPolynomial normalized() const {
    MatrixPolynomial p = polynomial();
    xreal a = MatrixPolynomial::coef(p.A, 0), b = MatrixPolynomial::coef(p.B, 0);
    xreal c = MatrixPolynomial::coef(p.C, 0), d = MatrixPolynomial::coef(p.D, 0);
    return detail::matmul(detail::constant_matrix(d, -b, -c, a), p);
  }

 private:
  Recurrence rec_;
  int n_;
};

inline CanonicalMatrix transfer_matrix_product(const Recurrence& rec, int n, std::complex<double> z) {
  return TransferChain(rec, n)(z);
}

struct JForm {
  double h11 = 0.0, h22 = 0.0;
  std::complex<double> h12;
  double min_eigenvalue = 0.0;
  bool pass = false;
};

// Minimal eigenvalue of the Hermitian form (A* J A - J) / (z - conj z).
inline JForm j_expanding_check(const CanonicalMatrix& m, double tol = 1e-10) {
  xreal y = m.z.imag();
  if (y == 0) throw ValidationError("j_expanding_check: z must be off the real axis");
  m.require_precision("j_expanding_check");
  // Entries of A* J A - J divided by 2 i Im z.
  xreal h11 = (conj(m.C) * m.A).imag() / y;
  xreal h22 = (conj(m.D) * m.B).imag() / y;
  xcomplex h12 = (conj(m.C) * m.B - conj(m.A) * m.D + xcomplex(1)) / xcomplex(0, 2 * y);
  xreal half_sum = (h11 + h22) / 2, half_diff = (h11 - h22) / 2;
  xreal lmin = half_sum - sqrt(half_diff * half_diff + norm(h12));
  JForm f;
  f.h11 = static_cast<double>(h11);
  f.h22 = static_cast<double>(h22);
  f.h12 = to_cplx(h12);
  f.min_eigenvalue = static_cast<double>(lmin);
  f.pass = f.min_eigenvalue >= -tol;
  return f;
}

// Deterministic sample of the upper half plane: a spiral of moduli 0.1 .. 10.
inline std::vector<std::complex<double>> upper_half_plane_samples(int count = 16) {
  std::vector<std::complex<double>> z;
  for (int k = 0; k < count; ++k) {
    double r = std::pow(10.0, -1.0 + 2.0 * k / std::max(1, count - 1));
    double t = M_PI * (k + 0.5) / count;
    z.push_back(std::polar(r, t));
  }
  return z;
}

struct CanonicalTransform {
  enum class Kind { scale, shift, pole_shift };
  Kind kind = Kind::scale;
  double value = 1.0;

  // R -> lambda R
  static CanonicalTransform scale(double lambda) { return {Kind::scale, lambda}; }
  // R -> R + q
  static CanonicalTransform shift(double q) { return {Kind::shift, q}; }
  // R -> R - 1/z
  static CanonicalTransform pole_shift() { return {Kind::pole_shift, 0.0}; }
};

namespace detail {

inline void check_scale(const CanonicalTransform& t) {
  if (t.kind == CanonicalTransform::Kind::scale && !(t.value > 0.0))
    throw ValidationError("canonical transform: scale factor must be positive");
}

}  // namespace detail

// Scale and shift act pointwise; the pole shift needs the matrix function (see the
// MatrixPolynomial overload).
inline CanonicalMatrix apply_canonical_transform(const CanonicalMatrix& m, const CanonicalTransform& t) {
  detail::check_scale(t);
  switch (t.kind) {
    case CanonicalTransform::Kind::scale: {
      xcomplex l(t.value);
      return {m.z, m.A, m.B * l, m.C / l, m.D};
    }
    case CanonicalTransform::Kind::shift: {
      xcomplex q(t.value);
      CanonicalMatrix L{m.z, xcomplex(1), q, xcomplex(0), xcomplex(1)};
      CanonicalMatrix R{m.z, xcomplex(1), -q, xcomplex(0), xcomplex(1)};
      return L * m * R;
    }
    default:
      throw ValidationError("canonical transform: the pole shift needs the matrix function, not a point value");
  }
}

// For the pole shift the input must equal the identity at 0. With rho = 1 / (1 - C'(0))
// the result is [[1, -1/z], [0, 1]] B(z) [[1, rho/z], [0, 1]] U, pole free, with the
// constant U making it the identity at 0; its first column is [A - C/z, C] rho.
inline MatrixPolynomial apply_canonical_transform(const MatrixPolynomial& m, const CanonicalTransform& t) {
  detail::check_scale(t);
  using detail::poly_add;
  using detail::poly_scale;
  using detail::poly_shift_down;
  switch (t.kind) {
    case CanonicalTransform::Kind::scale: {
      xreal l = t.value;
      return {m.A, poly_scale(m.B, l), poly_scale(m.C, 1 / l), m.D};
    }
    case CanonicalTransform::Kind::shift: {
      xreal q = t.value;
      auto L = detail::constant_matrix(1, q, 0, 1), R = detail::constant_matrix(1, -q, 0, 1);
      return detail::matmul(detail::matmul(L, m), R);
    }
    default: {
      if (!m.identity_at_zero(1e-12)) throw ValidationError("pole shift: matrix function must be the identity at 0");
      xreal c1 = MatrixPolynomial::coef(m.C, 1);
      if (abs(1 - c1) <= xreal(1e-14)) throw SingularError("pole shift: C'(0) = 1, normalization 1/(1 - C'(0)) undefined");
      xreal rho = 1 / (1 - c1);
      // C(0) = 0 and the 1/z terms of the top-right entry cancel by the choice of rho.
      MatrixPolynomial tl;
      tl.A = poly_add(m.A, poly_shift_down(m.C, 1), -1);
      tl.C = m.C;
      tl.D = poly_add(m.D, poly_shift_down(m.C, 1), rho);
      tl.B = poly_add(poly_add(poly_add(m.B, poly_shift_down(m.A, 1), rho), poly_shift_down(m.D, 1), -1),
                      poly_shift_down(m.C, 2), -rho);
      xreal a = MatrixPolynomial::coef(tl.A, 0), b = MatrixPolynomial::coef(tl.B, 0);
      xreal c = MatrixPolynomial::coef(tl.C, 0), d = MatrixPolynomial::coef(tl.D, 0);
      return detail::matmul(tl, detail::constant_matrix(d, -b, -c, a));
    }
  }
}

// ---------------------------------------------------------------------------
// Cauchy-transform identities for an orthonormal C of degree n and its second-kind A,
// with R(z) = int d rho(x) / (x - z):
//   (i)  int C^2 d rho / (x - z) = C (C R + A)
//   (ii) -A (C R + A) / R = int A^2 d sigma / (x - z),
// where d sigma = Im(-1/R(x + i0)) dx / pi = rho / |R(x + i0)|^2 dx on the support plus
// point masses 1 / R'(x_g) at the zeros of R in the gaps.

struct IdentityOptions {
  int nodes = 0;       // > 0: fixed Gauss-Legendre rule per band with this many nodes
  double tol = 1e-12;  // adaptive tolerance otherwise
  double proximity = 1e-8;
  int threads = 0;
};

struct IdentityRow {
  cplx z;
  cplx lhs_i, rhs_i, lhs_ii, rhs_ii;
  double residual_i = 0.0, residual_ii = 0.0;  // relative
};

struct IdentityReport {
  std::vector<IdentityRow> rows;
  std::vector<double> gap_zeros;  // zeros of R in the gaps
  VerificationReport report;
};

namespace detail {

inline cplx horner(const Polynomial& p, cplx z) {
  cplx s = 0.0;
  for (int k = p.degree(); k >= 0; --k) s = s * z + p[k];
  return s;
}

// int g(x) w(x) dx over one band, by the fixed rule or adaptively.
template <class G>
auto band_integral(G&& g, const Interval& b, bool singular, const IdentityOptions& o) {
  using T = decltype(g(b.lo));
  if (o.nodes > 0) {
    GaussRule r = gauss_legendre(o.nodes);
    T s{};
    double h = 0.5 * b.width(), c = b.mid();
    for (size_t k = 0; k < r.nodes.size(); ++k) s += g(c + h * r.nodes[k]) * (h * r.weights[k]);
    return s;
  }
  IntegrateOptions io;
  io.tol = o.tol;
  io.singular = singular ? Endpoints::both : Endpoints::regular;
  return integrate(g, b.lo, b.hi, io);
}

struct ResolventAccess {
  std::function<cplx(cplx)> R;          // Cauchy transform off the support
  std::function<cplx(double)> R_upper;  // boundary value from above on the support
};

// PV int rho(t) / (t - x) dt by subtraction on the band holding x.
inline ResolventAccess numeric_resolvent(const Measure& rho, const IdentityOptions& o) {
  ResolventAccess r;
  r.R = [&rho, o](cplx z) {
    cplx s = 0.0;
    for (auto& b : rho.support.bands())
      s += band_integral([&](double x) { return rho(x) / cplx(x - z); }, b, rho.singular, o);
    return s;
  };
  r.R_upper = [&rho](double x) {
    double pv = 0.0;
    IntegrateOptions io;
    io.tol = 1e-12;
    io.singular = rho.singular ? Endpoints::both : Endpoints::regular;
    double rx = rho(x);
    for (auto& b : rho.support.bands()) {
      if (x > b.lo && x < b.hi) {
        pv += integrate([&](double t) { return t == x ? 0.0 : (rho(t) - rx) / (t - x); }, b.lo, b.hi, io, {x});
        pv += rx * std::log((b.hi - x) / (x - b.lo));
      } else {
        pv += integrate([&](double t) { return rho(t) / (t - x); }, b.lo, b.hi, io);
      }
    }
    return cplx(pv, M_PI * rx);
  };
  return r;
}

inline double relative_gap(cplx a, cplx b) {
  double s = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / s;
}

inline IdentityReport identity_residuals_impl(const OrthoPair& pair, const Measure& rho, const ResolventAccess& res,
                                              const std::vector<cplx>& zs, const IdentityOptions& o) {
  const IntervalSystem& e = rho.support;
  for (auto z : zs)
    if (e.distance(z) < o.proximity) throw ProximityError("identity_residuals: z too close to the support");
  IdentityReport out;
  // Zeros of the real-valued R in each gap; R increases there, so at most one.
  std::vector<double> masses;
  for (auto& g : e.gaps()) {
    auto Rr = [&](double x) { return res.R(cplx(x, 0.0)).real(); };
    double w = g.width();
    double a = g.lo + 1e-9 * w, b = g.hi - 1e-9 * w;
    double fa = Rr(a), fb = Rr(b);
    if (!(fa < 0.0 && fb > 0.0)) continue;
    for (int it = 0; it < 200 && b - a > 1e-15 * w; ++it) {
      double m = 0.5 * (a + b);
      (Rr(m) < 0.0 ? a : b) = m;
    }
    double x = 0.5 * (a + b);
    // R'(x) = int rho(t) / (t - x)^2 dt
    double d = 0.0;
    for (auto& band : e.bands())
      d += band_integral([&](double t) { return rho(t) / ((t - x) * (t - x)); }, band, rho.singular, o);
    out.gap_zeros.push_back(x);
    masses.push_back(1.0 / d);
  }
  auto sigma = [&](double x) { return rho(x) / std::norm(res.R_upper(x)); };
  out.rows = parallel_map(
      int(zs.size()),
      [&](int k) {
        cplx z = zs[k];
        IdentityRow row;
        row.z = z;
        cplx C = horner(pair.C, z), A = horner(pair.A, z), R = res.R(z);
        row.rhs_i = C * (C * R + A);
        row.lhs_i = 0.0;
        for (auto& b : e.bands())
          row.lhs_i += band_integral(
              [&](double x) {
                double c = pair.C(x);
                return c * c * rho(x) / cplx(x - z);
              },
              b, rho.singular, o);
        row.lhs_ii = -A * (C * R + A) / R;
        row.rhs_ii = 0.0;
        for (auto& b : e.bands())
          row.rhs_ii += band_integral(
              [&](double x) {
                double a = pair.A(x);
                return a * a * sigma(x) / cplx(x - z);
              },
              b, rho.singular, o);
        for (size_t j = 0; j < out.gap_zeros.size(); ++j) {
          double a = pair.A(out.gap_zeros[j]);
          row.rhs_ii += a * a * masses[j] / (out.gap_zeros[j] - z);
        }
        row.residual_i = relative_gap(row.lhs_i, row.rhs_i);
        row.residual_ii = pair.degree > 0 ? relative_gap(row.lhs_ii, row.rhs_ii) : std::abs(row.lhs_ii - row.rhs_ii);
        return row;
      },
      o.threads);
  double r1 = 0.0, r2 = 0.0;
  for (auto& r : out.rows) {
    r1 = std::max(r1, r.residual_i);
    r2 = std::max(r2, r.residual_ii);
  }
  out.report.add("identity_i_residual", r1, 1e-3);
  out.report.add("identity_ii_residual", r2, 1e-3);
  return out;
}

}  // namespace detail

inline IdentityReport identity_residuals(const OrthoPair& pair, const Measure& rho, const std::vector<cplx>& zs,
                                         const IdentityOptions& o = {}) {
  auto res = detail::numeric_resolvent(rho, o);
  return detail::identity_residuals_impl(pair, rho, res, zs, o);
}

// Same with the closed-form resolvent of a spectral density.
inline IdentityReport identity_residuals(const OrthoPair& pair, const SpectralDensity& sd, const std::vector<cplx>& zs,
                                         const IdentityOptions& o = {}) {
  Measure rho = sd.measure();
  detail::ResolventAccess res{[&sd](cplx z) { return sd.R(z); }, [&sd](double x) { return sd.R_upper(x); }};
  return detail::identity_residuals_impl(pair, rho, res, zs, o);
}

// ---------------------------------------------------------------------------
// Normalized-at-0 problem on a bounded E: with {F < 0} = union of (alpha_j, beta_j),
//   C(z) = -lambda0 z prod (1 - z/alpha_j),  A(z) = prod (1 - z/beta_j),  lambda0 = e^{-M/2},
//   |R(x)| = |x|^{-1} prod_bands |(1 - x/b)/(1 - x/a)|^{1/2} prod_{gaps, rays with F<0} |(1 - x/beta)/(1 - x/alpha)|,
// and the identity at 0 reads e^{M/2} = 1 + int_E (C(x) / (C'(0) x))^2 |R(x)| dx / pi.

struct ErrorIdentityCheck {
  double M = 0.0;
  double lhs = 0.0;  // e^{M/2}
  double rhs = 0.0;  // 1 + int ...
  double residual = 0.0;  // |lhs - rhs| / lhs
  double C_prime_0 = 0.0;
  std::vector<double> alpha, beta;  // left and right ends of {F < 0}
  bool valid = false;
  std::string note;
};

inline ErrorIdentityCheck error_identity_check(const IntervalSystem& e, const ExtremalSolution& sol,
                                     std::optional<double> M_override = std::nullopt) {
  ErrorIdentityCheck out;
  out.M = M_override.value_or(sol.M);
  if (e.hull().contains(0.0)) throw ValidationError("error_identity_check: 0 must lie outside the hull of E");
  int nonreal = 0;
  double span = sol.F_cheb.domain().width();
  for (auto& r : sol.F_cheb.complex_roots())
    if (std::abs(r.imag()) > 1e-7 * std::max(span, std::abs(r))) ++nonreal;
  if (nonreal) {
    out.note = std::to_string(nonreal) + " nonreal zeros";
    return out;
  }
  auto F = [&](double x) { return sol(x); };
  auto segs = sign_segments(e, F, all_real_zeros(sol));
  // Components of {F < 0}: join E_- and complement pieces sharing an endpoint.
  std::vector<std::pair<double, double>> neg = segs.minus;
  neg.insert(neg.end(), segs.off_minus.begin(), segs.off_minus.end());
  std::sort(neg.begin(), neg.end());
  std::vector<std::pair<double, double>> comp;
  for (auto& p : neg) {
    if (!comp.empty() && comp.back().second == p.first) comp.back().second = p.second;
    else comp.push_back(p);
  }
  for (auto& [a, b] : comp) {
    if (std::isfinite(a)) out.alpha.push_back(a);
    if (std::isfinite(b)) out.beta.push_back(b);
  }
  auto ratio = [](double x, double lo, double hi) {
    double f = 1.0;
    if (std::isfinite(hi)) f *= 1.0 - x / hi;
    if (std::isfinite(lo)) f /= 1.0 - x / lo;
    return std::abs(f);
  };
  auto absR = [&](double x) {
    double q = 1.0;
    for (auto& b : e.bands()) q *= ratio(x, b.lo, b.hi);
    double p = std::sqrt(q) / std::abs(x);
    for (auto& [a, b] : segs.off_minus) p *= ratio(x, a, b);
    return p;
  };
  auto c_over = [&](double x) {
    double p = 1.0;
    for (double a : out.alpha) p *= 1.0 - x / a;
    return p;
  };
  IntegrateOptions io;
  io.tol = 1e-12;
  io.singular = Endpoints::both;  // inverse square roots next to gaps where F < 0
  double I = 0.0;
  for (auto& b : e.bands())
    I += integrate([&](double x) { double c = c_over(x); return c * c * absR(x); }, b.lo, b.hi, io);
  out.lhs = std::exp(0.5 * out.M);
  out.rhs = 1.0 + I / M_PI;
  out.residual = std::abs(out.lhs - out.rhs) / out.lhs;
  out.C_prime_0 = -std::exp(-0.5 * out.M);
  out.valid = true;
  return out;
}

struct ErrorIdentityRow {
  int nodes = 0;
  double M = 0.0;
  double residual = 0.0;
};

// Grid solutions without Newton polishing, panels doubling from initial_panels.
inline std::vector<ErrorIdentityRow> error_identity_refinement(const IntervalSystem& e, int n, int levels,
                                                     int initial_panels = 2, int order = 8) {
  std::vector<ErrorIdentityRow> rows;
  for (int l = 0, p = initial_panels; l < levels; ++l, p *= 2) {
    SolveOptions so;
    so.polish = false;
    so.grid.order = order;
    so.grid.initial_panels = p;
    so.grid.min_levels = 1;
    so.grid.max_levels = 1;
    so.grid.max_nodes_per_band = 1 << 20;
    auto sol = solve_l1(e, WeightSpec::reciprocal_abs(), NormalizedAtZero{}, n, so);
    auto c = error_identity_check(e, sol, sol.diagnostics.lp_M);
    rows.push_back({sol.diagnostics.grid_nodes, sol.diagnostics.lp_M, c.valid ? c.residual : NAN});
  }
  return rows;
}

}  // namespace kz
