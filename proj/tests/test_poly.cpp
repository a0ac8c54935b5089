#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "kz/poly.hpp"

using namespace kz;

namespace {

// L1 norm on [-1, 1] with breakpoints at the roots.
double l1_norm(const Polynomial& p) {
  auto r = poly_real_roots(p, {-1.0, 1.0});
  return integrate([&](double x) { return std::abs(p(x)); }, -1.0, 1.0, {}, r.roots);
}

}  // namespace

TEST(Polynomial, Evaluation) {
  Polynomial p({-0.25, 0.0, 1.0});
  EXPECT_DOUBLE_EQ(poly_eval(p, 2.0), 3.75);
  EXPECT_EQ(poly_eval(Polynomial{}, 3.0), 0.0);
  EXPECT_EQ(Polynomial{}.degree(), -1);
  auto c = poly_eval(p, std::complex<double>(0.0, 1.0));
  EXPECT_DOUBLE_EQ(c.real(), -1.25);
}

TEST(Polynomial, MonicU3AtOneMatchesProductForm) {
  auto u3 = monic_chebyshev_second(3);
  double prod = 1.0;
  for (int k = 1; k <= 3; ++k) prod *= 1.0 - std::cos(k * std::numbers::pi / 4);
  EXPECT_NEAR(u3(1.0), prod, 1e-15);
}

TEST(Polynomial, SecondKindLowDegrees) {
  auto u1 = monic_chebyshev_second(1);
  EXPECT_EQ(u1.coeffs(), (std::vector<double>{0.0, 1.0}));
  auto u2 = monic_chebyshev_second(2);
  EXPECT_EQ(u2.coeffs(), (std::vector<double>{-0.25, 0.0, 1.0}));
  EXPECT_NEAR(l1_norm(u1), 1.0, 1e-12);
  EXPECT_NEAR(l1_norm(u2), 0.5, 1e-12);
  auto r3 = poly_real_roots(monic_chebyshev_second(3), {-1.0, 1.0});
  ASSERT_EQ(r3.size(), 3u);
  EXPECT_NEAR(r3.roots[0], -std::sqrt(0.5), 1e-12);
  EXPECT_NEAR(r3.roots[1], 0.0, 1e-12);
  EXPECT_NEAR(r3.roots[2], std::sqrt(0.5), 1e-12);
}

TEST(Polynomial, SecondKindL1Norms) {
  for (int n = 1; n <= 8; ++n)
    EXPECT_NEAR(l1_norm(monic_chebyshev_second(n)), std::ldexp(1.0, 1 - n), 1e-12) << n;
}

TEST(Polynomial, SecondKindRootsInterlace) {
  for (int n = 1; n <= 12; ++n) {
    auto a = poly_real_roots(monic_chebyshev_second(n), {-1.0, 1.0});
    auto b = poly_real_roots(monic_chebyshev_second(n + 1), {-1.0, 1.0});
    ASSERT_EQ(int(a.size()), n);
    ASSERT_EQ(int(b.size()), n + 1);
    EXPECT_TRUE(a.all_simple());
    for (int k = 0; k < n; ++k) {
      EXPECT_LT(b.roots[k], a.roots[k]);
      EXPECT_LT(a.roots[k], b.roots[k + 1]);
      EXPECT_GT(a.roots[k], -1.0);
      EXPECT_LT(a.roots[k], 1.0);
    }
  }
}

TEST(Polynomial, RootsSimpleCases) {
  auto r = poly_real_roots(Polynomial({-0.25, 0.0, 1.0}), {-2.0, 2.0});
  ASSERT_EQ(r.size(), 2u);
  EXPECT_DOUBLE_EQ(r.roots[0], -0.5);
  EXPECT_DOUBLE_EQ(r.roots[1], 0.5);
  EXPECT_TRUE(poly_real_roots(Polynomial({1.0, 0.0, 1.0}), {-2.0, 2.0}).empty());
  EXPECT_TRUE(poly_real_roots(Polynomial({3.0}), {-2.0, 2.0}).empty());
  EXPECT_THROW(poly_real_roots(Polynomial{}, {-2.0, 2.0}), ValidationError);
}

TEST(Polynomial, U5RootsMatchCosines) {
  auto r = poly_real_roots(monic_chebyshev_second(5), {-1.0, 1.0});
  ASSERT_EQ(r.size(), 5u);
  for (int k = 1; k <= 5; ++k) EXPECT_NEAR(r.roots[5 - k], std::cos(k * std::numbers::pi / 6), 1e-10);
}

TEST(Polynomial, DoubleRootMultiplicity) {
  auto p = Polynomial::from_roots(std::vector<double>{0.3, 0.3, -0.5});
  auto r = poly_real_roots(p, {-1.0, 1.0});
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r.multiplicities[1], 2);
  EXPECT_NEAR(r.roots[1], 0.3, 1e-7);
  EXPECT_FALSE(r.all_simple());
}

TEST(Polynomial, ProductEvaluationIsMultiplicative) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> d(0, 8);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> a(d(rng) + 1), b(d(rng) + 1);
    for (auto& x : a) x = u(rng);
    for (auto& x : b) x = u(rng);
    Polynomial p(a), q(b);
    double x = 2.0 * u(rng);
    double lhs = (p * q)(x), rhs = p(x) * q(x);
    EXPECT_NEAR(lhs, rhs, 1e-12 * std::max(1.0, std::abs(rhs)));
  }
}

TEST(Polynomial, DivmodAndCompose) {
  Polynomial p({1.0, -2.0, 0.5, 3.0});
  auto [q, r] = p.divmod(Polynomial({-0.5, 1.0}));
  EXPECT_EQ(q.degree(), 2);
  EXPECT_EQ(r.degree(), 0);
  EXPECT_NEAR(r[0], p(0.5), 1e-15);
  auto c = p.compose_affine(0.25, 2.0);
  EXPECT_NEAR(c(0.7), p(0.25 + 1.4), 1e-13);
}

TEST(ChebyshevSeries, RoundTripAndRoots) {
  Interval dom{-200.0, -1.0};
  std::vector<double> zs{-150.0, -90.0, -40.0, -12.0, -2.5};
  auto f = [&](double x) {
    double p = 1.0;
    for (double z : zs) p *= (x - z) / 100.0;
    return p;
  };
  auto s = ChebyshevSeries::interpolate(f, 5, dom);
  EXPECT_EQ(s.degree(), 5);
  for (double x : {-199.0, -70.0, -3.0}) EXPECT_NEAR(s(x), f(x), 1e-13);
  auto r = s.real_roots(dom);
  ASSERT_EQ(r.size(), 5u);
  for (size_t k = 0; k < zs.size(); ++k) EXPECT_NEAR(r.roots[k], zs[k], 1e-10);
  auto p = s.to_polynomial();
  EXPECT_NEAR(p(-70.0) / f(-70.0), 1.0, 1e-10);
  auto back = ChebyshevSeries::from_polynomial(p, dom);
  for (size_t k = 0; k < 6; ++k) EXPECT_NEAR(back.coeffs()[k], s.coeffs()[k], 1e-10);
}

TEST(ChebyshevSeries, Derivative) {
  Polynomial p({0.3, -1.0, 2.0, 0.5, -0.25});
  auto s = ChebyshevSeries::from_polynomial(p, {-2.0, 3.0});
  auto d = s.derivative();
  auto dp = p.derivative();
  for (double x : {-1.5, 0.0, 2.2}) EXPECT_NEAR(d(x), dp(x), 1e-12);
}
