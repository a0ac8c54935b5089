#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "kz/laurent.hpp"

using namespace kz;

namespace {

void expect_series(const LaurentSeries& s, const std::vector<double>& want, double tol) {
  ASSERT_GE(s.c.size(), want.size());
  for (size_t k = 0; k < want.size(); ++k) EXPECT_NEAR(s.c[k], want[k], tol) << "k=" << k;
}

// Direct binomial oracle for sqrt((z-a)/(z-b)) = (1-a u)^{1/2} (1-b u)^{-1/2}.
std::vector<double> binomial_sqrt_ratio(double a, double b, int K) {
  std::vector<double> p(K + 1), q(K + 1), out(K + 1, 0.0);
  double cp = 1.0, cq = 1.0;
  for (int k = 0; k <= K; ++k) {
    p[k] = cp * std::pow(-a, k);
    q[k] = cq * std::pow(-b, k);
    cp *= (0.5 - k) / (k + 1);
    cq *= (-0.5 - k) / (k + 1);
  }
  for (int i = 0; i <= K; ++i)
    for (int j = 0; i + j <= K; ++j) out[i + j] += p[i] * q[j];
  return out;
}

}  // namespace

TEST(Laurent, SqrtRatioExamples) {
  expect_series(series_elementary(series_op::SqrtRatio{-1.0, 1.0}, 3), {1, 1, 0.5, 0.5}, 1e-15);
  expect_series(series_elementary(series_op::SqrtRatio{1.0, -1.0}, 3), {1, -1, 0.5, -0.5}, 1e-15);
}

TEST(Laurent, SqrtRatioMatchesBinomialOracle) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int t = 0; t < 20; ++t) {
    double a = u(rng), b = u(rng);
    expect_series(series_sqrt_ratio(a, b, 10), binomial_sqrt_ratio(a, b, 10), 1e-11 * std::pow(4.0, 10));
  }
}

TEST(Laurent, ExpOfZeroIsOne) {
  expect_series(series_elementary(series_op::Exp{LaurentSeries({0, 0, 0, 0})}, 3), {1, 0, 0, 0}, 0.0);
}

TEST(Laurent, BranchErrors) {
  EXPECT_THROW(series_log(LaurentSeries({0.0, 1.0})), BranchError);
  EXPECT_THROW(series_log(LaurentSeries({-1.0, 1.0})), BranchError);
  EXPECT_THROW(series_pow_half(LaurentSeries({-2.0, 1.0}), 1), BranchError);
}

TEST(Laurent, SqrtRatioTimesInverseIsOne) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int t = 0; t < 50; ++t) {
    double a = u(rng), b = u(rng);
    if (a > b) std::swap(a, b);
    auto p = series_mul(series_sqrt_ratio(a, b, 12), series_sqrt_ratio(b, a, 12));
    std::vector<double> one(13, 0.0);
    one[0] = 1.0;
    expect_series(p, one, 1e-13 * std::pow(2.0, 12));
  }
}

TEST(Laurent, ExpLogRoundTrip) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int K : {1, 4, 8, 12}) {
    std::vector<double> c(K + 1);
    c[0] = 1.0;
    for (int k = 1; k <= K; ++k) c[k] = u(rng);
    LaurentSeries s(c);
    expect_series(series_exp(series_log(s)), c, 1e-12);
  }
}

TEST(Laurent, MulTruncatesToMinimumOrder) {
  auto p = series_mul(LaurentSeries({1, 2, 3}), LaurentSeries({1, 1, 1, 1, 1}));
  EXPECT_EQ(p.order(), 2);
  expect_series(p, {1, 3, 6}, 0.0);
}

TEST(DualSymbol, SingleBandExamples) {
  auto e = IntervalSystem::make({{-1.0, 1.0}});
  SignConfiguration none;
  auto s0 = expand_dual_symbol(e, none, std::vector<double>{0.0, 0.0, 0.0}, 1.0);
  ASSERT_EQ(s0.size(), 4u);
  std::vector<double> want0{1, -1, 0.5, -0.5};
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(s0[k], want0[k], 1e-15);

  auto s1 = expand_dual_symbol(e, none, std::vector<double>{1.0, 0.0, 0.0}, 0.5);
  std::vector<double> want1{1, 0, 0, -1.0 / 3.0};
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(s1[k], want1[k], 1e-15);

  auto mu = dual_measure_moments(s1);
  ASSERT_EQ(mu.size(), 3u);
  EXPECT_NEAR(mu[2], 1.0 / 3.0, 1e-15);
}

TEST(DualSymbol, LeadingMomentIsOne) {
  auto e = IntervalSystem::make({{-3.0, -2.0}, {-1.0, 0.5}, {1.0, 2.0}});
  for (auto& d : enumerate_sign_configurations(2)) {
    auto s = expand_dual_symbol(e, d, LinearFunctional::point(0.7, 4), 0.3);
    EXPECT_EQ(s.size(), 6u);
    EXPECT_DOUBLE_EQ(s[0], 1.0);
  }
}

TEST(DualSymbol, OppositeSignsMultiplyToSquaredBase) {
  auto e = IntervalSystem::make({{-1.0, -0.4}, {-0.1, 0.3}, {0.5, 1.0}});
  auto f = LinearFunctional::infinity(5);
  double L = 2.5;
  int K = 6;
  LaurentSeries base = series_sqrt_ratio(e.right(), e.left(), K);
  std::vector<double> ex(K + 1, 0.0);
  auto l = f.lambdas();
  for (int k = 0; k <= 5; ++k) ex[k + 1] = l[k] / (2 * L);
  base = series_mul(base, series_exp(LaurentSeries(ex)));
  auto sq = series_mul(base, base);
  for (auto& d : enumerate_sign_configurations(2)) {
    auto a = expand_dual_symbol(e, d, f, L);
    auto b = expand_dual_symbol(e, d.flipped(), f, L);
    auto p = series_mul(LaurentSeries(a.s), LaurentSeries(b.s));
    expect_series(p, sq.c, 1e-12);
  }
}

TEST(Functional, BasicKinds) {
  Polynomial p({1.0, -2.0, 3.0});
  EXPECT_DOUBLE_EQ(LinearFunctional::infinity(2)(p), 3.0);
  EXPECT_DOUBLE_EQ(LinearFunctional::point(2.0, 2)(p), p(2.0));
  EXPECT_DOUBLE_EQ(LinearFunctional::from_lambdas({0.0, 1.0, 0.0})(p), -2.0);
  EXPECT_DOUBLE_EQ(LinearFunctional::point(2.0, 2).scaled(3.0)(p), 3.0 * p(2.0));
  EXPECT_THROW(LinearFunctional::from_lambdas({0.0, 0.0}), ValidationError);
}

TEST(Functional, ChebyshevImagesAgreeWithMonomialForm) {
  Interval dom{-3.0, 0.5};
  Polynomial p({0.2, -1.0, 0.7, 0.4, -0.3});
  auto s = ChebyshevSeries::from_polynomial(p, dom);
  for (auto f : {LinearFunctional::infinity(4), LinearFunctional::point(1.7, 4),
                 LinearFunctional::from_lambdas({1.0, 0.5, -2.0, 0.0, 0.25})}) {
    EXPECT_NEAR(f(s), f(p), 1e-11);
  }
}
