#include <cmath>
#include <numbers>
#include <set>

#include <gtest/gtest.h>

#include "kz/interval.hpp"

using namespace kz;

TEST(IntervalSystem, SingleBand) {
  auto e = IntervalSystem::make({{-1.0, 1.0}});
  EXPECT_EQ(e.gap_count(), 0);
  EXPECT_EQ(e.band_count(), 1);
  EXPECT_EQ(e.left(), -1.0);
  EXPECT_EQ(e.right(), 1.0);
}

TEST(IntervalSystem, GapFromTwoBands) {
  auto e = IntervalSystem::make({{-3.0, -2.0}, {-1.5, -1.0}});
  ASSERT_EQ(e.gap_count(), 1);
  EXPECT_EQ(e.gaps()[0].lo, -2.0);
  EXPECT_EQ(e.gaps()[0].hi, -1.5);
  EXPECT_EQ(e.gap_of(-1.75), 0);
  EXPECT_EQ(e.gap_of(-2.0), -1);
  EXPECT_EQ(e.band_of(-2.0), 0);
}

TEST(IntervalSystem, UnsortedInputIsSorted) {
  auto e = IntervalSystem::make({{2.0, 3.0}, {-1.0, 1.0}});
  EXPECT_EQ(e.bands()[0].lo, -1.0);
  EXPECT_EQ(e.gaps()[0].lo, 1.0);
  EXPECT_EQ(e.gaps()[0].hi, 2.0);
}

TEST(IntervalSystem, RejectsBadInput) {
  EXPECT_THROW(IntervalSystem::make({{0.0, 2.0}, {1.0, 3.0}}), ValidationError);
  EXPECT_THROW(IntervalSystem::make({{0.0, 1.0}, {1.0, 3.0}}), ValidationError);
  EXPECT_THROW(IntervalSystem::make(std::vector<std::pair<double, double>>{}), ValidationError);
  EXPECT_THROW(IntervalSystem::make({{1.0, 1.0}}), ValidationError);
  EXPECT_THROW(IntervalSystem::make({{-2.0, -1.0}}, 3.0), ValidationError);
}

TEST(IntervalSystem, Truncation) {
  auto e = IntervalSystem::make({{-200.0, -6.0}, {-4.0, -1.0}}, 200.0);
  ASSERT_TRUE(e.truncation().has_value());
  EXPECT_EQ(*e.truncation(), 200.0);
}

TEST(IntervalSystem, RebuildFromOwnBandsIsIdentity) {
  for (auto raw : std::vector<std::vector<std::pair<double, double>>>{
           {{-1, 1}}, {{-1, -0.5}, {0.5, 1}}, {{-5, -4}, {-3, -1}, {0, 0.25}, {2, 7}}}) {
    auto e = IntervalSystem::make(raw);
    auto f = IntervalSystem::from_bands(e.bands());
    EXPECT_EQ(e, f);
    EXPECT_EQ(e.gap_count(), e.band_count() - 1);
  }
}

TEST(SignConfiguration, BijectionWithBits) {
  for (int m = 0; m <= 6; ++m) {
    auto all = enumerate_sign_configurations(m);
    ASSERT_EQ(all.size(), size_t{1} << m);
    std::set<std::vector<int>> seen;
    for (size_t k = 0; k < all.size(); ++k) {
      EXPECT_EQ(all[k].index(), k);
      EXPECT_EQ(all[k].size(), m);
      seen.insert(all[k].delta);
    }
    EXPECT_EQ(seen.size(), all.size());
  }
}

TEST(Quadrature, TwoPointGauss) {
  auto e = IntervalSystem::make({{-1.0, 1.0}});
  auto g = build_quadrature(e, WeightSpec::unit(), 2, false);
  ASSERT_EQ(g.size(), 2u);
  EXPECT_NEAR(g.nodes[0], -1.0 / std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(g.nodes[1], 1.0 / std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(g.weights[0], 1.0, 1e-15);
  EXPECT_NEAR(g.weights[1], 1.0, 1e-15);
}

TEST(Quadrature, ReciprocalAbsMass) {
  auto e = IntervalSystem::make({{-2.0, -1.0}});
  auto g = build_quadrature(e, WeightSpec::reciprocal_abs(), 16, false);
  EXPECT_NEAR(g.mass(), std::log(2.0), 1e-12);
  for (double w : g.weights) EXPECT_GT(w, 0.0);
  for (double x : g.nodes) EXPECT_TRUE(e.contains(x));
}

TEST(Quadrature, ReciprocalAbsNeedsZeroOutsideHull) {
  auto e = IntervalSystem::make({{-2.0, -1.0}, {1.0, 2.0}});
  EXPECT_THROW(build_quadrature(e, WeightSpec::reciprocal_abs(), 8, false), ValidationError);
  auto f = IntervalSystem::make({{0.0, 1.0}});
  EXPECT_THROW(build_quadrature(f, WeightSpec::reciprocal_abs(), 8, false), ValidationError);
}

TEST(Quadrature, ArcsineMassWithSubstitution) {
  auto e = IntervalSystem::make({{-1.0, 1.0}});
  auto w = WeightSpec::density([](double x) { return 1.0 / std::sqrt((1.0 - x) * (1.0 + x)); }, true);
  auto g = build_quadrature(e, w, 16, true);
  EXPECT_NEAR(g.mass(), std::numbers::pi, 1e-6);
  for (double x : g.nodes) EXPECT_TRUE(x > -1.0 && x < 1.0);
}

TEST(Quadrature, MassErrorShrinksWithNodeCount) {
  auto e = IntervalSystem::make({{-2.0, -1.0}});
  auto a = IntervalSystem::make({{-1.0, 1.0}});
  auto arcsine = WeightSpec::density([](double x) { return 1.0 / std::sqrt((1.0 - x) * (1.0 + x)); }, true);
  struct Case {
    const IntervalSystem* e;
    WeightSpec w;
    bool singular;
    double exact;
  };
  std::vector<Case> cases{{&a, WeightSpec::unit(), false, 2.0},
                          {&e, WeightSpec::reciprocal_abs(), false, std::log(2.0)},
                          {&a, arcsine, true, std::numbers::pi}};
  for (auto& c : cases) {
    double prev = INFINITY;
    for (int order : {1, 2, 4, 8}) {
      double err = std::abs(build_quadrature(*c.e, c.w, order, c.singular).mass() - c.exact);
      EXPECT_LE(err, prev + 1e-15) << c.w.name() << " order " << order;
      prev = err;
    }
  }
}

TEST(Quadrature, CompositeGradedAndLogarithmic) {
  auto e = IntervalSystem::make({{-200.0, -6.0}, {-4.0, -1.0}});
  QuadratureOptions o;
  o.order = 8;
  o.panels = 16;
  auto g = build_quadrature(e, WeightSpec::reciprocal_abs(), o);
  EXPECT_NEAR(g.mass(), std::log(200.0 / 6.0) + std::log(4.0), 1e-12);
  o.spacing = Spacing::uniform;
  o.graded_layers = 10;
  auto u = build_quadrature(e, WeightSpec::unit(), o);
  EXPECT_NEAR(u.mass(), e.length(), 1e-10);
  EXPECT_LT(u.nodes.front() + 200.0, 1e-3);
}

TEST(Quadrature, AdaptiveIntegrateComplexAndSingular) {
  auto f = [](double x) { return std::complex<double>(1.0, 0.0) / (x - std::complex<double>(0.0, 1.0)); };
  auto v = integrate(f, -1.0, 1.0);
  EXPECT_NEAR(v.real(), 0.0, 1e-13);
  EXPECT_NEAR(v.imag(), std::numbers::pi / 2, 1e-12);
  IntegrateOptions o;
  o.singular = Endpoints::both;
  double s = integrate([](double x) { return 1.0 / std::sqrt(1.0 - x * x); }, -1.0, 1.0, o);
  EXPECT_NEAR(s, std::numbers::pi, 1e-12);
  double k = integrate([](double x) { return std::abs(x - 0.3); }, -1.0, 1.0, {}, {0.3});
  EXPECT_NEAR(k, 0.5 * 1.3 * 1.3 + 0.5 * 0.7 * 0.7, 1e-14);
}
