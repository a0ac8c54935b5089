#include <gtest/gtest.h>

#include <random>

#include "kz/canonical.hpp"

using namespace kz;

namespace {

Recurrence random_recurrence(int n, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> ua(-1.0, 1.0), ub(0.2, 2.0);
  Recurrence r;
  for (int k = 0; k < n; ++k) {
    r.a.push_back(ua(gen));
    r.b.push_back(ub(gen));
  }
  r.mass = 1.0;
  return r;
}

Recurrence legendre_recurrence(int n) {
  // Orthonormal Legendre on [-1, 1] with d rho = dx: a_k = 0, b_k = (k+1)/sqrt((2k+1)(2k+3)).
  Recurrence r;
  for (int k = 0; k < n; ++k) {
    r.a.push_back(0.0);
    r.b.push_back((k + 1.0) / std::sqrt((2.0 * k + 1.0) * (2.0 * k + 3.0)));
  }
  r.mass = 2.0;
  return r;
}

std::complex<double> at(const xcomplex& v) { return to_cplx(v); }

}  // namespace

TEST(TransferChain, OneStepIsElementary) {
  Recurrence r{{0.0}, {1.0}, 1.0};
  std::complex<double> z(0.4, -1.3);
  auto m = transfer_matrix_product(r, 1, z);
  EXPECT_NEAR(std::abs(at(m.A) - z), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(at(m.B) + 1.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(at(m.C) - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(at(m.D)), 0.0, 1e-15);
  EXPECT_LE(m.det_residual(), 1e-30);
}

TEST(TransferChain, RandomStepsKeepDeterminantOne) {
  auto r = random_recurrence(20, 7);
  for (auto z : {std::complex<double>(0.3, 0.7), std::complex<double>(3.0, 0.01), std::complex<double>(-2.0, -5.0)})
    EXPECT_LE(transfer_matrix_product(r, 20, z).det_residual(), 1e-12);
}

TEST(TransferChain, FirstRowMatchesOrthonormalPolynomials) {
  const int n = 6;
  auto rec = legendre_recurrence(n);
  std::complex<double> z(0.3, 0.7);
  // Direct three-term recurrence: b_k p_{k+1} = (z - a_k) p_k - b_{k-1} p_{k-1}.
  std::complex<double> pm = 0.0, p = 1.0 / std::sqrt(rec.mass);
  for (int k = 0; k < n; ++k) {
    std::complex<double> next = ((z - rec.a[k]) * p - (k ? rec.b[k - 1] : 0.0) * pm) / rec.b[k];
    pm = p;
    p = next;
  }
  auto m = transfer_matrix_product(rec, n, z);
  EXPECT_NEAR(std::abs(at(m.A) - std::sqrt(rec.mass) * p), 0.0, 1e-10 * std::abs(p));

  // Second kind from the moment construction of the same measure.
  auto os = orthopolys(Measure::lebesgue(IntervalSystem::make({{-1.0, 1.0}})), n);
  std::complex<double> q = detail::horner(os.pairs[n].A, z), c = detail::horner(os.pairs[n].C, z);
  EXPECT_NEAR(std::abs(c - p), 0.0, 1e-8 * std::abs(p));
  EXPECT_NEAR(std::abs(at(m.B) + q / std::sqrt(rec.mass)), 0.0, 1e-8 * std::abs(q));
}

TEST(TransferChain, RejectsNonpositiveOffDiagonal) {
  Recurrence r{{0.0, 0.0}, {1.0, 0.0}, 1.0};
  EXPECT_THROW(TransferChain(r, 2), ValidationError);
  EXPECT_NO_THROW(TransferChain(r, 1));
  EXPECT_THROW(TransferChain(r, 3), ValidationError);
}

TEST(TransferChain, NormalizedIsIdentityAtZero) {
  auto mp = TransferChain(random_recurrence(8, 3), 8).normalized();
  EXPECT_TRUE(mp.identity_at_zero(1e-30));
  EXPECT_LE(mp(std::complex<double>(1.5, 2.0)).det_residual(), 1e-30);
}

TEST(JExpanding, HandExamples) {
  auto id = CanonicalMatrix::identity(xcomplex(0.0, 1.0));
  auto f = j_expanding_check(id);
  EXPECT_NEAR(f.min_eigenvalue, 0.0, 1e-15);
  EXPECT_NEAR(f.h11, 0.0, 1e-15);

  Recurrence r{{0.0}, {1.0}, 1.0};
  auto m = transfer_matrix_product(r, 1, {0.0, 1.0});
  f = j_expanding_check(m);
  EXPECT_NEAR(f.h11, 1.0, 1e-15);
  EXPECT_NEAR(f.h22, 0.0, 1e-15);
  EXPECT_NEAR(std::abs(f.h12), 0.0, 1e-15);
  EXPECT_NEAR(f.min_eigenvalue, 0.0, 1e-15);
  EXPECT_TRUE(f.pass);

  EXPECT_THROW(j_expanding_check(transfer_matrix_product(r, 1, {2.0, 0.0})), ValidationError);
}

TEST(JExpanding, ChainsAreExpandingEverywhereAbove) {
  auto z0 = std::complex<double>(0.3, 0.7);
  EXPECT_GE(j_expanding_check(transfer_matrix_product(random_recurrence(20, 11), 20, z0)).min_eigenvalue, -1e-10);
  for (unsigned seed = 1; seed <= 10; ++seed) {
    auto r = random_recurrence(30, seed);
    for (auto z : upper_half_plane_samples(16)) {
      auto m = transfer_matrix_product(r, 30, z);
      EXPECT_LE(m.det_residual(), 1e-10);
      EXPECT_GE(j_expanding_check(m).min_eigenvalue, -1e-10) << seed << " " << z;
    }
  }
}

TEST(Transforms, ScaleAndShift) {
  auto m = transfer_matrix_product(random_recurrence(5, 2), 5, {0.2, 0.9});
  auto s = apply_canonical_transform(m, CanonicalTransform::scale(2.0));
  EXPECT_NEAR(std::abs(at(s.A) - at(m.A)), 0.0, 1e-14 * std::abs(at(m.A)));
  EXPECT_NEAR(std::abs(at(s.B) - 2.0 * at(m.B)), 0.0, 1e-14 * std::abs(at(m.B)));
  EXPECT_NEAR(std::abs(at(s.C) - 0.5 * at(m.C)), 0.0, 1e-14 * std::abs(at(m.C)));
  EXPECT_NEAR(std::abs(at(s.D) - at(m.D)), 0.0, 1e-14 * std::abs(at(m.D)));
  EXPECT_LE(s.det_residual(), 1e-30);

  auto t = apply_canonical_transform(apply_canonical_transform(m, CanonicalTransform::shift(0.7)),
                                     CanonicalTransform::shift(-0.7));
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(std::abs(t.entries()[k] - m.entries()[k]), 0.0, 1e-13);
  EXPECT_LE(apply_canonical_transform(m, CanonicalTransform::shift(0.7)).det_residual(), 1e-30);

  EXPECT_THROW(apply_canonical_transform(m, CanonicalTransform::scale(-1.0)), ValidationError);
  EXPECT_THROW(apply_canonical_transform(m, CanonicalTransform::pole_shift()), ValidationError);
}

TEST(Transforms, PoleShiftFirstColumn) {
  auto B = TransferChain(random_recurrence(6, 5), 6).normalized();
  double c1 = static_cast<double>(MatrixPolynomial::coef(B.C, 1));
  ASSERT_GT(std::abs(1.0 - c1), 1e-3);
  auto A = apply_canonical_transform(B, CanonicalTransform::pole_shift());
  EXPECT_TRUE(A.identity_at_zero(1e-30));
  for (auto z : upper_half_plane_samples(8)) {
    auto a = A(z), b = B(z);
    std::complex<double> top = (at(b.A) - at(b.C) / z) / (1.0 - c1), bottom = at(b.C) / (1.0 - c1);
    EXPECT_NEAR(std::abs(at(a.A) - top), 0.0, 1e-10 * (1.0 + std::abs(top)));
    EXPECT_NEAR(std::abs(at(a.C) - bottom), 0.0, 1e-10 * (1.0 + std::abs(bottom)));
    EXPECT_LE(a.det_residual(), 1e-10);
  }
  // Scale and shift also act on the matrix function.
  auto s = apply_canonical_transform(B, CanonicalTransform::scale(3.0));
  auto z = std::complex<double>(0.5, 0.5);
  EXPECT_NEAR(std::abs(at(s(z).B) - 3.0 * at(B(z).B)), 0.0, 1e-12);
}

TEST(Transforms, PoleShiftSingularWhenDerivativeIsOne) {
  MatrixPolynomial m{{xreal(1)}, {xreal(0)}, {xreal(0), xreal(1)}, {xreal(1)}};  // C(z) = z
  EXPECT_THROW(apply_canonical_transform(m, CanonicalTransform::pole_shift()), SingularError);
  MatrixPolynomial off{{xreal(2)}, {xreal(0)}, {xreal(0)}, {xreal(0.5)}};
  EXPECT_THROW(apply_canonical_transform(off, CanonicalTransform::pole_shift()), ValidationError);
}

TEST(Identities, LegendreDegreeOneAtTwo) {
  Measure leg = Measure::lebesgue(IntervalSystem::make({{-1.0, 1.0}}));
  auto os = orthopolys(leg, 2);
  auto rep = identity_residuals(os.pairs[1], leg, {cplx(2.0, 0.0)});
  // (3/2) int x^2 / (x - 2) dx = 6 - 6 ln 3
  double oracle = 6.0 - 6.0 * std::log(3.0);
  EXPECT_NEAR(rep.rows[0].lhs_i.real(), oracle, 1e-12);
  EXPECT_NEAR(rep.rows[0].rhs_i.real(), oracle, 1e-10);
  EXPECT_NEAR(oracle, -0.59167, 1e-5);
  EXPECT_LE(rep.rows[0].residual_i, 1e-3);
  EXPECT_TRUE(rep.report.pass());
}

TEST(Identities, DecayLikeOneOverZ) {
  Measure leg = Measure::lebesgue(IntervalSystem::make({{-1.0, 1.0}}));
  auto os = orthopolys(leg, 3);
  auto rep = identity_residuals(os.pairs[2], leg, {cplx(1e3, 0.0)});
  auto& r = rep.rows[0];
  EXPECT_NEAR(std::abs(r.lhs_i / r.rhs_i), 1.0, 1e-2);
  // int C^2 d rho = 1, so z times either side tends to -1.
  EXPECT_NEAR((r.lhs_i * 1e3).real(), -1.0, 1e-2);
  EXPECT_NEAR((r.rhs_i * 1e3).real(), -1.0, 1e-2);
}

TEST(Identities, SpectralDensityClosedForm) {
  auto e = IntervalSystem::make({{-2.0, -0.5}, {0.5, 2.0}});
  SpectralDensity sd(e, SignConfiguration(std::vector<int>{1}));
  auto os = orthopolys(sd.measure(), 4);
  std::vector<cplx> zs{cplx(0.2, 0.3), cplx(3.0, 0.0), cplx(-1.0, 0.5)};
  for (int n = 1; n <= 4; ++n) {
    auto rep = identity_residuals(os.pairs[n], sd, zs);
    EXPECT_LE(rep.report.find("identity_i_residual")->value, 1e-8) << n;
    EXPECT_LE(rep.report.find("identity_ii_residual")->value, 1e-8) << n;
  }
}

TEST(Identities, ConvergeWithTheFixedRule) {
  auto e = IntervalSystem::make({{-2.0, -0.5}, {0.5, 2.0}});
  SpectralDensity sd(e, SignConfiguration(std::vector<int>{1}));
  auto os = orthopolys(sd.measure(), 3);
  std::vector<cplx> zs{cplx(0.2, 0.3), cplx(3.0, 0.0)};
  double prev = INFINITY;
  for (int N = 8; N <= 128; N *= 2) {
    IdentityOptions o;
    o.nodes = N;
    double r = identity_residuals(os.pairs[3], sd, zs, o).report.find("identity_i_residual")->value;
    // Square-root end behaviour: first order in the node spacing.
    EXPECT_LE(r, 0.6 * prev) << N;
    prev = r;
  }
}

TEST(Identities, ArcsineMeasure) {
  Measure m = Measure::arcsine();
  auto os = orthopolys(m, 3);
  auto rep = identity_residuals(os.pairs[2], m, {cplx(1.5, 0.0), cplx(0.0, 0.4)});
  EXPECT_LE(rep.report.find("identity_i_residual")->value, 1e-8);
  EXPECT_LE(rep.report.find("identity_ii_residual")->value, 1e-6);
}

TEST(Identities, ProximityError) {
  Measure leg = Measure::lebesgue(IntervalSystem::make({{-1.0, 1.0}}));
  auto os = orthopolys(leg, 1);
  EXPECT_THROW(identity_residuals(os.pairs[1], leg, {cplx(0.5, 0.0)}), ProximityError);
}

TEST(ErrorIdentity, ExactForPolishedOptima) {
  for (double T : {8.0, 16.0}) {
    auto e = IntervalSystem::make({{-T, -4.0}, {-3.0, -1.0}}, T);
    for (int n : {2, 3, 4}) {
      auto sol = solve_l1(e, WeightSpec::reciprocal_abs(), NormalizedAtZero{}, n);
      ASSERT_TRUE(sol.diagnostics.polished);
      auto c = error_identity_check(e, sol);
      ASSERT_TRUE(c.valid) << c.note;
      EXPECT_LE(c.residual, 1e-10) << T << " " << n;
      EXPECT_NEAR(c.C_prime_0, -*sol.lambda0, 1e-15);
    }
  }
}

TEST(ErrorIdentity, GridValuesImproveUnderRefinement) {
  auto e = IntervalSystem::make({{-8.0, -4.0}, {-3.0, -1.0}}, 8.0);
  auto rows = error_identity_refinement(e, 4, 5, 2);
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_LE(rows.front().residual, 5e-2);
  for (size_t i = 2; i < rows.size(); ++i) EXPECT_LE(rows[i].residual, 0.5 * rows[i - 2].residual) << i;
  EXPECT_LT(rows.back().residual, 1e-2 * rows.front().residual);
}

TEST(TransferChain, ReportsExhaustedPrecision) {
  Recurrence r;
  for (int k = 0; k < 30; ++k) {
    r.a.push_back(0.0);
    r.b.push_back(1e-6);
  }
  auto m = transfer_matrix_product(r, 30, {10.0, 1.0});
  EXPECT_THROW(m.det_residual(), NumericalError);
  EXPECT_THROW(j_expanding_check(m), NumericalError);
}
