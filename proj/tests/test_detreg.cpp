#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "zetaforge/detreg.hpp"

using namespace zetaforge;

namespace {
const double kSqrt2Pi = std::sqrt(2.0 * kPi);
}

TEST(DetReg, Naturals) {
  auto r = det_reg(make_naturals());
  EXPECT_NEAR(r.value, kSqrt2Pi, 1e-13);
  EXPECT_NEAR(r.zeta0, -0.5, 1e-14);
  EXPECT_GT(r.abs_error_estimate, 0.0);
}

TEST(DetReg, SquaresGiveTwoPi) { EXPECT_NEAR(det_reg(make_naturals(2.0)).value, 2.0 * kPi, 1e-12); }

TEST(DetReg, OddAndEvenIntegers) {
  EXPECT_NEAR(det_reg(make_Dj(0)).value, std::sqrt(2.0), 1e-13);
  EXPECT_NEAR(det_reg(make_Ej(0)).value, std::sqrt(kPi), 1e-13);
}

TEST(DetReg, FiniteProduct) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> lam(0.1, 20.0);
  std::uniform_int_distribution<int> mult(1, 3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::pair<double, long long>> pts;
    double logp = 0.0;
    for (int i = 0; i < 6; ++i) {
      double l = lam(rng);
      int m = mult(rng);
      pts.emplace_back(l, m);
      logp += m * std::log(l);
    }
    EXPECT_NEAR(det_reg(make_finite(pts)).log_value, logp, 1e-12 * (1.0 + std::abs(logp)));
  }
}

TEST(DetReg, MultiplicativeUnderDirectSum) {
  auto f = make_finite({{0.7, 2}, {3.0, 1}});
  double expect = 0.7 * 0.7 * 3.0 * det_reg(make_dualP()).value;
  EXPECT_NEAR(det_reg(direct_sum(f, make_dualP())).value, expect, 1e-12 * expect);
}

TEST(DetReg, ScalingAnomaly) {
  // det(cD) = c^{zeta(0)} det(D)
  for (double c : {0.5, 2.0, 7.0}) {
    auto d = make_Dj(2);
    auto base = det_reg(d);
    EXPECT_NEAR(det_reg(scale(d, c)).log_value, base.log_value + base.zeta0 * std::log(c), 1e-11) << c;
  }
}

TEST(CharFn, NaturalsAgainstGamma) {
  for (double l : {0.0, 0.3, 1.0, 2.5, 10.0})
    EXPECT_NEAR(char_fn(make_naturals(), l), kSqrt2Pi / std::tgamma(1.0 + l), 1e-12 * kSqrt2Pi / std::tgamma(1.0 + l)) << l;
  cplx z = char_fn(make_naturals(), cplx(0.5, 1.5));
  EXPECT_LT(std::abs(z - std::conj(char_fn(make_naturals(), cplx(0.5, -1.5)))), 1e-12);
}

TEST(CharFn, SquaresAtOne) { EXPECT_NEAR(char_fn(make_naturals(2.0), 1.0), 2.0 * std::sinh(kPi), 1e-10); }

TEST(CharFn, VanishesAtMinusEigenvalue) {
  EXPECT_EQ(char_fn(make_naturals(), cplx(-3.0)), cplx(0.0));
  EXPECT_EQ(char_fn(make_finite({{1.0, 1}}, 1), cplx(0.0)), cplx(0.0));
}

TEST(CharFn, HeatAsymptoticsForLargeLambda) {
  // tr e^{-tn} = 1/t - 1/2 + t/12 + O(t^3)
  HeatExpansion h{{{-1.0, 1.0}, {0.0, -0.5}, {1.0, 1.0 / 12.0}}};
  for (double l : {40.0, 80.0}) {
    double exact = -std::log(char_fn(make_naturals(), l));
    EXPECT_NEAR(char_fn_asymptotics(h, l), exact, 1.0 / (300.0 * l * l * l)) << l;
  }
}

TEST(Fredholm, SquaresInverse) {
  auto r = fredholm_det_inverse(make_naturals(2.0));
  EXPECT_NEAR(r.value.real(), std::sinh(kPi) / kPi, 1e-12);
  auto rs = fredholm_vs_raySinger(make_naturals(2.0));
  EXPECT_LT(rs.discrepancy, 1e-11);
}

TEST(Fredholm, FiniteList) {
  auto r = fredholm_det({cplx(0.5), cplx(-0.25), cplx(0.0, 1.0)});
  EXPECT_LT(std::abs(r.value - 1.5 * 0.75 * cplx(1.0, 1.0)), 1e-15);
}

TEST(Fredholm, RejectsNonTraceClass) {
  try {
    fredholm_det_inverse(make_naturals());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Hypothesis);
  }
}

TEST(ZetaOfDivisor, BaselValues) {
  EXPECT_NEAR(zeta_of_divisor(make_naturals(), 2.0).real(), kPi * kPi / 6.0, 1e-13);
  // odd integers: (1 - 2^{-s}) zeta(s)
  EXPECT_NEAR(zeta_of_divisor(make_Dj(0), 2.0).real(), 0.75 * kPi * kPi / 6.0, 1e-13);
}
