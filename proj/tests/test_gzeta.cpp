#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include "zetaforge/gzeta.hpp"

using namespace zetaforge;

namespace {

LengthSpectrum single_class(double l, double weight = 1.0) {
  LengthSpectrum S;
  LengthEntry e;
  e.length = e.primitive_length = l;
  e.mult_weight = weight;
  S.entries.push_back(e);
  return S;
}

LengthSpectrum schottky(double L) {
  FuchsianGroup G;
  G.generators = {Mat2{5, 12, 2, 5}, Mat2{5, 2, 12, 5}};
  return schottky_lengths(G, L);
}

cplx direct_Z(double l, const cplx& s) {
  cplx p(1.0);
  for (int N = 0; N < 200; ++N) p *= 1.0 - std::exp(-(s + double(N)) * l);
  return p;
}

}  // namespace

TEST(Selberg, SingleClassAgainstDirectProduct) {
  for (cplx s : {cplx(0.5), cplx(2.0, 1.0), cplx(0.2, -4.0)}) {
    auto S = single_class(1.7);
    cplx z = direct_Z(1.7, s);
    EXPECT_LT(std::abs(log_selberg_Z_product(S, s).value - z), 1e-13);
    EXPECT_LT(std::abs(log_selberg_Z_classes(S, s).value - z), 1e-12);
  }
}

TEST(Selberg, ProductAndClassFormsAgreeOnSchottkySpectrum) {
  auto S = schottky(12.0);
  for (cplx s : {cplx(2.0), cplx(1.5, 3.0), cplx(3.0, -1.0)}) {
    auto r = selberg_forms(S, s);
    EXPECT_LT(r.discrepancy, 1e-12) << s;
    EXPECT_GE(r.product.tail_bound, 0.0);
  }
}

TEST(Selberg, ListedIteratesUseTheirOwnWeights) {
  auto S = single_class(1.0);
  LengthEntry it;
  it.length = 2.0;
  it.primitive_length = 1.0;
  it.phi_trace = -1.0;
  S.entries.push_back(it);
  // the k = 2 term flips sign relative to chi^2 = 1
  auto base = log_selberg_Z_classes(single_class(1.0), cplx(2.0));
  auto mod = log_selberg_Z_classes(S, cplx(2.0));
  double k2 = 2.0 * std::exp(-4.0) / (2.0 * (1.0 - std::exp(-2.0)));
  EXPECT_NEAR((mod.log_value - base.log_value).real(), k2, 1e-14);
}

TEST(Selberg, ConvergenceErrorsAreReported) {
  EulerConfig c;
  c.abscissa = 1.0;
  try {
    log_selberg_Z(single_class(1.0), cplx(0.5), c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Convergence);
  }
  EXPECT_THROW(log_selberg_Z(single_class(1.0), cplx(-0.5)), Error);
}

TEST(Selberg, RequireCompleteFlagsShortEnumerations) {
  EulerConfig c;
  c.require_complete = true;
  EXPECT_THROW(log_selberg_Z(schottky(6.0), cplx(1.2), c), Error);
}

TEST(Ruelle, EqualsZetaQuotient) {
  auto S = schottky(12.0);
  for (cplx s : {cplx(2.0), cplx(1.5, 3.0)}) EXPECT_LT(ruelle_R(S, s).discrepancy, 1e-12);
  auto empty = ruelle_R(LengthSpectrum{}, cplx(1.0));
  EXPECT_EQ(empty.R, cplx(1.0));
}

TEST(Ruelle, FactorizationWithOneDimensionalGrading) {
  auto S = schottky(10.0);
  size_t primitives = 0;
  for (auto& e : S.entries)
    if (std::abs(e.mu() - 1.0) < 1e-9) ++primitives;
  GradedAction act;
  act.n1.assign(primitives, {cplx(1.0)});
  act.n2.assign(primitives, {});
  auto r = ruelle_factorization(S, act, cplx(2.5, 0.5));
  EXPECT_LT(r.discrepancy, 1e-12 * std::abs(r.lhs));
  act.n1.pop_back();
  EXPECT_THROW(ruelle_factorization(S, act, cplx(2.5)), Error);
}

TEST(Integrals, FAndHAgainstDirectQuadrature) {
  boost::math::quadrature::gauss_kronrod<double, 61> gk;
  for (int n : {2, 3, 5})
    for (int k = 1; k < n; ++k)
      for (double lam : {0.5, 2.0, 9.0}) {
        double pref = 2.0 * ((n + 1) % 2 ? -1.0 : 1.0) * std::tgamma(double(n));
        auto weight = [&](double r, bool coth) {
          double w = coth ? 1.0 / std::tanh(kPi * r / 2.0) : std::tanh(kPi * r / 2.0);
          return std::pow(r, 2 * k - 1) * w / std::pow(r * r + lam, n);
        };
        double f = pref * gk.integrate([&](double r) { return weight(r, false); }, 0.0, std::numeric_limits<double>::infinity(), 15, 1e-13);
        auto F = F_int(n, k, lam);
        EXPECT_NEAR(F.value, f, 1e-10 * std::max(1.0, std::abs(f))) << n << " " << k << " " << lam;
        double h = pref * gk.integrate([&](double r) { return weight(r, true); }, 1e-300, std::numeric_limits<double>::infinity(), 15, 1e-13);
        EXPECT_NEAR(H_int(n, k, lam).value, h, 1e-9 * std::max(1.0, std::abs(h))) << n << " " << k << " " << lam;
      }
}

TEST(Integrals, LowestOrderAgainstTrigamma) {
  for (double lam : {1.0, 4.0, 9.0, 2.5}) {
    double a = std::sqrt(lam);
    EXPECT_NEAR(F_int(2, 1, lam).value, -0.5 / a * boost::math::trigamma((1.0 + a) / 2.0), 1e-12);
    EXPECT_NEAR(H_int(2, 1, lam).value, -1.0 / (a * a * a) - 0.5 / a * boost::math::trigamma(1.0 + a / 2.0), 1e-12);
  }
  EXPECT_THROW(F_int(2, 2, 1.0), Error);
}

TEST(GIntegral, BesselClosedForm) {
  for (double a : {0.3, 1.0, 2.0})
    for (double b : {0.5, 1.5})
      for (double z : {-1.5, 0.0, 0.5, 3.0}) {
        double ref = 2.0 * std::pow(a / b, z / 2.0) * boost::math::cyl_bessel_k(z, 2.0 * std::sqrt(a * b));
        EXPECT_NEAR(g_integral(a, b, cplx(z)).real(), ref, 1e-11 * std::max(1.0, ref));
      }
  // conjugate symmetry in z
  cplx w = g_integral(0.7, cplx(1.0, 2.0)), wc = g_integral(0.7, cplx(1.0, -2.0));
  EXPECT_LT(std::abs(w - std::conj(wc)), 1e-12);
}

TEST(Polynomials, PnRecurrenceAndPtilde) {
  EXPECT_EQ(pn_poly(2).to_string(), PolyQ::from_ints({1, 1}).to_string());
  EXPECT_EQ(pn_poly(3).to_string(), PolyQ::from_ints({1, 3, 3}).to_string());
  EXPECT_EQ(pn_poly(4).to_string(), PolyQ::from_ints({1, 6, 15, 15}).to_string());
  auto pt = ptilde(PolyQ::constant(1).with_parity(Parity::Even));
  EXPECT_NEAR(pt.eval(0.75), 2.0 * kPi * 0.75, 1e-15);
  // P(y) = y^2: 2 pi int_0^a (iy)^2 dy = -2 pi a^3 / 3
  auto p2 = ptilde(PolyQ::monomial(2).with_parity(Parity::Even));
  EXPECT_NEAR(p2.eval(1.5), -2.0 * kPi * 1.5 * 1.5 * 1.5 / 3.0, 1e-13);
  EXPECT_THROW(ptilde(PolyQ::monomial(1)), Error);
}

TEST(EmConstant, FirstValues) {
  auto e1 = em_constant(1);
  EXPECT_NEAR(e1.value, std::exp(-2.0), 1e-15);
  EXPECT_EQ(e1.N, Rational(-2));
  for (int m = 1; m <= 6; ++m) {
    auto e = em_constant(m);
    EXPECT_TRUE(std::isfinite(e.log_value));
    double lv = to_double(e.N);
    for (auto& [p, x] : e.prime_powers) lv += to_double(x) * std::log(double(p));
    EXPECT_NEAR(lv, e.log_value, 1e-12);
  }
  EXPECT_THROW(em_constant(0), Error);
}

TEST(HeatKernel, CalibrationAndSmallTime) {
  auto c = heat_calibration();
  EXPECT_NEAR(c.small_t_ratio, 1.0, 1e-3);
  EXPECT_LT(c.max_deviation, 1e-10);
}

TEST(HeatKernel, ContinuousL2DeterminantDerivative) {
  // d/ds of -log det at s: 2 s log s + 4 s int r/((r^2+s^2)(e^{2 pi r}+1)) dr, checked by differences
  boost::math::quadrature::gauss_kronrod<double, 61> gk;
  for (double s : {0.75, 1.5}) {
    double h = 1e-4;
    double fd = -(l2_log_det_continuous(s + h) - l2_log_det_continuous(s - h)) / (2.0 * h);
    double J = gk.integrate([&](double r) { return r / ((r * r + s * s) * (std::exp(2.0 * kPi * r) + 1.0)); }, 0.0,
                            std::numeric_limits<double>::infinity(), 15, 1e-14);
    EXPECT_NEAR(fd, 2.0 * s * std::log(s) + 4.0 * s * J, 1e-7);
  }
}

TEST(FactorAtInfinity, RatioIsConstantAcrossGrid) {
  auto r = factor_infinity_check({1.0, 1.5, 2.0, 2.5, 3.0});
  EXPECT_LT(r.spread, 1e-9);
  EXPECT_GT(r.spread_with_kernel, 1e-3);
  EXPECT_THROW(factor_infinity_check({0.25}), Error);
}
