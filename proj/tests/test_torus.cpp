#include <gtest/gtest.h>

#include "zetaforge/torus.hpp"

using namespace zetaforge;

namespace {

const cplx I(0.0, 1.0);

// Theta from the triple-product series divided by the pentagonal series for prod (1 - q^m).
cplx theta_series(const cplx& w, const cplx& z) {
  cplx q = std::exp(2.0 * kPi * I * z);
  cplx x = std::exp(2.0 * kPi * I * w);
  cplx jtp(0.0), euler(0.0);
  for (int n = -60; n <= 60; ++n) {
    cplx term = std::pow(q, 0.5 * n * (n - 1.0)) * std::pow(x, double(-n));
    jtp += (n % 2 ? -1.0 : 1.0) * term;
    euler += (n % 2 ? -1.0 : 1.0) * std::pow(q, 0.5 * n * (3.0 * n - 1.0));
  }
  return -std::exp(kPi * I * (w + z / 6.0)) * jtp / euler;
}

double hol_torsion_series(const TorusSpec& s) {
  return std::abs(std::exp(-kPi * I * s.v * s.v * s.z) / theta_series(s.u - s.z * s.v, s.z));
}

}  // namespace

TEST(Theta, ProductMatchesHighPrecisionValue) {
  cplx t = theta_jacobi(cplx(0.3, -0.1), cplx(0.5, 1.0));
  EXPECT_LT(std::abs(t - cplx(0.0479889794630511913299201947065, -1.02793123128382275423093706639)), 1e-14);
}

TEST(Theta, ProductMatchesTripleProductSeries) {
  for (cplx z : {cplx(0.0, 1.0), cplx(0.5, 1.0), cplx(-0.2, 0.6), cplx(0.0, 2.0)})
    for (cplx w : {cplx(0.1), cplx(0.37, 0.2), cplx(-0.45, -0.3)}) {
      cplx a = theta_jacobi(w, z), b = theta_series(w, z);
      EXPECT_LT(std::abs(a - b), 1e-12 * std::abs(b)) << w << " " << z;
    }
}

TEST(HolTorsion, SpectralSideMatchesThetaOnGrid) {
  for (cplx z : {cplx(0.0, 1.0), cplx(0.5, 1.0), cplx(0.0, 2.0)})
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) {
        TorusSpec s{z, 0.1 + 0.2 * i, 0.1 + 0.2 * j};
        auto rep = hol_torsion(s);
        EXPECT_NEAR(std::log(rep.spectral), std::log(hol_torsion_series(s)), 1e-6) << z << " u=" << s.u << " v=" << s.v;
        EXPECT_LT(rep.log_discrepancy, 1e-6);
      }
}

TEST(HolTorsion, IndependentOfMellinSplit) {
  TorusSpec s{cplx(0.3, 1.2), 0.25, 0.6};
  double a = torus_zeta_deriv0(s, 0.3).deriv0, b = torus_zeta_deriv0(s, 3.0).deriv0;
  EXPECT_NEAR(a, b, 1e-9);
}

TEST(HolTorsion, RejectsTrivialCharacter) {
  EXPECT_THROW(hol_torsion(TorusSpec{cplx(0.0, 1.0), 1.0, 0.0}), Error);
  EXPECT_THROW(hol_torsion(TorusSpec{cplx(0.0, -1.0), 0.5, 0.0}), Error);
}

TEST(HeatTrace, DirectAndPoissonAgree) {
  for (double t : {0.05, 0.2, 1.0})
    for (TorusSpec s : {TorusSpec{cplx(0.0, 1.0), 0.0, 0.0}, TorusSpec{cplx(0.4, 0.9), 0.3, 0.7}}) {
      double a = heat_trace_direct(s, t), b = heat_trace_poisson(s, t);
      EXPECT_NEAR(a, b, 1e-12 * std::max(1.0, std::abs(b))) << t;
    }
}

TEST(Tower, ScaledTracesConvergeToGammaTrace) {
  auto r = tower_traces(TorusSpec{cplx(0.0, 1.0)}, {1, 2, 4, 8}, 0.5);
  double g = 1.0 / (4.0 * kPi * 0.5);
  EXPECT_DOUBLE_EQ(r.gamma_trace, g);
  EXPECT_NEAR(r.scaled_traces.back(), g, 1e-8);
  for (size_t i = 1; i < r.scaled_traces.size(); ++i)
    EXPECT_LE(std::abs(r.scaled_traces[i] - g), std::abs(r.scaled_traces[i - 1] - g) + 1e-15);
}

TEST(Tower, L2CharFnApproximatedByQuotients) {
  auto r = l2_char_fn(TorusSpec{cplx(0.0, 1.0)}, 1.0, {2, 6});
  EXPECT_NEAR(r.log_closed_form, 1.0 / (4.0 * kPi), 1e-15);
  ASSERT_EQ(r.quotients.size(), 2u);
  EXPECT_NEAR(r.quotients[1], r.closed_form, 1e-3);
  EXPECT_LT(std::abs(r.quotients[1] - r.closed_form), std::abs(r.quotients[0] - r.closed_form));
}

TEST(Tower, ShiftedLogDetAgainstEigenvalueSum) {
  // second lambda-derivative is the convergent sum of -1/(mu + lambda)^2
  TorusSpec s{cplx(0.0, 1.0)};
  double lam = 2.0, h = 1e-2;
  double second = (torus_log_det_shifted(s, 1, lam + h) - 2.0 * torus_log_det_shifted(s, 1, lam) + torus_log_det_shifted(s, 1, lam - h)) / (h * h);
  double direct = 0.0;
  for (int m = -400; m <= 400; ++m)
    for (int n = -400; n <= 400; ++n) {
      double mu = 4.0 * kPi * kPi * (m * m + n * n);
      direct -= 1.0 / ((mu + lam) * (mu + lam));
    }
  EXPECT_NEAR(second, direct, 2e-5);
}
