#pragma once
// Invariant suite: identities every build must satisfy, each reported with
// its computed value, its reference and the tolerance used.
#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "complexes.hpp"
#include "detreg.hpp"
#include "divisor.hpp"
#include "geodesics.hpp"
#include "gzeta.hpp"
#include "specfun.hpp"
#include "theta.hpp"
#include "torus.hpp"

namespace zetaforge {

struct IdentityCheck {
  std::string name;
  double value = 0.0;
  double reference = 0.0;
  double discrepancy = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  double seconds = 0.0;
  std::string error;  // set when the computation itself threw
};

namespace detail {

struct Probe {
  double value, reference, discrepancy;
};

inline Probe probe_max(const std::vector<std::pair<double, double>>& pairs) {
  Probe p{0.0, 0.0, 0.0};
  for (auto& [v, r] : pairs) {
    double d = std::abs(v - r);
    if (d >= p.discrepancy) p = {v, r, d};
  }
  return p;
}

inline LengthSpectrum schottky_test_spectrum(double L) {
  FuchsianGroup G;
  G.generators = {Mat2{5, 12, 2, 5}, Mat2{5, 2, 12, 5}};
  return schottky_lengths(G, L);
}

}  // namespace detail

inline std::vector<std::pair<std::string, std::function<detail::Probe()>>> identity_probes() {
  using detail::Probe;
  std::vector<std::pair<std::string, std::function<Probe()>>> v;

  v.emplace_back("regularized product of the naturals is sqrt(2 pi)", [] {
    double d = det_reg(make_naturals()).value;
    return Probe{d, std::sqrt(2.0 * kPi), std::abs(d - std::sqrt(2.0 * kPi))};
  });
  v.emplace_back("Lerch formula for d/ds zeta(0, a)", [] {
    std::vector<std::pair<double, double>> p;
    for (int k = 1; k <= 25; ++k) {
      double a = 0.07 + 0.23 * k;
      p.emplace_back(hurwitz_zeta_sderiv0(a), std::lgamma(a) - 0.5 * std::log(2.0 * kPi));
    }
    return detail::probe_max(p);
  });
  v.emplace_back("Fredholm determinant of 1 + A^{-1} equals det(A+1)/det(A) for A = n^2", [] {
    auto r = fredholm_vs_raySinger(make_naturals(2.0));
    return Probe{r.lhs, r.rhs, r.discrepancy};
  });
  v.emplace_back("Fredholm side for A = n^2 equals sinh(pi)/pi", [] {
    double f = fredholm_det_inverse(make_naturals(2.0)).value.real();
    return Probe{f, std::sinh(kPi) / kPi, std::abs(f - std::sinh(kPi) / kPi)};
  });
  v.emplace_back("tanh weight integral F_2^1 matches its Hurwitz series", [] {
    std::vector<std::pair<double, double>> p;
    for (double lam : {1.0, 4.0, 9.0}) {
      double a = std::sqrt(lam);
      p.emplace_back(F_int(2, 1, lam).value, -2.0 / a * 0.25 * hurwitz_zeta(2.0, (1.0 + a) / 2.0));
    }
    return detail::probe_max(p);
  });
  v.emplace_back("coth weight integral H_2^1 matches its Hurwitz series", [] {
    std::vector<std::pair<double, double>> p;
    for (double lam : {1.0, 4.0, 9.0}) {
      double a = std::sqrt(lam);
      p.emplace_back(H_int(2, 1, lam).value, -1.0 / (a * a * a) - 2.0 / a * 0.25 * hurwitz_zeta(2.0, 1.0 + a / 2.0));
    }
    return detail::probe_max(p);
  });
  v.emplace_back("dual theta continuation agrees with its series", [] {
    double worst = 0.0, val = 0.0, ref = 0.0;
    std::vector<PolyQ> qs = {PolyQ::constant(1).with_parity(Parity::Even), PolyQ::monomial(1), PolyQ::monomial(2),
                             PolyQ::from_ints({0, 1, 0, 2}, Parity::Odd)};
    for (auto& Q : qs)
      for (double t : {0.4, 1.0, 2.5})
        for (double im : {0.0, 0.7}) {
          cplx a = theta_dual(Q, cplx(t, im)), b = theta_dual_series(Q, cplx(t, im));
          double d = std::abs(a - b) / std::max(1.0, std::abs(b));
          if (d >= worst) worst = d, val = std::abs(a), ref = std::abs(b);
        }
    return Probe{val, ref, worst};
  });
  v.emplace_back("finite-part tanh identity", [] {
    double worst = 0.0, val = 0.0, ref = 0.0;
    for (auto& Q : {PolyQ::monomial(1), PolyQ::from_ints({0, 3, 0, 1}, Parity::Odd)})
      for (double t : {0.5, 1.0, 2.0}) {
        auto r = finite_part_identity(Q, t);
        if (r.discrepancy >= worst) worst = r.discrepancy, val = r.lhs.imag(), ref = r.rhs.imag();
      }
    return Probe{val, ref, worst};
  });
  v.emplace_back("argument-principle theta equals the direct sum", [] {
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> U(0.05, 6.0);
    std::vector<std::pair<double, double>> p;
    for (int trial = 0; trial < 12; ++trial) {
      std::vector<double> a;
      int n = 1 + int(rng() % 6);
      for (int i = 0; i < n; ++i) a.push_back((rng() % 4 == 0) ? 0.0 : U(rng));
      double tau = 0.3 + 0.25 * trial;
      double direct = 0.0;
      for (double x : a) direct += std::exp(-tau * x);
      p.emplace_back(contour_theta(a, tau).value, direct);
    }
    return detail::probe_max(p);
  });
  v.emplace_back("argument-principle theta ignores odd polynomial terms", [] {
    std::vector<double> a = {0.0, 0.8, 2.1, 3.3};
    ContourOptions o;
    o.odd_poly = {0.7, -0.3, 0.05};
    double base = contour_theta(a, 1.2).value, extra = contour_theta(a, 1.2, o).value;
    return Probe{extra, base, std::abs(extra - base)};
  });
  v.emplace_back("f(tau) + f(-tau) = -2 n0", [] {
    auto r = f_identity(1.3, 2, {0.5, 1.0, 2.0, 4.0});
    return Probe{r.sum.back(), -4.0, r.max_sum_error};
  });
  v.emplace_back("f'(tau) = (2 n0 / pi) sin(a tau) / tau", [] {
    auto r = f_identity(0.9, 1, {0.5, 1.5, 3.0});
    return Probe{r.max_derivative_error, 0.0, r.max_derivative_error};
  });
  v.emplace_back("Selberg double product equals the class sum", [] {
    auto S = detail::schottky_test_spectrum(12.0);
    double worst = 0.0;
    Probe p{0, 0, 0};
    for (cplx s : {cplx(2.0, 0.0), cplx(1.5, 3.0), cplx(3.0, -1.0)}) {
      auto r = selberg_forms(S, s);
      if (r.discrepancy >= worst) {
        worst = r.discrepancy;
        p = {r.product.log_value.real(), r.classes.log_value.real(), r.discrepancy};
      }
    }
    return p;
  });
  v.emplace_back("Ruelle function equals Z(s)/Z(s+1)", [] {
    auto S = detail::schottky_test_spectrum(12.0);
    double worst = 0.0;
    Probe p{0, 0, 0};
    for (cplx s : {cplx(2.0, 0.0), cplx(1.5, 3.0)}) {
      auto r = ruelle_R(S, s);
      if (r.discrepancy >= worst) {
        worst = r.discrepancy;
        p = {std::abs(r.R), std::abs(r.Z_ratio), r.discrepancy};
      }
    }
    return p;
  });
  v.emplace_back("torus holomorphic torsion matches the theta closed form", [] {
    double worst = 0.0;
    Probe p{0, 0, 0};
    for (cplx z : {cplx(0.0, 1.0), cplx(0.5, 1.0)})
      for (auto [u, w] : {std::pair{0.3, 0.2}, std::pair{0.0, 0.6}}) {
        auto r = hol_torsion(TorusSpec{z, u, w});
        if (r.log_discrepancy >= worst) worst = r.log_discrepancy, p = {r.spectral, r.closed_form, r.log_discrepancy};
      }
    return p;
  });
  v.emplace_back("scaled heat traces of the torus tower approach the Gamma-trace", [] {
    auto r = tower_traces(TorusSpec{cplx(0.0, 1.0), 0.0, 0.0}, {8}, 0.5);
    return Probe{r.scaled_traces[0], r.gamma_trace, std::abs(r.scaled_traces[0] - r.gamma_trace)};
  });
  v.emplace_back("binomial identity A(i, r, r')", [] {
    double bad = 0.0;
    for (int i = 0; i <= 20; ++i)
      for (int r = 0; r <= 10; ++r)
        for (int rp = 0; rp <= 10; ++rp) {
          auto a = A_identity(i, r, rp);
          if (a.lhs != a.rhs) bad += 1.0;
        }
    return Probe{bad, 0.0, bad};
  });
  v.emplace_back("generic Euler characteristic is multiplicative", [] {
    std::mt19937_64 rng(77);
    double bad = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      BettiSequence a(1 + rng() % 5), b(1 + rng() % 5);
      for (auto& x : a) x = static_cast<long long>(rng() % 7);
      for (auto& x : b) x = static_cast<long long>(rng() % 7);
      auto ga = chi_gen(a), gb = chi_gen(b), gab = chi_gen(kunneth(a, b));
      bool ok = (ga.r < 0 || gb.r < 0) ? gab.r < 0 : (gab.r == ga.r + gb.r && gab.value == ga.value * gb.value);
      if (!ok) bad += 1.0;
    }
    return Probe{bad, 0.0, bad};
  });
  v.emplace_back("E(1) = exp(-2)", [] {
    auto r = em_constant(1);
    return Probe{r.value, std::exp(-2.0), std::abs(r.value / std::exp(-2.0) - 1.0)};
  });
  v.emplace_back("heat-kernel calibration: g^1 - g^0 = 1/2 per Euler-Poincare unit", [] {
    auto c = heat_calibration();
    return Probe{c.difference.empty() ? 0.0 : c.difference[0], 0.5, c.max_deviation};
  });
  v.emplace_back("factor at infinity: ratio constant in s", [] {
    auto r = factor_infinity_check({1.0, 1.5, 2.0, 2.5, 3.0});
    return Probe{r.spread, 0.0, r.spread};
  });
  return v;
}

inline double identity_tolerance(const std::string& name) {
  static const std::vector<std::pair<std::string, double>> tol = {
      {"regularized product", 1e-9},  {"Lerch", 1e-10},         {"Fredholm determinant", 1e-8},
      {"Fredholm side", 1e-8},        {"tanh weight", 1e-8},     {"coth weight", 1e-8},
      {"dual theta", 1e-10},          {"finite-part", 1e-10},    {"argument-principle theta equals", 1e-7},
      {"argument-principle theta ignores", 1e-9}, {"f(tau)", 1e-8}, {"f'(tau)", 1e-7},
      {"Selberg double", 1e-12},      {"Ruelle", 1e-10},         {"torus holomorphic", 1e-6},
      {"scaled heat", 1e-8},          {"binomial", 0.5},         {"generic Euler", 0.5},
      {"E(1)", 1e-12},                {"heat-kernel", 1e-6},     {"factor at infinity", 1e-4}};
  for (auto& [prefix, t] : tol)
    if (name.rfind(prefix, 0) == 0) return t;
  return 1e-9;
}

inline IdentityCheck run_identity(const std::string& name, const std::function<detail::Probe()>& fn) {
  IdentityCheck c;
  c.name = name;
  c.tolerance = identity_tolerance(name);
  auto t0 = std::chrono::steady_clock::now();
  try {
    auto p = fn();
    c.value = p.value;
    c.reference = p.reference;
    c.discrepancy = p.discrepancy;
    c.passed = std::isfinite(p.discrepancy) && p.discrepancy <= c.tolerance;
  } catch (const std::exception& e) {
    c.error = e.what();
    c.passed = false;
  }
  c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return c;
}

}  // namespace zetaforge
