#pragma once
// Hurwitz zeta and friends via Euler-Maclaurin, digamma, Bernoulli numbers,
// and exact closed-form derivatives of the two geometric kernels.
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <vector>

#include "errors.hpp"
#include "polyq.hpp"

namespace zetaforge {

using cplx = std::complex<double>;
inline constexpr double kPi = std::numbers::pi;
inline constexpr double kEulerGamma = std::numbers::egamma;

// Compensated accumulator; T is double or std::complex<double>.
template <class T>
struct KahanSum {
  T sum{};
  T comp{};
  void add(const T& x) {
    T y = x - comp;
    T t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  T value() const { return sum; }
};

// B_0..B_n with B_1 = -1/2.
inline std::vector<Rational> bernoulli_exact(int n) {
  std::vector<Rational> B(static_cast<size_t>(n) + 1, Rational(0));
  B[0] = 1;
  for (int m = 1; m <= n; ++m) {
    Rational acc(0);
    for (int k = 0; k < m; ++k) acc += binomial_q(m + 1, k) * B[static_cast<size_t>(k)];
    B[static_cast<size_t>(m)] = -acc / (m + 1);
  }
  return B;
}

struct BernoulliTable {
  std::vector<Rational> exact;
  std::vector<double> values;
  // values[k] / k!, convenient for Euler-Maclaurin
  std::vector<double> over_factorial;
};

inline const BernoulliTable& bernoulli_table() {
  static const BernoulliTable table = [] {
    BernoulliTable t;
    constexpr int N = 80;
    t.exact = bernoulli_exact(N);
    Rational fact(1);
    for (int k = 0; k <= N; ++k) {
      if (k > 0) fact *= k;
      t.values.push_back(to_double(t.exact[static_cast<size_t>(k)]));
      t.over_factorial.push_back(to_double(t.exact[static_cast<size_t>(k)] / fact));
    }
    return t;
  }();
  return table;
}

struct HurwitzOptions {
  // shift < 0 selects the shift adaptively (smallest shift for which the
  // correction series converges); a nonnegative value forces a fixed shift.
  int shift = -1;
  int order = 25;
  double pole_eps = 1e-12;
};

namespace detail {

inline void check_hurwitz_a(const cplx& a) {
  if (!(a.real() > 0.0)) fail(ErrorKind::Domain, "Hurwitz zeta requires Re(a) > 0");
}

struct EmResult {
  cplx z, dz;
  bool converged;
};

inline EmResult hurwitz_em_fixed(const cplx& s, const cplx& a, bool want_deriv, int M, int K, bool check_growth = true) {
  const auto& bt = bernoulli_table();
  K = std::min<int>(K, (static_cast<int>(bt.values.size()) - 1) / 2);
  KahanSum<cplx> z, dz;
  double scale = 0.0, dscale = 0.0;
  for (int n = 0; n < M; ++n) {
    cplx w = cplx(n) + a;
    cplx lw = std::log(w);
    cplx t = std::exp(-s * lw);
    z.add(t);
    scale = std::max(scale, std::abs(t));
    if (want_deriv) {
      dz.add(-lw * t);
      dscale = std::max(dscale, std::abs(lw * t));
    }
  }
  cplx N = cplx(M) + a;
  cplx lN = std::log(N);
  cplx Nms = std::exp(-s * lN);
  cplx sm1 = s - 1.0;
  cplx N1ms = N * Nms;
  z.add(N1ms / sm1);
  z.add(0.5 * Nms);
  scale = std::max({scale, std::abs(N1ms / sm1), std::abs(Nms)});
  if (want_deriv) {
    cplx t1 = -lN * N1ms / sm1 - N1ms / (sm1 * sm1);
    dz.add(t1);
    dz.add(-0.5 * lN * Nms);
    dscale = std::max({dscale, std::abs(t1), std::abs(lN * Nms)});
  }
  // B_{2k}/(2k)! (s)_{2k-1} N^{-s-2k+1}
  cplx Npow = Nms / N;
  cplx invN2 = 1.0 / (N * N);
  double prev = std::numeric_limits<double>::infinity(), dprev = prev;
  bool conv = false, dconv = !want_deriv;
  for (int k = 1; k <= K; ++k) {
    cplx P(1.0), dP(0.0);
    for (int j = 0; j <= 2 * k - 2; ++j) {
      cplx f = s + double(j);
      dP = dP * f + P;
      P = P * f;
    }
    double c = bt.over_factorial[static_cast<size_t>(2 * k)];
    if (!conv) {
      cplx term = c * P * Npow;
      double m = std::abs(term);
      if (check_growth && m > prev && m > 1e-17 * scale) return {z.value(), dz.value(), false};
      z.add(term);
      prev = m;
      if (m <= 1e-17 * scale) conv = true;
    }
    if (!dconv) {
      cplx dterm = c * (dP - lN * P) * Npow;
      double m = std::abs(dterm);
      if (m > dprev && m > 1e-17 * dscale) return {z.value(), dz.value(), false};
      dz.add(dterm);
      dprev = m;
      if (m <= 1e-17 * dscale) dconv = true;
    }
    if (conv && dconv) break;
    Npow *= invN2;
  }
  return {z.value(), dz.value(), conv && dconv};
}

// Returns zeta(s,a) and, if want_deriv, d/ds zeta(s,a), from the same expansion.
inline std::pair<cplx, cplx> hurwitz_em(const cplx& s, const cplx& a, bool want_deriv, const HurwitzOptions& opt) {
  check_hurwitz_a(a);
  if (opt.shift >= 0) {
    auto r = hurwitz_em_fixed(s, a, want_deriv, opt.shift, opt.order);
    return {r.z, r.dz};
  }
  // At s = -k the correction series terminates and reproduces -B_{k+1}(a)/(k+1).
  if (!want_deriv && s.imag() == 0.0 && s.real() <= 0.0 && s.real() == std::floor(s.real())) {
    int k = static_cast<int>(-s.real());
    auto r = hurwitz_em_fixed(s, a, false, 0, k / 2 + 2, false);
    return {r.z, r.dz};
  }
  // Smallest admissible shift first: a small shift keeps the explicit head
  // short, which matters for Re(s) < 0 where head terms grow like n^{-Re s}.
  for (double target : {0.0, 6.0, 9.0, 13.0, 20.0, 30.0, 45.0, 70.0, 110.0}) {
    int M = std::max(0, static_cast<int>(std::ceil(target - a.real())));
    auto r = hurwitz_em_fixed(s, a, want_deriv, M, 60);
    if (r.converged) return {r.z, r.dz};
  }
  fail(ErrorKind::Convergence, "Euler-Maclaurin correction series failed to converge");
}

}  // namespace detail

inline cplx hurwitz_zeta(const cplx& s, const cplx& a, const HurwitzOptions& opt = {}) {
  if (std::abs(s - 1.0) < opt.pole_eps) fail(ErrorKind::Pole, "Hurwitz zeta has a pole at s = 1");
  return detail::hurwitz_em(s, a, false, opt).first;
}

inline double hurwitz_zeta(double s, double a, const HurwitzOptions& opt = {}) {
  return hurwitz_zeta(cplx(s), cplx(a), opt).real();
}

// d/ds zeta(s,a) at arbitrary s away from the pole.
inline cplx hurwitz_zeta_sderiv(const cplx& s, const cplx& a, const HurwitzOptions& opt = {}) {
  if (std::abs(s - 1.0) < opt.pole_eps) fail(ErrorKind::Pole, "Hurwitz zeta has a pole at s = 1");
  return detail::hurwitz_em(s, a, true, opt).second;
}

inline cplx hurwitz_zeta_sderiv0(const cplx& a, const HurwitzOptions& opt = {}) {
  return hurwitz_zeta_sderiv(cplx(0.0), a, opt);
}

inline double hurwitz_zeta_sderiv0(double a, const HurwitzOptions& opt = {}) {
  return hurwitz_zeta_sderiv0(cplx(a), opt).real();
}

inline double riemann_zeta(double s) { return hurwitz_zeta(s, 1.0); }
inline double riemann_zeta_deriv(double s) { return hurwitz_zeta_sderiv(cplx(s), cplx(1.0)).real(); }

// psi(x) by upward recurrence to |x| >= 20, then the asymptotic series.
inline cplx digamma(cplx x) {
  double xr = x.real();
  if (x.imag() == 0.0 && xr <= 0.0 && xr == std::floor(xr))
    fail(ErrorKind::Pole, "digamma has a pole at nonpositive integers");
  KahanSum<cplx> shift;
  while (std::abs(x) < 20.0 || x.real() < 10.0) {
    shift.add(1.0 / x);
    x += 1.0;
  }
  const auto& bt = bernoulli_table();
  cplx inv = 1.0 / x;
  cplx inv2 = inv * inv;
  cplx r = std::log(x) - 0.5 * inv;
  cplx p = inv2;
  for (int k = 1; k <= 12; ++k) {
    r -= bt.values[static_cast<size_t>(2 * k)] / (2.0 * k) * p;
    p *= inv2;
  }
  return r - shift.value();
}

inline double digamma(double x) { return digamma(cplx(x)).real(); }

enum class Kernel { Even, Odd };

inline const char* kernel_name(Kernel k) { return k == Kernel::Even ? "even" : "odd"; }

namespace detail {

// Numerators N_n with theta^n applied to the base kernel equal to N_n / (1 - w)^{n+1}.
// Even kernel: w = x = e^{-2 tau}, theta = x d/dx, base x/(1-x).
// Odd kernel: w = y^2, y = e^{-tau}, theta = y d/dy, base y/(1-y^2).
inline const std::vector<std::vector<double>>& kernel_numerators(Kernel k) {
  static const auto build = [](Kernel kind) {
    constexpr int kMax = 32;
    std::vector<std::vector<double>> out;
    std::vector<BigInt> N{0, 1};  // N_0 = x (resp. y)
    for (int n = 0; n <= kMax; ++n) {
      std::vector<double> d;
      for (auto& c : N) d.push_back(c.convert_to<double>());
      out.push_back(d);
      // derivative
      std::vector<BigInt> Np(N.size() > 1 ? N.size() - 1 : 1, 0);
      for (size_t i = 1; i < N.size(); ++i) Np[i - 1] = N[i] * static_cast<long>(i);
      std::vector<BigInt> next(N.size() + 2, 0);
      if (kind == Kernel::Even) {
        // N' <- x(1-x) N' + (n+1) x N
        for (size_t i = 0; i < Np.size(); ++i) {
          next[i + 1] += Np[i];
          next[i + 2] -= Np[i];
        }
        for (size_t i = 0; i < N.size(); ++i) next[i + 1] += N[i] * (n + 1);
      } else {
        // N' <- y(1-y^2) N' + 2(n+1) y^2 N
        for (size_t i = 0; i < Np.size(); ++i) {
          next[i + 1] += Np[i];
          next[i + 3] -= Np[i];
        }
        for (size_t i = 0; i < N.size(); ++i) next[i + 2] += N[i] * 2 * (n + 1);
      }
      while (next.size() > 1 && next.back() == 0) next.pop_back();
      N = next;
    }
    return out;
  };
  static const auto even = build(Kernel::Even);
  static const auto odd = build(Kernel::Odd);
  return k == Kernel::Even ? even : odd;
}

}  // namespace detail

struct DiffopOptions {
  int max_degree = 32;
  double pole_eps = 1e-12;
};

// Q(-d/dtau) applied to 1/(e^{2 tau}-1) (even) or 1/(e^tau - e^{-tau}) (odd).
inline cplx poly_apply_diffop(const PolyQ& Q, Kernel kernel, const cplx& tau, const DiffopOptions& opt = {}) {
  if (Q.degree() > opt.max_degree)
    fail(ErrorKind::Overflow, "polynomial degree exceeds the configured maximum for the differential operator");
  if (Q.degree() > 32) fail(ErrorKind::Overflow, "kernel derivative table holds degrees up to 32");
  const auto& table = detail::kernel_numerators(kernel);
  cplx base = (kernel == Kernel::Even) ? std::exp(-2.0 * tau) : std::exp(-tau);
  cplx w = (kernel == Kernel::Even) ? base : base * base;
  cplx one_minus = 1.0 - w;
  if (std::abs(one_minus) < opt.pole_eps) fail(ErrorKind::Pole, "kernel pole at tau in pi*i*Z");
  double scale = (kernel == Kernel::Even) ? 2.0 : 1.0;
  cplx total(0.0);
  cplx denom_pow = one_minus;  // (1-w)^{n+1}
  double sc = 1.0;
  for (int n = 0; n <= Q.degree(); ++n) {
    double qn = to_double(Q.coeff(n));
    if (qn != 0.0) {
      const auto& num = table[static_cast<size_t>(n)];
      cplx acc(0.0);
      for (auto it = num.rbegin(); it != num.rend(); ++it) acc = acc * base + *it;
      total += qn * sc * acc / denom_pow;
    }
    denom_pow *= one_minus;
    sc *= scale;
  }
  return total;
}

}  // namespace zetaforge
