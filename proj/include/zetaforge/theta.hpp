#pragma once
// Dual theta series, their continuation and poles, the tanh finite-part
// identity, and the argument-principle representation of theta series.
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "errors.hpp"
#include "geodesics.hpp"
#include "polyq.hpp"
#include "specfun.hpp"

namespace zetaforge {

// Theta_d(tau) = sum_{n>=1} Q(2n) e^{-2 tau n} (even Q) or sum Q(2n-1) e^{-(2n-1) tau} (odd Q),
// continued as Q(-d/dtau) applied to the geometric kernel.
inline cplx theta_dual(const PolyQ& Q, const cplx& tau) {
  if (Q.parity() == Parity::None) fail(ErrorKind::Domain, "theta_dual needs a polynomial with declared parity");
  return poly_apply_diffop(Q, Q.parity() == Parity::Even ? Kernel::Even : Kernel::Odd, tau);
}

// The defining series, valid for Re(tau) > 0.
inline cplx theta_dual_series(const PolyQ& Q, const cplx& tau, double tol = 1e-18) {
  if (Q.parity() == Parity::None) fail(ErrorKind::Domain, "theta_dual needs a polynomial with declared parity");
  if (!(tau.real() > 0.0)) fail(ErrorKind::Domain, "the series converges only for Re(tau) > 0");
  const bool even = Q.parity() == Parity::Even;
  KahanSum<cplx> acc;
  for (long long n = 1;; ++n) {
    double x = even ? 2.0 * double(n) : 2.0 * double(n) - 1.0;
    cplx term = Q.eval_num(x) * std::exp(-tau * x);
    acc.add(term);
    if (n > 5 && std::abs(term) < tol * std::max(1.0, std::abs(acc.value()))) break;
    if (n > 100000000) fail(ErrorKind::Convergence, "theta series did not converge");
  }
  return acc.value();
}

// sum_{j>=0} (2j+1) e^{-tau (j+1/2)} = cosh(tau/2) / (2 sinh^2(tau/2))
inline cplx theta_sl2_dual(const cplx& tau) {
  cplx sh = std::sinh(tau / 2.0);
  if (std::abs(sh) < 1e-300) fail(ErrorKind::Pole, "pole of the dual theta function");
  return std::cosh(tau / 2.0) / (2.0 * sh * sh);
}

inline cplx theta_sl2_series(const cplx& tau, double tol = 1e-18) {
  if (!(tau.real() > 0.0)) fail(ErrorKind::Domain, "the series converges only for Re(tau) > 0");
  KahanSum<cplx> acc;
  for (long long j = 0;; ++j) {
    cplx term = double(2 * j + 1) * std::exp(-tau * (double(j) + 0.5));
    acc.add(term);
    if (j > 5 && std::abs(term) < tol * std::max(1.0, std::abs(acc.value()))) break;
  }
  return acc.value();
}

// ------------------------------------------------------------ pole discovery

struct Region {
  double re_min, re_max, im_min, im_max;
};

struct LaurentFit {
  cplx center;
  int order = 0;
  std::vector<cplx> coefficients;  // c_{-order}, ..., c_{-1}, c_0, ..., c_{K}
  double residual = 0.0;
  double radius = 0.0;
  bool matches_claim = false;
};

struct PoleReport {
  std::vector<LaurentFit> poles;
  std::vector<cplx> claimed;          // claimed pole locations inside the region
  int claimed_order = 0;
  std::vector<cplx> claimed_missing;  // claimed points with no pole found
  std::vector<cplx> unclaimed;        // poles found off the claimed set
  bool agrees = true;
};

namespace detail {

inline cplx safe_eval(const std::function<cplx(cplx)>& f, const cplx& z, bool& is_pole) {
  is_pole = false;
  try {
    cplx v = f(z);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) is_pole = true;
    return v;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Pole) throw;
    is_pole = true;
    return cplx(std::numeric_limits<double>::infinity());
  }
}

// zeros minus poles inside |z - c| = r, from the unwrapped phase
inline int winding(const std::function<cplx(cplx)>& f, const cplx& c, double r, int samples = 256) {
  double total = 0.0;
  bool pole;
  cplx prev = safe_eval(f, c + r, pole);
  for (int j = 1; j <= samples; ++j) {
    cplx cur = safe_eval(f, c + std::polar(r, 2.0 * kPi * j / samples), pole);
    if (pole) fail(ErrorKind::Convergence, "pole on the winding circle");
    total += std::arg(cur / prev);
    prev = cur;
  }
  return static_cast<int>(std::lround(total / (2.0 * kPi)));
}

// Laurent coefficients c_n (n = -p..K) on |z - c| = r by the trapezoid rule.
inline std::vector<cplx> laurent_coeffs(const std::function<cplx(cplx)>& f, const cplx& c, double r, int p, int K, int N = 128) {
  std::vector<cplx> vals(N);
  bool pole;
  for (int j = 0; j < N; ++j) vals[j] = safe_eval(f, c + std::polar(r, 2.0 * kPi * j / N), pole);
  std::vector<cplx> out;
  for (int n = -p; n <= K; ++n) {
    cplx acc(0.0);
    for (int j = 0; j < N; ++j) acc += vals[j] * std::polar(std::pow(r, -n), -2.0 * kPi * n * j / N);
    out.push_back(acc / double(N));
  }
  return out;
}

}  // namespace detail

// Poles of f in the region, located from 1/f on a grid, refined by Newton steps
// adjusted for the multiplicity read from the winding number, then Laurent-fitted.
inline PoleReport find_poles(const std::function<cplx(cplx)>& f, const Region& R, int grid = 81) {
  if (!(R.re_max > R.re_min && R.im_max > R.im_min)) fail(ErrorKind::Domain, "empty region");
  const double hx = (R.re_max - R.re_min) / (grid - 1), hy = (R.im_max - R.im_min) / (grid - 1);
  const double h = std::min(hx, hy);
  std::vector<double> g(static_cast<size_t>(grid * grid));
  auto at = [&](int i, int j) -> double& { return g[static_cast<size_t>(i * grid + j)]; };
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j) {
      bool pole;
      cplx v = detail::safe_eval(f, cplx(R.re_min + i * hx, R.im_min + j * hy), pole);
      at(i, j) = pole ? 0.0 : 1.0 / std::abs(v);
    }
  std::vector<double> sorted = g;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<long>(sorted.size() / 2), sorted.end());
  const double median = sorted[sorted.size() / 2];
  std::vector<cplx> cands;
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j) {
      double v = at(i, j);
      if (v > 0.5 * median) continue;
      bool minimum = true;
      for (int di = -1; di <= 1 && minimum; ++di)
        for (int dj = -1; dj <= 1; ++dj) {
          int a = i + di, b = j + dj;
          if ((di || dj) && a >= 0 && b >= 0 && a < grid && b < grid && at(a, b) < v) {
            minimum = false;
            break;
          }
        }
      if (minimum) cands.emplace_back(R.re_min + i * hx, R.im_min + j * hy);
    }
  PoleReport rep;
  auto inv = [&](const cplx& z) {
    bool pole;
    cplx v = detail::safe_eval(f, z, pole);
    return pole ? cplx(0.0) : 1.0 / v;
  };
  for (cplx z : cands) {
    const double rw = 0.75 * std::max(hx, hy);
    int p = -detail::winding(f, z, rw);
    if (p <= 0) continue;
    z += cplx(1e-3 * h, 7e-4 * h);
    for (int it = 0; it < 60; ++it) {
      cplx gz = inv(z);
      if (gz == cplx(0.0)) break;
      double e = 1e-4 * h;
      cplx d = (inv(z + e) - inv(z - e)) / (2.0 * e);
      if (d == cplx(0.0)) break;
      cplx step = double(p) * gz / d;
      z -= step;
      if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    bool dup = false;
    for (auto& q : rep.poles)
      if (std::abs(q.center - z) < 1e-6) dup = true;
    if (dup) continue;
    if (z.real() < R.re_min - h || z.real() > R.re_max + h || z.imag() < R.im_min - h || z.imag() > R.im_max + h) continue;
    LaurentFit L;
    L.center = z;
    L.radius = rw;
    L.order = -detail::winding(f, z, 0.5 * rw);
    const int K = 6;
    for (int it = 0; it < 4 && L.order > 0; ++it) {
      // an off-center pole leaks into c_{-p-1} = p delta c_{-p}
      auto c = detail::laurent_coeffs(f, L.center, rw, L.order + 1, -L.order);
      if (c[1] == cplx(0.0)) break;
      cplx delta = c[0] / (double(L.order) * c[1]);
      L.center += delta;
      if (std::abs(delta) < 1e-15) break;
    }
    z = L.center;
    L.coefficients = detail::laurent_coeffs(f, z, rw, L.order + 2, K);
    // drop the two extra principal slots used as a diagnostic of centering
    double extra = std::abs(L.coefficients[0]) + std::abs(L.coefficients[1]);
    L.coefficients.erase(L.coefficients.begin(), L.coefficients.begin() + 2);
    // residual on a smaller circle
    double worst = 0.0;
    for (int j = 0; j < 16; ++j) {
      cplx w = std::polar(0.5 * rw, 2.0 * kPi * (j + 0.5) / 16);
      cplx model(0.0);
      for (int n = -L.order; n <= K; ++n) model += L.coefficients[static_cast<size_t>(n + L.order)] * std::pow(w, n);
      bool pole;
      cplx truth = detail::safe_eval(f, z + w, pole);
      worst = std::max(worst, std::abs(model - truth) / std::max(1.0, std::abs(truth)));
    }
    L.residual = worst + extra;
    rep.poles.push_back(L);
  }
  std::sort(rep.poles.begin(), rep.poles.end(), [](const LaurentFit& a, const LaurentFit& b) {
    if (a.center.imag() != b.center.imag()) return a.center.imag() < b.center.imag();
    return a.center.real() < b.center.real();
  });
  return rep;
}

// Compares discovered poles with a claimed lattice {spacing * i * k} of a fixed order.
inline void compare_with_claim(PoleReport& rep, const Region& R, double spacing, int claimed_order) {
  rep.claimed_order = claimed_order;
  rep.claimed.clear();
  if (R.re_min <= 0.0 && R.re_max >= 0.0)
    for (long long k = static_cast<long long>(std::ceil(R.im_min / spacing)); double(k) * spacing <= R.im_max; ++k)
      rep.claimed.emplace_back(0.0, double(k) * spacing);
  rep.agrees = true;
  for (auto& p : rep.poles) {
    p.matches_claim = false;
    for (auto& c : rep.claimed)
      if (std::abs(p.center - c) < 1e-6 && p.order == claimed_order) p.matches_claim = true;
    if (!p.matches_claim) {
      rep.unclaimed.push_back(p.center);
      rep.agrees = false;
    }
  }
  for (auto& c : rep.claimed) {
    bool found = false;
    for (auto& p : rep.poles)
      if (std::abs(p.center - c) < 1e-6) found = true;
    if (!found) {
      rep.claimed_missing.push_back(c);
      rep.agrees = false;
    }
  }
}

// Poles of Theta_d for Q, compared with the claim: order deg Q + 1 at tau = pi i k.
inline PoleReport theta_dual_poles(const PolyQ& Q, const Region& R, int grid = 81) {
  auto rep = find_poles([&](cplx t) { return theta_dual(Q, t); }, R, grid);
  compare_with_claim(rep, R, kPi, Q.degree() + 1);
  return rep;
}

// Poles of sum (2j+1) e^{-tau (j+1/2)}, compared with the claim: order 2 at tau = pi i k.
inline PoleReport theta_sl2_poles(const Region& R, int grid = 81) {
  auto rep = find_poles([](cplx t) { return theta_sl2_dual(t); }, R, grid);
  compare_with_claim(rep, R, kPi, 2);
  return rep;
}

// ------------------------------------------------------------ tanh finite part

struct FinitePart {
  cplx lhs, rhs;
  double discrepancy;
};

// Q(-it) times the finite part of the Hurwitz-pair difference over the odd
// integers, sum_{n>=0} [1/(2n+1-it) - 1/(2n+1+it)] = (psi((1+it)/2) - psi((1-it)/2))/2,
// against (pi/2) i Q(-it) tanh(pi t/2).
inline FinitePart finite_part_identity(const PolyQ& Q, double t) {
  if (Q.detected_parity() == Parity::Even && !Q.is_zero()) fail(ErrorKind::Domain, "finite_part_identity needs an odd polynomial");
  if (!(t > 0.0)) fail(ErrorKind::Domain, "t must be positive");
  const cplx I(0.0, 1.0);
  cplx q = Q.eval_num(cplx(0.0, -t));
  cplx diff = 0.5 * (digamma((1.0 + I * t) / 2.0) - digamma((1.0 - I * t) / 2.0));
  FinitePart r;
  r.lhs = q * diff;
  r.rhs = 0.5 * kPi * I * q * std::tanh(0.5 * kPi * t);
  r.discrepancy = std::abs(r.lhs - r.rhs);
  return r;
}

// ------------------------------------------------------------ argument principle

struct ContourResult {
  double value;
  double imag_residue;  // imaginary part left by the quadrature (should vanish)
  double abs_error;
};

struct ContourOptions {
  double half_width = 1.0;              // the contour runs up the lines Re z = +-half_width
  std::vector<double> odd_poly;         // optional extra term sum_k c_k z^{2k+1} added to F'/F
};

// Theta(tau) = n0 + (1/2 pi i) int_C e^{i tau z} (F'/F(z) - 2 n0 / z) dz with
// F(z) = prod (a_j^2 + z^2); C comes down Re z = -X, crosses on the real
// segment (passing through z = 0, where the integrand is regular), and goes up
// Re z = X.
inline ContourResult contour_theta(const std::vector<double>& a, double tau, const ContourOptions& opt = {}) {
  if (!(tau > 0.0)) fail(ErrorKind::Domain, "tau must be positive");
  long long n0 = 0;
  for (double x : a) {
    if (!std::isfinite(x) || x < 0.0) fail(ErrorKind::Domain, "spectrum entries must be finite and nonnegative");
    if (x == 0.0) ++n0;
  }
  const double X = opt.half_width;
  if (!(X > 0.0)) fail(ErrorKind::Domain, "contour half width must be positive");
  auto g = [&](const cplx& z) {
    cplx acc(0.0);
    for (double x : a)
      if (x > 0.0) acc += 2.0 * z / (z * z + x * x);
    cplx z2 = z * z, zp = z;
    for (double c : opt.odd_poly) {
      acc += c * zp;
      zp *= z2;
    }
    return acc;
  };
  const cplx I(0.0, 1.0);
  boost::math::quadrature::gauss_kronrod<double, 61> gk;
  boost::math::quadrature::exp_sinh<double> es;
  double err_total = 0.0;
  auto real_part_integral = [&](auto&& h, bool imag) {
    double err = 0.0;
    double v = gk.integrate([&](double x) { cplx w = h(x); return imag ? w.imag() : w.real(); }, -X, X, 20, 1e-14, &err);
    err_total += err;
    return v;
  };
  auto seg = [&](double x) { return std::exp(I * tau * x) * g(cplx(x)); };
  cplx segment(real_part_integral(seg, false), real_part_integral(seg, true));
  auto ray = [&](double sgn, bool imag) {
    double err = 0.0;
    auto h = [&](double y) {
      double damp = std::exp(-tau * y);
      if (damp == 0.0) return 0.0;
      cplx z(sgn * X, y);
      cplx w = damp * std::polar(1.0, tau * sgn * X) * g(z) * I;
      return imag ? w.imag() : w.real();
    };
    double v = es.integrate(h, 0.0, std::numeric_limits<double>::infinity(), 1e-14, &err);
    err_total += err;
    return v;
  };
  cplx up(ray(1.0, false), ray(1.0, true));
  cplx down(ray(-1.0, false), ray(-1.0, true));
  cplx total = (segment + up - down) / (2.0 * kPi * I);
  return {double(n0) + total.real(), total.imag(), err_total / (2.0 * kPi)};
}

// ------------------------------------------------------------ f identity

struct FIdentityReport {
  std::vector<double> tau;
  std::vector<double> f_pos, f_neg, sum;  // f(tau), f(-tau), f(tau) + f(-tau)
  std::vector<double> derivative_error;   // |f'(tau) - (2 n0/pi) sin(a tau)/tau|
  double f_zero = 0.0;
  double f_far = 0.0;                     // f at tau = 200
  double max_sum_error = 0.0;
  double max_derivative_error = 0.0;
};

// f(tau) = -(1/2 pi i) int_{a - i inf}^{a} e^{-i tau z} 2n0/z dz - (1/2 pi i) int_a^{a + i inf} e^{i tau z} 2n0/z dz
// for tau > 0, by quadrature along both rays.
inline double f_rays(double a, long long n0, double tau) {
  if (!(tau > 0.0)) fail(ErrorKind::Domain, "the ray integrals converge only for tau > 0");
  if (n0 == 0) return 0.0;
  const cplx I(0.0, 1.0);
  boost::math::quadrature::exp_sinh<double> es;
  auto integ = [&](auto&& h) {
    double re = es.integrate([&](double y) { return h(y).real(); }, 0.0, std::numeric_limits<double>::infinity(), 1e-15);
    double im = es.integrate([&](double y) { return h(y).imag(); }, 0.0, std::numeric_limits<double>::infinity(), 1e-15);
    return cplx(re, im);
  };
  // z = a - i y, from y = inf to 0: dz = -i dy, orientation flips the sign
  cplx lower = integ([&](double y) {
    double damp = std::exp(-tau * y);
    if (damp == 0.0) return cplx(0.0);
    return damp * std::polar(1.0, -tau * a) * (2.0 * double(n0)) / cplx(a, -y) * I;
  });
  cplx upper = integ([&](double y) {
    double damp = std::exp(-tau * y);
    if (damp == 0.0) return cplx(0.0);
    return damp * std::polar(1.0, tau * a) * (2.0 * double(n0)) / cplx(a, y) * I;
  });
  cplx f = -(lower + upper) / (2.0 * kPi * I);
  return f.real();
}

// f on the whole line: the ray quadrature for tau > 0, continued to tau <= 0
// by integrating the entire derivative (2 n0/pi) sin(a u)/u from tau to 1.
inline double f_value(double a, long long n0, double tau) {
  if (tau > 0.0) return f_rays(a, n0, tau);
  boost::math::quadrature::gauss_kronrod<double, 61> gk;
  auto d = [&](double u) { return u == 0.0 ? 2.0 * double(n0) * a / kPi : 2.0 * double(n0) / kPi * std::sin(a * u) / u; };
  double seg = gk.integrate(d, tau, 1.0, 20, 1e-15);
  return f_rays(a, n0, 1.0) - seg;
}

inline FIdentityReport f_identity(double a, long long n0, const std::vector<double>& tau_grid) {
  if (!(a > 0.0)) fail(ErrorKind::Domain, "a must be positive");
  FIdentityReport r;
  for (double t : tau_grid) {
    if (!(t > 0.0)) fail(ErrorKind::Domain, "tau grid must be positive");
    double fp = f_value(a, n0, t), fn = f_value(a, n0, -t);
    r.tau.push_back(t);
    r.f_pos.push_back(fp);
    r.f_neg.push_back(fn);
    r.sum.push_back(fp + fn);
    r.max_sum_error = std::max(r.max_sum_error, std::abs(fp + fn + 2.0 * double(n0)));
    // five-point derivative of the ray quadrature
    double h = std::min(1e-2, 0.25 * t);
    double d = (-f_rays(a, n0, t + 2 * h) + 8 * f_rays(a, n0, t + h) - 8 * f_rays(a, n0, t - h) + f_rays(a, n0, t - 2 * h)) / (12 * h);
    double exact = 2.0 * double(n0) / kPi * std::sin(a * t) / t;
    r.derivative_error.push_back(std::abs(d - exact));
    r.max_derivative_error = std::max(r.max_derivative_error, r.derivative_error.back());
  }
  r.f_zero = f_value(a, n0, 0.0);
  r.f_far = f_rays(a, n0, 200.0);
  return r;
}

// ------------------------------------------------------------ residues

// -(1/2 pi) l tr phi tr sigma / (mu det(1 - gamma^{-1} | n)) with the surface
// denominator 1 - e^{-l}; the class weights multiply as in the Euler products.
inline double residue_prediction(const LengthEntry& e) {
  double denom = -std::expm1(-e.length);
  return -(1.0 / (2.0 * kPi)) * e.length * e.phi_trace * e.sigma_trace * e.mult_weight * double(e.class_weight) / (e.mu() * denom);
}

}  // namespace zetaforge
