#pragma once
// Geometric zeta functions over length spectra and the dual-side pieces of the
// Selberg determinant formula.
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "detreg.hpp"
#include "divisor.hpp"
#include "errors.hpp"
#include "geodesics.hpp"
#include "polyq.hpp"
#include "specfun.hpp"

namespace zetaforge {

struct EulerConfig {
  double tol = 1e-17;           // per-term cutoff relative to 1
  int k_max = 100000;           // iterate cutoff (class sums)
  int n_max = 100000;           // symmetric-power cutoff (double products)
  std::optional<double> abscissa;  // user-declared convergence abscissa
  bool require_complete = false;   // turn the missing-class estimate into an error
  double max_tail = 1e-12;
};

struct EulerResult {
  cplx log_value{0.0};
  cplx value{1.0};
  double tail_bound = 0.0;           // rigorous bound on the dropped N / k terms
  double class_tail_estimate = 0.0;  // classes beyond the enumeration cutoff (estimate)
  std::string method;
};

namespace detail {

inline cplx log1m(const cplx& x) {
  if (std::abs(x) < 1e-3) {
    cplx acc(0.0), p = x;
    for (int k = 1; k < 12; ++k, p *= x) acc -= p / double(k);
    return acc;
  }
  return std::log(1.0 - x);
}

struct Iterate {
  double weight;
  cplx chi;
};

struct Primitive {
  double l0;
  double weight;
  cplx chi;
  std::map<int, Iterate> listed;  // iterates present in the spectrum, keyed by power
};

inline bool is_primitive_entry(const LengthEntry& e) { return std::abs(e.mu() - 1.0) <= 1e-9; }

inline std::vector<Primitive> primitives_of(const LengthSpectrum& S) {
  std::vector<Primitive> P;
  std::vector<const LengthEntry*> roots;
  for (auto& e : S.entries)
    if (is_primitive_entry(e)) {
      P.push_back({e.primitive_length, e.mult_weight * double(e.class_weight), cplx(e.phi_trace * e.sigma_trace), {}});
      roots.push_back(&e);
    }
  for (auto& e : S.entries) {
    if (is_primitive_entry(e)) continue;
    int k = static_cast<int>(std::lround(e.mu()));
    bool placed = false;
    for (size_t i = 0; i < P.size() && !placed; ++i) {
      if (std::abs(P[i].l0 - e.primitive_length) > 1e-9 * std::max(1.0, P[i].l0)) continue;
      if (P[i].listed.count(k)) continue;
      if (!e.word.empty() && !roots[i]->word.empty()) {
        std::string pw;
        for (int j = 0; j < k; ++j) pw += roots[i]->word;
        if (pw != e.word) continue;
      }
      P[i].listed[k] = {e.mult_weight * double(e.class_weight), cplx(e.phi_trace * e.sigma_trace)};
      placed = true;
    }
    if (!placed) fail(ErrorKind::Schema, "non-primitive class of length " + std::to_string(e.length) + " has no primitive root in the spectrum");
  }
  return P;
}

inline void check_convergence(const std::vector<Primitive>& P, const cplx& s, const EulerConfig& cfg) {
  if (cfg.abscissa && !(s.real() > *cfg.abscissa))
    fail(ErrorKind::Convergence, "Re(s) = " + std::to_string(s.real()) + " is not above the declared abscissa");
  for (auto& p : P)
    if (!(std::abs(p.chi) * std::exp(-s.real() * p.l0) < 1.0))
      fail(ErrorKind::Convergence, "Euler factor does not converge at this s (|chi| e^{-Re(s) l} >= 1)");
}

// Missing-class estimate for a spectrum enumerated up to length L: the growth
// rate h is read off the counts at L/2 and L, and the unseen classes are
// bounded by N(L) h e^{-(sigma - h) L} / (sigma - h).
inline double class_tail(const LengthSpectrum& S, double sigma, const EulerConfig& cfg) {
  double L = S.complete_to_length;
  if (!std::isfinite(L) || S.entries.empty()) return 0.0;
  double n_full = 0, n_half = 0, wmax = 0;
  for (auto& e : S.entries) {
    n_full += 1;
    if (e.length <= L / 2) n_half += 1;
    wmax = std::max(wmax, std::abs(e.mult_weight * double(e.class_weight) * e.phi_trace * e.sigma_trace));
  }
  double h = n_half > 0 ? std::log(n_full / n_half) / (L / 2) : 1.0;
  h = std::max(h, 1e-3);
  if (!(sigma > h)) {
    if (cfg.require_complete) fail(ErrorKind::Convergence, "Re(s) is below the fitted growth rate of the spectrum");
    return std::numeric_limits<double>::infinity();
  }
  double est = wmax * n_full * h * std::exp(-(sigma - h) * L) / (sigma - h);
  if (cfg.require_complete && est > cfg.max_tail)
    fail(ErrorKind::Truncation, "length cutoff is insufficient for the requested accuracy (estimated tail " + std::to_string(est) + ")");
  return est;
}

}  // namespace detail

// log Z(s) = sum_c w_c sum_{N>=0} log(1 - chi_c e^{-(s+N) l_c}) over primitive classes.
inline EulerResult log_selberg_Z_product(const LengthSpectrum& S, const cplx& s, const EulerConfig& cfg = {}) {
  auto P = detail::primitives_of(S);
  detail::check_convergence(P, s, cfg);
  EulerResult r;
  r.method = "double product";
  KahanSum<cplx> acc;
  for (auto& p : P) {
    const double q = std::exp(-p.l0);
    for (int N = 0;; ++N) {
      cplx x = p.chi * std::exp(-(s + double(N)) * p.l0);
      acc.add(p.weight * detail::log1m(x));
      double ax = std::abs(x);
      if (ax < cfg.tol || N >= cfg.n_max) {
        double nx = ax * q;
        r.tail_bound += std::abs(p.weight) * nx / ((1.0 - q) * (1.0 - nx));
        break;
      }
    }
  }
  r.log_value = acc.value();
  r.class_tail_estimate = detail::class_tail(S, s.real(), cfg);
  r.value = std::exp(r.log_value);
  return r;
}

// log Z(s) = -sum_gamma w_gamma chi_gamma e^{-s l_gamma} / (mu_gamma (1 - e^{-l_gamma})),
// listed iterates with their own weights, the rest generated as chi^k.
inline EulerResult log_selberg_Z_classes(const LengthSpectrum& S, const cplx& s, const EulerConfig& cfg = {}) {
  auto P = detail::primitives_of(S);
  detail::check_convergence(P, s, cfg);
  EulerResult r;
  r.method = "class sum";
  KahanSum<cplx> acc;
  for (auto& p : P) {
    const double base = std::abs(p.chi) * std::exp(-s.real() * p.l0);
    for (int k = 1;; ++k) {
      detail::Iterate it{p.weight, std::pow(p.chi, k)};
      if (auto f = p.listed.find(k); f != p.listed.end()) it = f->second;
      double lk = double(k) * p.l0;
      cplx term = it.weight * it.chi * std::exp(-s * lk) / (double(k) * (-std::expm1(-lk)));
      acc.add(-term);
      double bk = std::pow(base, k);
      if ((bk < cfg.tol && k > (p.listed.empty() ? 0 : p.listed.rbegin()->first)) || k >= cfg.k_max) {
        double nb = bk * base;
        r.tail_bound += std::abs(p.weight) * nb / (double(k + 1) * (-std::expm1(-p.l0)) * (1.0 - base));
        break;
      }
    }
  }
  r.log_value = acc.value();
  r.class_tail_estimate = detail::class_tail(S, s.real(), cfg);
  r.value = std::exp(r.log_value);
  return r;
}

inline EulerResult log_selberg_Z(const LengthSpectrum& S, const cplx& s, const EulerConfig& cfg = {}) {
  return log_selberg_Z_classes(S, s, cfg);
}

struct EulerAgreement {
  EulerResult product, classes;
  double discrepancy;
};

inline EulerAgreement selberg_forms(const LengthSpectrum& S, const cplx& s, const EulerConfig& cfg = {}) {
  auto a = log_selberg_Z_product(S, s, cfg);
  auto b = log_selberg_Z_classes(S, s, cfg);
  return {a, b, std::abs(a.log_value - b.log_value)};
}

inline EulerResult log_ruelle_R(const LengthSpectrum& S, const cplx& s, const EulerConfig& cfg = {}) {
  auto P = detail::primitives_of(S);
  detail::check_convergence(P, s, cfg);
  EulerResult r;
  r.method = "primitive product";
  KahanSum<cplx> acc;
  for (auto& p : P) acc.add(p.weight * detail::log1m(p.chi * std::exp(-s * p.l0)));
  r.log_value = acc.value();
  r.value = std::exp(r.log_value);
  r.class_tail_estimate = detail::class_tail(S, s.real(), cfg);
  return r;
}

struct RuelleReport {
  cplx R;
  cplx Z_ratio;   // Z(s)/Z(s+1), class-sum form
  double discrepancy;
  double tail_bound;
};

inline RuelleReport ruelle_R(const LengthSpectrum& S, const cplx& s, const EulerConfig& cfg = {}) {
  auto R = log_ruelle_R(S, s, cfg);
  auto z0 = log_selberg_Z_classes(S, s, cfg);
  auto z1 = log_selberg_Z_classes(S, s + 1.0, cfg);
  cplx ratio = std::exp(z0.log_value - z1.log_value);
  return {R.value, ratio, std::abs(R.value - ratio), z0.tail_bound + z1.tail_bound};
}

// Per primitive class: the unit parts of the eigenvalues of the class on n1
// (weight e^{-l}) and n2 (weight e^{-2l}).
struct GradedAction {
  std::vector<std::vector<cplx>> n1, n2;
};

struct FactorizationReport {
  cplx lhs, rhs;
  double discrepancy;
};

namespace detail {

// elementary symmetric polynomials e_0..e_n
inline std::vector<cplx> elementary(const std::vector<cplx>& x) {
  std::vector<cplx> e(x.size() + 1, cplx(0.0));
  e[0] = 1.0;
  for (size_t i = 0; i < x.size(); ++i)
    for (size_t j = i + 1; j-- > 0;) e[j + 1] += e[j] * x[i];
  return e;
}

}  // namespace detail

// R(s) = prod_{l,k} Z_{l,k}(s + l + 2k)^{(-1)^{l+k}}, with Z_{l,k} the class sum
// weighted by tr(wedge^l n1 (x) wedge^k n2) over det(1 - gamma^{-1} | n).
inline FactorizationReport ruelle_factorization(const LengthSpectrum& S, const GradedAction& act, const cplx& s,
                                                const EulerConfig& cfg = {}) {
  auto P = detail::primitives_of(S);
  if (act.n1.size() != P.size() || act.n2.size() != P.size())
    fail(ErrorKind::Domain, "missing grading data: one n1/n2 eigenvalue list per primitive class is required");
  const size_t d1 = P.empty() ? 0 : act.n1[0].size(), d2 = P.empty() ? 0 : act.n2[0].size();
  for (size_t i = 0; i < P.size(); ++i)
    if (act.n1[i].size() != d1 || act.n2[i].size() != d2) fail(ErrorKind::Domain, "inconsistent n1/n2 dimensions across classes");
  detail::check_convergence(P, s, cfg);
  KahanSum<cplx> lhs;
  for (auto& p : P) lhs.add(p.weight * detail::log1m(p.chi * std::exp(-s * p.l0)));
  KahanSum<cplx> rhs;
  for (size_t i = 0; i < P.size(); ++i) {
    auto& p = P[i];
    const double base = std::abs(p.chi) * std::exp(-s.real() * p.l0);
    for (int j = 1; j <= cfg.k_max; ++j) {
      std::vector<cplx> u, v;
      for (auto x : act.n1[i]) u.push_back(std::pow(x, j));
      for (auto x : act.n2[i]) v.push_back(std::pow(x, j));
      const double lj = double(j) * p.l0;
      cplx D(1.0);
      for (auto x : u) D *= 1.0 - std::exp(-lj) * x;
      for (auto x : v) D *= 1.0 - std::exp(-2.0 * lj) * x;
      auto e1 = detail::elementary(u), e2 = detail::elementary(v);
      cplx chij = std::pow(p.chi, j);
      for (size_t l = 0; l <= d1; ++l)
        for (size_t k = 0; k <= d2; ++k) {
          double sign = ((l + k) % 2) ? -1.0 : 1.0;
          cplx sh = s + double(l) + 2.0 * double(k);
          // log Z_{l,k}(sh) contribution of gamma = c^j
          cplx term = -p.weight * chij * e1[l] * e2[k] * std::exp(-sh * lj) / (double(j) * D);
          rhs.add(sign * term);
        }
      if (std::pow(base, j) < cfg.tol) break;
    }
  }
  cplx L = std::exp(lhs.value()), R = std::exp(rhs.value());
  return {L, R, std::abs(L - R)};
}

// ------------------------------------------------------------ F and H integrals

struct QuadValue {
  double value;
  double abs_error;
};

namespace detail {

inline QuadValue tanh_coth_integral(int n, int k, double lambda, bool coth) {
  if (k < 1 || n <= k) fail(ErrorKind::Domain, "F/H integrals converge only for n > k >= 1");
  if (!(lambda > 0.0)) fail(ErrorKind::Domain, "lambda must be positive");
  // int_0^inf r^{2k-1}/(r^2+lambda)^n dr = lambda^{k-n} Gamma(k) Gamma(n-k) / (2 Gamma(n))
  double base = std::pow(lambda, double(k - n)) * std::tgamma(double(k)) * std::tgamma(double(n - k)) / (2.0 * std::tgamma(double(n)));
  // tanh(pi r/2) = 1 - 2/(e^{pi r}+1),  coth(pi r/2) = 1 + 2/(e^{pi r}-1)
  auto f = [&](double r) {
    double den = coth ? std::expm1(kPi * r) : std::exp(kPi * r) + 1.0;
    if (coth && r == 0.0) return k == 1 ? 1.0 / (kPi * std::pow(lambda, n)) : 0.0;
    if (!std::isfinite(den)) return 0.0;
    return std::pow(r, 2 * k - 1) / (den * std::pow(r * r + lambda, n));
  };
  boost::math::quadrature::exp_sinh<double> q;
  double err = 0.0;
  double rem = q.integrate(f, 0.0, std::numeric_limits<double>::infinity(), 1e-15, &err);
  double half = base + (coth ? 2.0 : -2.0) * rem;
  double pref = ((n + 1) % 2 ? -1.0 : 1.0) * std::tgamma(double(n)) * 2.0;
  return {pref * half, std::abs(pref) * 2.0 * err + 1e-16 * std::abs(pref * half)};
}

}  // namespace detail

inline QuadValue F_int(int n, int k, double lambda) { return detail::tanh_coth_integral(n, k, lambda, false); }
inline QuadValue H_int(int n, int k, double lambda) { return detail::tanh_coth_integral(n, k, lambda, true); }

// ------------------------------------------------------------ zeta hat, assembly

inline double convergence_abscissa(const SpectralDivisor& d) {
  double a = -std::numeric_limits<double>::infinity();
  for (auto& t : d.tails) a = std::max(a, double(t.poly.degree() + 1) / t.power);
  return a;
}

// (-1)^{n+1} Gamma(n) zeta_{d+a}(n)
inline double zeta_hat(const SpectralDivisor& d, double a, int n) {
  if (n < 1) fail(ErrorKind::Domain, "zeta hat needs n >= 1");
  if (!(double(n) > convergence_abscissa(d)))
    fail(ErrorKind::Convergence, "zeta_{d+a}(n) diverges: n is not above the convergence abscissa " + std::to_string(convergence_abscissa(d)));
  SpectralDivisor sh = shift(d, a);
  double z = zeta_of_divisor(sh, cplx(double(n))).real();
  return ((n + 1) % 2 ? -1.0 : 1.0) * std::tgamma(double(n)) * z;
}

inline cplx det_dual(const SpectralDivisor& d, const cplx& s) { return char_fn(d, s); }

struct AssemblyParams {
  double rho0 = 0.5;
  double c_sigma = -0.25;
  int dim_phi = 1;
  Rational chi_quot = Rational(-1);  // chi(X_Gamma)/chi(X^d)
  int m = 1;
};

struct AssemblyResult {
  cplx log_spectral;   // log det(Delta + s^2 + c_sigma)
  cplx log_dual;       // log det(D_sigma + s)
  double poly;         // P(s^2)
  double exponent;     // 2 (-1)^m dim(phi) chi_quot
  cplx log_Z;          // log Z(rho0 + s)
};

// log Z(rho0 + s) = log det(Delta + s^2 + c) + e (log det(D + s) + P(s^2))
inline AssemblyResult selberg_det_assembly(const SpectralDivisor& eig, const SpectralDivisor& dual, const AssemblyParams& p,
                                           const PolyQ& P, double s) {
  if (!(p.rho0 > 0.0)) fail(ErrorKind::Domain, "rho0 must be positive");
  AssemblyResult r;
  cplx spec = char_fn(eig, cplx(s * s + p.c_sigma));
  cplx dd = char_fn(dual, cplx(s));
  if (spec == cplx(0.0) || dd == cplx(0.0)) fail(ErrorKind::Pole, "assembly evaluated at a zero of a determinant factor");
  r.log_spectral = std::log(spec);
  r.log_dual = std::log(dd);
  r.poly = P.eval_num(s * s);
  r.exponent = 2.0 * (p.m % 2 ? -1.0 : 1.0) * double(p.dim_phi) * to_double(p.chi_quot);
  r.log_Z = r.log_spectral + r.exponent * (r.log_dual + r.poly);
  return r;
}

// ------------------------------------------------------------ P tilde, Q(s)

// P~(a) = 2 pi int_0^a P(iy) dy, stored as pi * over_pi(a)
struct PiPoly {
  PolyQ over_pi;
  double eval(double a) const { return kPi * over_pi.eval_num(a); }
};

inline PiPoly ptilde(const PolyQ& P) {
  if (P.detected_parity() == Parity::Odd || P.parity() == Parity::Odd ||
      (P.parity() == Parity::None && P.detected_parity() == Parity::None && !P.is_zero()))
    fail(ErrorKind::Domain, "ptilde needs an even polynomial");
  std::vector<Rational> c(static_cast<size_t>(std::max(0, P.degree() + 2)), Rational(0));
  for (int j = 0; 2 * j <= P.degree(); ++j) {
    Rational a = P.coeff(2 * j);
    Rational sign = (j % 2) ? Rational(-1) : Rational(1);
    c[static_cast<size_t>(2 * j + 1)] = 2 * sign * a / (2 * j + 1);
  }
  return {PolyQ(c, Parity::Odd)};
}

// Q(s) = sum_{p<n} P~_p(s+p) - P~_p(n-1-s-p)
inline PiPoly q_poly(int n, const std::vector<PolyQ>& P_list) {
  if (n < 1 || static_cast<int>(P_list.size()) != n) fail(ErrorKind::Domain, "q_poly needs exactly n polynomials");
  PolyQ acc;
  for (int p = 0; p < n; ++p) {
    PolyQ t = ptilde(P_list[static_cast<size_t>(p)]).over_pi;
    acc = acc + t.compose_affine(Rational(1), Rational(p)) - t.compose_affine(Rational(-1), Rational(n - 1 - p));
  }
  return {acc.with_parity(acc.detected_parity())};
}

// ------------------------------------------------------------ E(m)

struct EmReport {
  int m = 0;
  std::vector<PolyQ> F, Q, Pl;
  std::vector<Rational> c;
  std::vector<std::vector<Rational>> b;  // b[l][j-1]
  struct Factor {
    int l;
    long long n;
    long long base;     // R_l factor at s = 0
    Rational exponent;  // Q_l(.) * l (-1)^l
  };
  std::vector<Factor> factors;
  std::map<long long, Rational> prime_powers;
  bool exponents_integral = true;
  Rational N;        // exponential part
  double log_value = 0.0;
  double value = 0.0;

  std::string exact_string() const {
    std::string s;
    for (auto& [p, e] : prime_powers) {
      if (e == 0) continue;
      if (!s.empty()) s += " * ";
      s += std::to_string(p) + "^(" + rational_string(e) + ")";
    }
    if (!s.empty()) s += " * ";
    return s + "exp(" + rational_string(N) + ")";
  }
};

namespace detail {

inline void factor_into(std::map<long long, Rational>& out, long long v, const Rational& e) {
  if (v <= 0) fail(ErrorKind::Domain, "R_l factor is not positive at s = 0");
  for (long long p = 2; p * p <= v; ++p)
    while (v % p == 0) {
      out[p] += e;
      v /= p;
    }
  if (v > 1) out[v] += e;
}

}  // namespace detail

// E(m) = prod_{l=1}^{m-1} R_l(0)^{l(-1)^l} exp(N_m), evaluated literally.
inline EmReport em_constant(int m) {
  if (m < 1 || m > 12) fail(ErrorKind::Domain, "em_constant supports 1 <= m <= 12");
  EmReport r;
  r.m = m;
  const PolyQ x = PolyQ::monomial(1);
  for (int l = 0; l < m; ++l) {
    PolyQ F = PolyQ::constant(binomial_q(m - 1, l));
    for (int k = 0; k < m; ++k) {
      if (k == l) continue;
      long long a = m - 2 * k - l;
      F = F * PolyQ(std::vector<Rational>{Rational(-a * a), Rational(0), Rational(1)});
    }
    r.F.push_back(F.with_parity(Parity::Even));
  }
  Rational F0m = r.F[0].eval(Rational(m));
  for (int l = 0; l < m; ++l) {
    PolyQ Q = (Rational(1) / (Rational(m) * F0m)) * (x * r.F[static_cast<size_t>(l)]);
    r.Q.push_back(Q.with_parity(Parity::Odd));
    std::vector<Rational> bl;
    for (int j = 1; j <= m; ++j) bl.push_back(Q.coeff(2 * j - 1));
    r.b.push_back(bl);
  }
  for (int j = 1; j <= m; ++j) {
    Rational h(0);
    for (int q = 1; q <= j; ++q) h += Rational(1, 2 * q - 1);
    r.c.push_back(-h / j);
  }
  r.N = 0;
  for (int l = 0; l < m; ++l) {
    std::vector<Rational> pc(static_cast<size_t>(m) + 1, Rational(0));
    for (int j = 1; j <= m; ++j) pc[static_cast<size_t>(j)] = r.b[static_cast<size_t>(l)][static_cast<size_t>(j - 1)] * r.c[static_cast<size_t>(j - 1)];
    PolyQ Pl(pc);
    r.Pl.push_back(Pl);
    Rational v = Pl.eval(Rational((m - l) * (m - l)));
    r.N += (l % 2 ? Rational(-1) : Rational(1)) * 2 * v;
  }
  for (int l = 1; l < m; ++l) {
    long long ml = m - l;
    Rational outer = Rational(l) * (l % 2 ? -1 : 1);
    const PolyQ& Ql = r.Q[static_cast<size_t>(l)];
    if ((l + m) % 2 == 0) {
      for (long long n = (m + 1) / 2; 2 * n <= m + l; ++n) {
        if (2 * n < m) continue;
        Rational e = Ql.eval(Rational(2 * n));
        if (denominator(e) != 1) r.exponents_integral = false;
        r.factors.push_back({l, n, 4 * n * n - ml * ml, e * outer});
      }
    } else {
      for (long long n = 1; 2 * n - 1 <= m + l; ++n) {
        if (2 * n - 1 < m) continue;
        Rational e = Ql.eval(Rational(2 * n - 1));
        if (denominator(e) != 1) r.exponents_integral = false;
        r.factors.push_back({l, n, (2 * n - 1) * (2 * n - 1) - ml * ml, e * outer});
      }
    }
  }
  for (auto& f : r.factors) detail::factor_into(r.prime_powers, f.base, f.exponent);
  double lv = to_double(r.N);
  for (auto& [p, e] : r.prime_powers) lv += to_double(e) * std::log(double(p));
  r.log_value = lv;
  r.value = std::exp(lv);
  return r;
}

// ------------------------------------------------------------ P_n and g kernels

// P_0 = P_1 = 1, P_{n+1} = P_{n-1} + (2n - 1) x P_n
inline PolyQ pn_poly(int n) {
  if (n < 0) fail(ErrorKind::Domain, "pn_poly needs n >= 0");
  PolyQ a = PolyQ::constant(1), b = PolyQ::constant(1);
  if (n == 0) return a;
  for (int k = 1; k < n; ++k) {
    PolyQ c = a + PolyQ::monomial(1, Rational(2 * k - 1)) * b;
    a = b;
    b = c;
  }
  return b;
}

// g_b^a(z) = int_0^inf t^{z-1} e^{-(a/t + b t)} dt, via t = e^u.
inline cplx g_integral(double a, double b, const cplx& z, double* abs_error = nullptr) {
  if (!(a > 0.0 && b > 0.0)) fail(ErrorKind::Domain, "g integral needs a, b > 0");
  boost::math::quadrature::gauss_kronrod<double, 61> gk;
  const double inf = std::numeric_limits<double>::infinity();
  auto part = [&](bool imag) {
    auto f = [&](double u) {
      double ex = z.real() * u - a * std::exp(-u) - b * std::exp(u);
      if (ex < -745.0) return 0.0;
      double mag = std::exp(ex);
      return imag ? mag * std::sin(z.imag() * u) : mag * std::cos(z.imag() * u);
    };
    double err = 0.0;
    double v = gk.integrate(f, -inf, inf, 20, 1e-14, &err);
    if (abs_error) *abs_error += err;
    return v;
  };
  if (abs_error) *abs_error = 0.0;
  return cplx(part(false), z.imag() == 0.0 ? 0.0 : part(true));
}

inline cplx g_integral(double a, const cplx& z, double* abs_error = nullptr) { return g_integral(a, a, z, abs_error); }

// ------------------------------------------------------------ factor at infinity (m = 1)

// Units: the Euler-Poincare normalization, in which the area measure is 2 pi
// times the standard one and g^0_t(e) ~ 1/(2t).
inline constexpr double kEulerPoincareScale = 2.0 * kPi;
// formal degree of the weight-2 discrete series per unit standard area
inline constexpr double kDiscreteDegreeStd = 1.0 / (4.0 * kPi);

struct HeatDiag {
  double value;
  double abs_error;
};

// g^q_t(e): Plancherel integral with density r tanh(pi r) / (2 pi) for the
// principal series at eigenvalue 1/4 + r^2, plus for q = 1 the discrete series
// sitting at eigenvalue 0.
inline HeatDiag hyperbolic_heat_diag(double t, int q) {
  if (!(t > 0.0)) fail(ErrorKind::Domain, "t must be positive");
  if (q != 0 && q != 1) fail(ErrorKind::Domain, "q must be 0 or 1");
  // int_0^inf e^{-t(1/4+r^2)} r tanh(pi r) dr = e^{-t/4}/(2t) - 2 int e^{-t(1/4+r^2)} r/(e^{2 pi r}+1) dr
  auto f = [&](double r) { return std::exp(-t * (0.25 + r * r)) * r / (std::exp(2.0 * kPi * r) + 1.0); };
  boost::math::quadrature::exp_sinh<double> es;
  double err = 0.0;
  double I = es.integrate(f, 0.0, std::numeric_limits<double>::infinity(), 1e-15, &err);
  double std_units = (std::exp(-t / 4.0) / (2.0 * t) - 2.0 * I) / (2.0 * kPi);
  if (q == 1) std_units += kDiscreteDegreeStd;
  return {kEulerPoincareScale * std_units, kEulerPoincareScale * 2.0 * err / (2.0 * kPi) + 1e-16};
}

struct CalibrationReport {
  double small_t_ratio;  // 4 pi t g^0_std(t) at t = 1e-4
  std::vector<double> t;
  std::vector<double> difference;  // g^1 - g^0 in Euler-Poincare units
  double max_deviation;            // from 1/2
};

inline CalibrationReport heat_calibration(const std::vector<double>& ts = {0.5, 1.0, 2.0}) {
  CalibrationReport c;
  double t0 = 1e-4;
  c.small_t_ratio = 4.0 * kPi * t0 * hyperbolic_heat_diag(t0, 0).value / kEulerPoincareScale;
  if (std::abs(c.small_t_ratio - 1.0) > 10.0 * t0)
    fail(ErrorKind::Calibration, "small-t heat diagonal does not scale like 1/(4 pi t)");
  c.max_deviation = 0.0;
  for (double t : ts) {
    double d = hyperbolic_heat_diag(t, 1).value - hyperbolic_heat_diag(t, 0).value;
    c.t.push_back(t);
    c.difference.push_back(d);
    c.max_deviation = std::max(c.max_deviation, std::abs(d - 0.5));
  }
  return c;
}

// log det^{(2)} of the continuous part of Delta_{0,1} + s^2 - 1/4 per
// Euler-Poincare unit, from the Mellin transform of its Gamma-trace:
//   -[s^2 log s - s^2/2 + 2 int_0^inf r log(r^2+s^2)/(e^{2 pi r}+1) dr]
inline double l2_log_det_continuous(double s, double* abs_error = nullptr) {
  if (!(s > 0.0)) fail(ErrorKind::Domain, "s must be positive");
  auto f = [&](double r) { return r * std::log(r * r + s * s) / (std::exp(2.0 * kPi * r) + 1.0); };
  boost::math::quadrature::exp_sinh<double> es;
  double err = 0.0;
  double J = es.integrate(f, 0.0, std::numeric_limits<double>::infinity(), 1e-15, &err);
  if (abs_error) *abs_error = 2.0 * err;
  return -(s * s * std::log(s) - 0.5 * s * s + 2.0 * J);
}

struct FactorInfinityReport {
  CalibrationReport calibration;
  std::vector<double> s;
  std::vector<double> log_lhs;        // Mellin-regularized sum_q q(-1)^q Gamma-traces, kernel excluded
  std::vector<double> log_rhs;        // s^2 + log det(P + s)
  std::vector<double> log_ratio;
  double spread = 0.0;
  double constant = 0.0;              // exp(mean log ratio): the volume-normalization factor
  std::vector<double> log_ratio_with_kernel;
  double spread_with_kernel = 0.0;
};

inline FactorInfinityReport factor_infinity_check(const std::vector<double>& grid) {
  FactorInfinityReport r;
  r.calibration = heat_calibration();
  const SpectralDivisor P = make_dualP();
  double lo = std::numeric_limits<double>::infinity(), hi = -lo, lo2 = lo, hi2 = -lo, sum = 0.0;
  for (double s : grid) {
    if (!(s > 0.5)) fail(ErrorKind::Domain, "factor-at-infinity grid needs s > 1/2");
    // sum_q q(-1)^q zeta_q' => log of the product is -log det^{(2)}_1
    double lhs = -l2_log_det_continuous(s);
    double rhs = s * s + std::log(char_fn(P, s));
    double ratio = lhs - rhs;
    double with_kernel = ratio - 0.5 * std::log(s * s - 0.25);
    r.s.push_back(s);
    r.log_lhs.push_back(lhs);
    r.log_rhs.push_back(rhs);
    r.log_ratio.push_back(ratio);
    r.log_ratio_with_kernel.push_back(with_kernel);
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
    lo2 = std::min(lo2, with_kernel);
    hi2 = std::max(hi2, with_kernel);
    sum += ratio;
  }
  r.spread = grid.empty() ? 0.0 : hi - lo;
  r.spread_with_kernel = grid.empty() ? 0.0 : hi2 - lo2;
  r.constant = grid.empty() ? 1.0 : std::exp(sum / double(grid.size()));
  return r;
}

// L^2 holomorphic torsion per Euler-Poincare unit, T = det^{(2)}(Delta'_{0,1})^{-1/2},
// i.e. the s -> 1/2 value of the continuous determinant.
struct L2TorsionUnit {
  double log_det2;
  double torsion;
};

inline L2TorsionUnit l2_holomorphic_torsion_unit() {
  double ld = l2_log_det_continuous(0.5);
  return {ld, std::exp(-0.5 * ld)};
}

}  // namespace zetaforge
