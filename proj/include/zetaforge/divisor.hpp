#pragma once
// Spectral divisors: finite (eigenvalue, multiplicity) data plus structured
// polynomial tails.  A tail describes the points
//     mu_n = scale * b_n^power + shift,   b_n = offset + step * n,   n >= start,
// each carrying multiplicity poly(b_n).  For power == 1 the scale and shift are
// always folded into offset/step/poly, so only power tails use those fields.
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "polyq.hpp"

namespace zetaforge {

struct PolyTail {
  double offset = 0.0;
  double step = 1.0;
  long long start = 0;
  PolyQ poly = PolyQ::constant(1);
  double power = 1.0;
  double scale = 1.0;
  double shift = 0.0;

  double base(long long n) const { return offset + step * static_cast<double>(n); }
  double point(long long n) const {
    double b = base(n);
    if (power == 1.0) return scale * b + shift;
    return scale * std::pow(b, power) + shift;
  }
  // exact multiplicity at index n
  Rational mult_exact(long long n) const { return poly.eval(rational_from_double(base(n))); }
  long long mult(long long n) const {
    Rational m = mult_exact(n);
    if (denominator(m) != 1) fail(ErrorKind::Domain, "tail multiplicity is not an integer");
    return numerator(m).convert_to<long long>();
  }
  bool operator==(const PolyTail& o) const {
    return offset == o.offset && step == o.step && start == o.start && poly == o.poly &&
           poly.parity() == o.poly.parity() && power == o.power && scale == o.scale && shift == o.shift;
  }
};

struct TruncationInfo {
  long long points_per_tail = 0;
  double largest_kept = 0.0;
};

struct SpectralDivisor {
  std::vector<std::pair<double, long long>> finite;
  std::vector<PolyTail> tails;
  long long kernel = 0;
  std::optional<TruncationInfo> truncation;

  bool operator==(const SpectralDivisor& o) const {
    return finite == o.finite && tails == o.tails && kernel == o.kernel && truncation.has_value() == o.truncation.has_value();
  }
  bool is_finite() const { return tails.empty(); }
};

struct DivisorOptions {
  int integrality_checks = 100;
  long long materialize_cutoff = 1000000;
};

namespace detail {

inline void validate_tail(const PolyTail& t, int checks) {
  if (!(t.step > 0.0)) fail(ErrorKind::Domain, "tail step must be positive");
  if (t.start < 0) fail(ErrorKind::Domain, "tail start index must be nonnegative");
  if (!(t.base(t.start) > 0.0)) fail(ErrorKind::Domain, "tail base points must be positive");
  if (!(t.power > 0.0)) fail(ErrorKind::Domain, "tail power must be positive");
  if (!(t.scale > 0.0)) fail(ErrorKind::Domain, "tail scale must be positive");
  for (int i = 0; i < checks; ++i) {
    Rational m = t.mult_exact(t.start + i);
    if (denominator(m) != 1)
      fail(ErrorKind::Domain, "tail multiplicity is not an integer at index " + std::to_string(t.start + i));
    if (m < 0) fail(ErrorKind::Domain, "negative multiplicity at tail index " + std::to_string(t.start + i));
  }
}

// Fold scale and shift of a linear tail into offset/step/poly exactly.
inline PolyTail fold_linear(PolyTail t) {
  if (t.power != 1.0) return t;
  if (t.scale != 1.0) {
    double c = t.scale;
    t.offset *= c;
    t.step *= c;
    t.poly = t.poly.compose_affine(Rational(1) / rational_from_double(c), Rational(0));
    t.scale = 1.0;
  }
  if (t.shift != 0.0) {
    double new_offset = t.offset + t.shift;
    Rational delta = rational_from_double(new_offset) - rational_from_double(t.offset);
    t.poly = t.poly.compose_affine(Rational(1), -delta);
    t.offset = new_offset;
    t.shift = 0.0;
  }
  return t;
}

}  // namespace detail

// Restores the invariants: finite part sorted, merged, strictly positive;
// every tail strictly above the finite part; nonpositive tail points rejected.
inline SpectralDivisor normalize(SpectralDivisor d) {
  std::map<double, long long> acc;
  for (auto& [lam, m] : d.finite) {
    if (m < 0) fail(ErrorKind::Domain, "negative multiplicity in finite part");
    if (m == 0) continue;
    if (lam < 0.0) fail(ErrorKind::Domain, "negative eigenvalue in divisor");
    if (lam == 0.0) {
      d.kernel += m;
      continue;
    }
    acc[lam] += m;
  }
  for (auto& t : d.tails) t = detail::fold_linear(t);
  bool changed = true;
  while (changed) {
    changed = false;
    double top = acc.empty() ? 0.0 : acc.rbegin()->first;
    for (auto& t : d.tails) {
      while (t.point(t.start) <= top || t.point(t.start) <= 0.0) {
        double p = t.point(t.start);
        long long m = t.mult(t.start);
        if (p < 0.0) fail(ErrorKind::Domain, "negative eigenvalue in divisor tail");
        if (m > 0) {
          if (p == 0.0) d.kernel += m;
          else acc[p] += m;
        }
        ++t.start;
        changed = true;
      }
    }
  }
  d.finite.assign(acc.begin(), acc.end());
  return d;
}

inline SpectralDivisor make_finite(const std::vector<std::pair<double, long long>>& pts, long long kernel = 0) {
  SpectralDivisor d;
  d.finite = pts;
  d.kernel = kernel;
  return normalize(d);
}

inline SpectralDivisor make_tail_divisor(PolyTail t, const DivisorOptions& opt = {}) {
  detail::validate_tail(t, opt.integrality_checks);
  SpectralDivisor d;
  d.tails.push_back(std::move(t));
  return normalize(d);
}

// points 2n+1 (n >= 0), multiplicity (2n+1)^j
inline SpectralDivisor make_Dj(int j) {
  if (j < 0 || j > 32) fail(ErrorKind::Domain, "make_Dj requires 0 <= j <= 32");
  return make_tail_divisor(PolyTail{1.0, 2.0, 0, PolyQ::monomial(j)});
}

// points 2n (n >= 1), multiplicity (2n)^j
inline SpectralDivisor make_Ej(int j) {
  if (j < 0 || j > 32) fail(ErrorKind::Domain, "make_Ej requires 0 <= j <= 32");
  return make_tail_divisor(PolyTail{0.0, 2.0, 1, PolyQ::monomial(j)});
}

inline SpectralDivisor make_Dsigma(const PolyQ& Q, int checks = 1000) {
  if (Q.parity() == Parity::None) fail(ErrorKind::Domain, "make_Dsigma needs a polynomial with declared parity");
  PolyTail t = Q.parity() == Parity::Even ? PolyTail{0.0, 2.0, 1, Q} : PolyTail{-1.0, 2.0, 1, Q};
  return make_tail_divisor(t, DivisorOptions{checks, 1000000});
}

// points j + 1/2 (j >= 0), multiplicity 2j + 1
inline SpectralDivisor make_dualP() { return make_tail_divisor(PolyTail{0.5, 1.0, 0, PolyQ::monomial(1, 2)}); }

// points n^power (n >= 1) with multiplicity 1
inline SpectralDivisor make_naturals(double power = 1.0) {
  PolyTail t{0.0, 1.0, 1, PolyQ::constant(1)};
  t.power = power;
  return make_tail_divisor(t);
}

inline SpectralDivisor shift(SpectralDivisor d, double lambda) {
  for (auto& [lam, m] : d.finite) lam += lambda;
  if (d.kernel > 0 && lambda != 0.0) {
    if (lambda < 0.0) fail(ErrorKind::Domain, "shift moves kernel below zero");
    d.finite.emplace_back(lambda, d.kernel);
    d.kernel = 0;
  }
  for (auto& t : d.tails) t.shift += lambda;
  const double tol = 1e-14 * (1.0 + std::abs(lambda));
  for (auto& [lam, m] : d.finite) {
    if (lam < -tol) fail(ErrorKind::Domain, "shift below minus the smallest eigenvalue");
    if (std::abs(lam) <= tol) lam = 0.0;
  }
  return normalize(d);
}

inline SpectralDivisor scale(SpectralDivisor d, double c) {
  if (!(c > 0.0)) fail(ErrorKind::Domain, "scale factor must be positive");
  for (auto& [lam, m] : d.finite) lam *= c;
  for (auto& t : d.tails) {
    t.scale *= c;
    t.shift *= c;
  }
  return normalize(d);
}

inline SpectralDivisor direct_sum(const SpectralDivisor& a, const SpectralDivisor& b) {
  SpectralDivisor d = a;
  d.finite.insert(d.finite.end(), b.finite.begin(), b.finite.end());
  d.tails.insert(d.tails.end(), b.tails.begin(), b.tails.end());
  d.kernel += b.kernel;
  if (b.truncation) d.truncation = b.truncation;
  return normalize(d);
}

// Replaces every tail by its first `cutoff` points; records the truncation.
inline SpectralDivisor materialize(SpectralDivisor d, long long cutoff = 1000000) {
  TruncationInfo info{cutoff, 0.0};
  for (auto& t : d.tails) {
    for (long long i = 0; i < cutoff; ++i) {
      long long n = t.start + i;
      long long m = t.mult(n);
      if (m > 0) d.finite.emplace_back(t.point(n), m);
      info.largest_kept = std::max(info.largest_kept, t.point(n));
    }
  }
  d.tails.clear();
  d.truncation = info;
  return normalize(d);
}

// A^q: exact on finite parts and unshifted tails, else materialized.
inline SpectralDivisor power(SpectralDivisor d, double q, long long cutoff = 1000000) {
  if (!(q > 0.0)) fail(ErrorKind::Domain, "power exponent must be positive");
  bool need_materialize = false;
  for (auto& t : d.tails)
    if (t.shift != 0.0) need_materialize = true;
  if (need_materialize) d = materialize(d, cutoff);
  for (auto& [lam, m] : d.finite) lam = std::pow(lam, q);
  for (auto& t : d.tails) {
    t.power *= q;
    t.scale = std::pow(t.scale, q);
  }
  return normalize(d);
}

// The first `count` eigenvalues (with multiplicity), merged across finite part and tails.
inline std::vector<std::pair<double, long long>> leading_points(const SpectralDivisor& d, size_t count) {
  std::map<double, long long> acc;
  for (auto& p : d.finite) acc[p.first] += p.second;
  for (auto& t : d.tails)
    for (size_t i = 0; i < count; ++i) {
      long long n = t.start + static_cast<long long>(i);
      long long m = t.mult(n);
      if (m > 0) acc[t.point(n)] += m;
    }
  std::vector<std::pair<double, long long>> out(acc.begin(), acc.end());
  if (out.size() > count) out.resize(count);
  return out;
}

inline double min_eigenvalue(const SpectralDivisor& d) {
  double m = std::numeric_limits<double>::infinity();
  if (!d.finite.empty()) m = d.finite.front().first;
  for (auto& t : d.tails)
    for (long long n = t.start;; ++n)
      if (t.mult(n) > 0) {
        m = std::min(m, t.point(n));
        break;
      } else if (n > t.start + 1000) {
        break;
      }
  return m;
}

}  // namespace zetaforge
