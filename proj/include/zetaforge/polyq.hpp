#pragma once
// Polynomials with exact rational coefficients and an optional parity tag.
#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <complex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"

namespace zetaforge {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

enum class Parity { Even, Odd, None };

inline const char* parity_name(Parity p) {
  switch (p) {
    case Parity::Even: return "even";
    case Parity::Odd: return "odd";
    default: return "none";
  }
}

inline Parity parity_from_name(const std::string& s) {
  if (s == "even") return Parity::Even;
  if (s == "odd") return Parity::Odd;
  if (s == "none") return Parity::None;
  fail(ErrorKind::Schema, "unknown parity '" + s + "'");
}

// Every finite double is a dyadic rational, so this conversion is exact.
inline Rational rational_from_double(double x) {
  if (!std::isfinite(x)) fail(ErrorKind::Domain, "non-finite value cannot become a rational");
  if (x == 0.0) return Rational(0);
  int e = 0;
  double m = std::frexp(x, &e);
  // m in [0.5,1): scale to a 53-bit integer
  auto mi = static_cast<long long>(std::ldexp(m, 53));
  e -= 53;
  Rational r(mi);
  if (e > 0) r *= Rational(BigInt(1) << e);
  if (e < 0) r /= Rational(BigInt(1) << (-e));
  return r;
}

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

inline std::string rational_string(const Rational& r) {
  std::ostringstream os;
  os << numerator(r);
  if (denominator(r) != 1) os << "/" << denominator(r);
  return os.str();
}

class PolyQ {
 public:
  PolyQ() = default;
  explicit PolyQ(std::vector<Rational> coeffs, Parity parity = Parity::None)
      : c_(std::move(coeffs)), parity_(parity) {
    trim();
    check_parity();
  }
  static PolyQ constant(const Rational& a) { return PolyQ({a}); }
  static PolyQ monomial(int k, const Rational& a = 1) {
    std::vector<Rational> c(static_cast<size_t>(k) + 1, Rational(0));
    c[static_cast<size_t>(k)] = a;
    return PolyQ(c, k % 2 == 0 ? Parity::Even : Parity::Odd);
  }
  static PolyQ from_ints(const std::vector<long long>& v, Parity p = Parity::None) {
    std::vector<Rational> c;
    for (auto x : v) c.emplace_back(x);
    return PolyQ(c, p);
  }

  const std::vector<Rational>& coeffs() const { return c_; }
  Parity parity() const { return parity_; }
  PolyQ with_parity(Parity p) const { return PolyQ(c_, p); }

  // -1 encodes the zero polynomial
  int degree() const { return static_cast<int>(c_.size()) - 1; }
  bool is_zero() const { return c_.empty(); }

  Rational coeff(int k) const {
    if (k < 0 || k > degree()) return Rational(0);
    return c_[static_cast<size_t>(k)];
  }

  Rational eval(const Rational& x) const {
    Rational acc(0);
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + *it;
    return acc;
  }

  template <class T>
  T eval_num(const T& x) const {
    T acc(0);
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + T(to_double(*it));
    return acc;
  }

  // Parity inferred from the coefficients alone.
  Parity detected_parity() const {
    bool has_even = false, has_odd = false;
    for (int k = 0; k <= degree(); ++k)
      if (c_[static_cast<size_t>(k)] != 0) (k % 2 ? has_odd : has_even) = true;
    if (has_even && !has_odd) return Parity::Even;
    if (has_odd && !has_even) return Parity::Odd;
    if (!has_even && !has_odd) return Parity::Even;
    return Parity::None;
  }

  PolyQ derivative() const {
    std::vector<Rational> d;
    for (int k = 1; k <= degree(); ++k) d.push_back(c_[static_cast<size_t>(k)] * k);
    Parity p = parity_ == Parity::Even ? Parity::Odd : parity_ == Parity::Odd ? Parity::Even : Parity::None;
    return PolyQ(d, p);
  }

  PolyQ antiderivative() const {
    std::vector<Rational> d{Rational(0)};
    for (int k = 0; k <= degree(); ++k) d.push_back(c_[static_cast<size_t>(k)] / (k + 1));
    Parity p = parity_ == Parity::Even ? Parity::Odd : parity_ == Parity::Odd ? Parity::Even : Parity::None;
    return PolyQ(d, p);
  }

  // Q(a*x + b)
  PolyQ compose_affine(const Rational& a, const Rational& b) const {
    PolyQ lin({b, a});
    PolyQ acc;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * lin + PolyQ::constant(*it);
    return acc.with_parity(b == 0 ? parity_ : Parity::None);
  }

  friend PolyQ operator+(const PolyQ& a, const PolyQ& b) {
    std::vector<Rational> c(static_cast<size_t>(std::max(a.degree(), b.degree()) + 1), Rational(0));
    for (int k = 0; k <= a.degree(); ++k) c[static_cast<size_t>(k)] += a.c_[static_cast<size_t>(k)];
    for (int k = 0; k <= b.degree(); ++k) c[static_cast<size_t>(k)] += b.c_[static_cast<size_t>(k)];
    return PolyQ(c, a.parity_ == b.parity_ ? a.parity_ : Parity::None);
  }
  friend PolyQ operator-(const PolyQ& a) {
    std::vector<Rational> c = a.c_;
    for (auto& x : c) x = -x;
    return PolyQ(c, a.parity_);
  }
  friend PolyQ operator-(const PolyQ& a, const PolyQ& b) { return a + (-b); }
  friend PolyQ operator*(const PolyQ& a, const PolyQ& b) {
    if (a.is_zero() || b.is_zero()) return PolyQ();
    std::vector<Rational> c(static_cast<size_t>(a.degree() + b.degree() + 1), Rational(0));
    for (int i = 0; i <= a.degree(); ++i)
      for (int j = 0; j <= b.degree(); ++j)
        c[static_cast<size_t>(i + j)] += a.c_[static_cast<size_t>(i)] * b.c_[static_cast<size_t>(j)];
    Parity p = Parity::None;
    if (a.parity_ != Parity::None && b.parity_ != Parity::None)
      p = (a.parity_ == b.parity_) ? Parity::Even : Parity::Odd;
    return PolyQ(c, p);
  }
  friend PolyQ operator*(const Rational& s, const PolyQ& a) {
    std::vector<Rational> c = a.c_;
    for (auto& x : c) x *= s;
    return PolyQ(c, a.parity_);
  }
  friend bool operator==(const PolyQ& a, const PolyQ& b) { return a.c_ == b.c_; }

  std::string to_string(const char* var = "x") const {
    if (is_zero()) return "0";
    std::ostringstream os;
    bool first = true;
    for (int k = 0; k <= degree(); ++k) {
      const Rational& a = c_[static_cast<size_t>(k)];
      if (a == 0) continue;
      if (!first) os << (a < 0 ? " - " : " + ");
      else if (a < 0) os << "-";
      Rational m = a < 0 ? Rational(-a) : a;
      if (k == 0 || m != 1) os << rational_string(m);
      if (k >= 1) os << (k == 0 || m != 1 ? "*" : "") << var;
      if (k >= 2) os << "^" << k;
      first = false;
    }
    return os.str();
  }

 private:
  void trim() {
    while (!c_.empty() && c_.back() == 0) c_.pop_back();
  }
  void check_parity() const {
    if (parity_ == Parity::None) return;
    for (int k = 0; k <= degree(); ++k) {
      bool odd_k = (k % 2) != 0;
      if (c_[static_cast<size_t>(k)] != 0 && odd_k != (parity_ == Parity::Odd))
        fail(ErrorKind::Domain, std::string("polynomial violates declared parity '") + parity_name(parity_) + "'");
    }
  }

  std::vector<Rational> c_;
  Parity parity_ = Parity::None;
};

inline Rational binomial_q(long long n, long long k) {
  if (k < 0 || n < 0 || k > n) return Rational(0);
  BigInt r = 1;
  for (long long i = 1; i <= k; ++i) {
    r *= (n - k + i);
    r /= i;
  }
  return Rational(r);
}

}  // namespace zetaforge
