#pragma once
// Finite complexes, virtual spectra, twists, higher torsion and higher Euler
// characteristics.
#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "polyq.hpp"

namespace zetaforge {

// Exact binomial in 64-bit; C(n,k) = 0 outside 0 <= k <= n.
inline long long binom_ll(long long n, long long k) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  __int128 r = 1;
  for (long long i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return static_cast<long long>(r);
}

// d[p] maps degree p to degree p+1: rows = dim(p+1), cols = dim(p).
struct GradedComplex {
  std::vector<Eigen::MatrixXd> d;
  std::vector<int> dims;  // dims.size() == d.size() + 1

  static GradedComplex from_differentials(std::vector<Eigen::MatrixXd> ds) {
    GradedComplex c;
    c.d = std::move(ds);
    if (c.d.empty()) fail(ErrorKind::Domain, "complex needs at least one differential");
    c.dims.push_back(static_cast<int>(c.d[0].cols()));
    for (size_t p = 0; p < c.d.size(); ++p) {
      if (c.d[p].cols() != c.dims.back())
        fail(ErrorKind::Domain, "differential dimensions are not chain compatible at degree " + std::to_string(p));
      c.dims.push_back(static_cast<int>(c.d[p].rows()));
    }
    return c;
  }

  void check_chain(double tol = 1e-12) const {
    for (size_t p = 0; p + 1 < d.size(); ++p) {
      double n = (d[p + 1] * d[p]).norm();
      if (n > tol * std::max(1.0, d[p + 1].norm() * d[p].norm()))
        fail(ErrorKind::Domain, "chain condition d_{p+1} d_p = 0 fails at degree " + std::to_string(p));
    }
  }
};

// Signed multiset of positive reals with integer multiplicities.
using SignedMultiset = std::map<double, long long>;

inline void add_to(SignedMultiset& a, const SignedMultiset& b, long long sign = 1) {
  for (auto& [x, m] : b) {
    long long& slot = a[x];
    slot += sign * m;
    if (slot == 0) a.erase(x);
  }
}

inline double log_det(const SignedMultiset& s) {
  double acc = 0.0;
  for (auto& [x, m] : s) acc += double(m) * std::log(x);
  return acc;
}

// Degrees 0..h are explicit.  Beyond h the degree-j multiset is
//   (-1)^j * sum_d C(j-h-1, d) V_d,
// a family closed under twisting; finitely supported data has no V_d.
struct VirtualSpectra {
  std::vector<SignedMultiset> degrees;
  std::vector<SignedMultiset> tail;

  int horizon() const { return static_cast<int>(degrees.size()) - 1; }

  // log det of degree j (explicit or from the tail rule)
  double degree_log_det(int j) const {
    int h = horizon();
    if (j <= h) return log_det(degrees[static_cast<size_t>(j)]);
    double acc = 0.0;
    for (size_t d = 0; d < tail.size(); ++d) acc += double(binom_ll(j - h - 1, static_cast<long long>(d))) * log_det(tail[d]);
    return (j % 2 ? -1.0 : 1.0) * acc;
  }

  bool tail_empty() const {
    for (auto& v : tail)
      if (!v.empty()) return false;
    return true;
  }

  // Pseudofinite: every degree beyond the horizon has determinant one.
  bool pseudofinite(double tol = 1e-9) const {
    for (auto& v : tail)
      if (std::abs(log_det(v)) > tol) return false;
    return true;
  }
};

struct LaplaceResult {
  VirtualSpectra spectra;
  std::vector<int> kernel_dims;
};

inline LaplaceResult laplacian_spectra(const GradedComplex& c, double kernel_threshold = 1e-10) {
  c.check_chain();
  const size_t n = c.dims.size();
  LaplaceResult out;
  out.spectra.degrees.resize(n);
  for (size_t p = 0; p < n; ++p) {
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(c.dims[p], c.dims[p]);
    if (p < c.d.size()) L += c.d[p].transpose() * c.d[p];
    if (p > 0) L += c.d[p - 1] * c.d[p - 1].transpose();
    int ker = 0;
    if (c.dims[p] > 0) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L);
      for (int i = 0; i < es.eigenvalues().size(); ++i) {
        double ev = es.eigenvalues()[i];
        if (ev < kernel_threshold) ++ker;
        else out.spectra.degrees[p][ev] += 1;
      }
    }
    out.kernel_dims.push_back(ker);
  }
  return out;
}

inline VirtualSpectra finite_spectra(const std::vector<SignedMultiset>& degs) {
  VirtualSpectra v;
  v.degrees = degs;
  if (v.degrees.empty()) v.degrees.emplace_back();
  return v;
}

inline void require_pseudofinite(const VirtualSpectra& v) {
  if (!v.pseudofinite()) fail(ErrorKind::Hypothesis, "virtual spectra are not pseudofinite");
}

// prod_p det'(Delta_p)^{p (-1)^p}
inline double tau1(const VirtualSpectra& v) {
  require_pseudofinite(v);
  double acc = 0.0;
  for (int p = 0; p <= v.horizon(); ++p) acc += p * (p % 2 ? -1.0 : 1.0) * v.degree_log_det(p);
  return std::exp(acc);
}

inline double log_det_virtual(const VirtualSpectra& v) {
  require_pseudofinite(v);
  double acc = 0.0;
  for (int p = 0; p <= v.horizon(); ++p) acc += (p % 2 ? -1.0 : 1.0) * v.degree_log_det(p);
  return acc;
}

inline double det_virtual(const VirtualSpectra& v) { return std::exp(log_det_virtual(v)); }

// (E')_j = sum_{k>=0} (-1)^k E_{j-k}
inline VirtualSpectra twist(const VirtualSpectra& e) {
  VirtualSpectra out;
  const int h = e.horizon();
  out.degrees.resize(e.degrees.size());
  SignedMultiset alt;
  for (int j = 0; j <= h; ++j) {
    for (int i = 0; i <= j; ++i) add_to(out.degrees[static_cast<size_t>(j)], e.degrees[static_cast<size_t>(i)], ((j - i) % 2) ? -1 : 1);
    add_to(alt, e.degrees[static_cast<size_t>(j)], (j % 2) ? -1 : 1);
  }
  // tail: V'_0 gets the alternating sum of explicit degrees, and each V_d
  // feeds V'_d and V'_{d+1} (Pascal rule for the binomial weights)
  out.tail.resize(e.tail.size() + 1);
  add_to(out.tail[0], alt);
  for (size_t d = 0; d < e.tail.size(); ++d) {
    add_to(out.tail[d], e.tail[d]);
    add_to(out.tail[d + 1], e.tail[d]);
  }
  while (!out.tail.empty() && out.tail.back().empty()) out.tail.pop_back();
  return out;
}

inline VirtualSpectra twist_n(VirtualSpectra e, int r) {
  for (int i = 0; i < r; ++i) e = twist(e);
  return e;
}

// log tau_r by the closed form sum_p (-1)^{p+r-1} C(p,r) log det(E_p)
inline double log_tau_r_closed(const VirtualSpectra& v, int r) {
  require_pseudofinite(v);
  double acc = 0.0;
  for (int p = 0; p <= v.horizon(); ++p) {
    double sign = ((p + r - 1) % 2 == 0) ? 1.0 : -1.0;
    acc += sign * double(binom_ll(p, r)) * v.degree_log_det(p);
  }
  return acc;
}

struct TauReport {
  double value;
  double iterated_twist_value;
  double discrepancy;
};

inline TauReport tau_r(const VirtualSpectra& v, int r, double tol = 1e-9) {
  if (r < 0) fail(ErrorKind::Domain, "r must be nonnegative");
  for (int k = 0; k < r; ++k) {
    double lt = log_tau_r_closed(v, k);
    if (std::abs(std::expm1(lt)) > tol)
      fail(ErrorKind::Hypothesis, "lower torsion tau_" + std::to_string(k) + " is not trivial");
  }
  double closed = std::exp(log_tau_r_closed(v, r));
  VirtualSpectra tw = twist_n(v, r);
  double via = std::exp(-log_det_virtual(tw));
  return {closed, via, std::abs(closed - via)};
}

struct HodgeCheck {
  double lhs;            // prod_p (prod_q det'(Delta_{p,q})^{q(-1)^q})^{p(-1)^p}
  double rhs_printed;    // tau_2^{-1/2}
  double tau2;           // closed form on the total complex
  double rhs_inverse;    // tau_2^{-1}
};

// hodge[p][q] = spectrum of Delta_{p,q}
inline HodgeCheck tau2_hodge_check(const std::map<std::pair<int, int>, SignedMultiset>& hodge) {
  double lhs = 0.0;
  int top = 0;
  for (auto& [pq, s] : hodge) {
    auto [p, q] = pq;
    lhs += double(p) * (p % 2 ? -1.0 : 1.0) * double(q) * (q % 2 ? -1.0 : 1.0) * log_det(s);
    top = std::max(top, p + q);
  }
  std::vector<SignedMultiset> total(static_cast<size_t>(top) + 1);
  for (auto& [pq, s] : hodge) add_to(total[static_cast<size_t>(pq.first + pq.second)], s);
  VirtualSpectra v = finite_spectra(total);
  double lt2 = 0.0;
  for (int n = 0; n <= v.horizon(); ++n) lt2 += ((n + 1) % 2 ? -1.0 : 1.0) * double(binom_ll(n, 2)) * v.degree_log_det(n);
  return {std::exp(lhs), std::exp(-0.5 * lt2), std::exp(lt2), std::exp(-lt2)};
}

using BettiSequence = std::vector<long long>;

inline long long chi_r(const BettiSequence& b, int r) {
  __int128 acc = 0;
  for (size_t j = 0; j < b.size(); ++j) acc += __int128(binom_ll(static_cast<long long>(j), r)) * ((j % 2) ? -1 : 1) * b[j];
  return static_cast<long long>((r % 2 ? -1 : 1) * acc);
}

struct ChiGen {
  int r;  // -1 when every chi_r vanishes
  long long value;
};

inline ChiGen chi_gen(const BettiSequence& b) {
  for (int r = 0; r <= static_cast<int>(b.size()); ++r) {
    long long v = chi_r(b, r);
    if (v != 0) return {r, v};
  }
  return {-1, 0};
}

inline BettiSequence kunneth(const BettiSequence& a, const BettiSequence& b) {
  if (a.empty() || b.empty()) return {};
  BettiSequence c(a.size() + b.size() - 1, 0);
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
  return c;
}

// Betti data of the twisted complex: b'_j = sum_k (-1)^k b_{j-k} for j up to
// `upto`; cohomology of a twist is computed degreewise in this model.
inline BettiSequence twist_betti(const BettiSequence& b, int upto) {
  BettiSequence out(static_cast<size_t>(upto) + 1, 0);
  for (int j = 0; j <= upto; ++j)
    for (int k = 0; k <= j; ++k)
      if (j - k < static_cast<int>(b.size())) out[static_cast<size_t>(j)] += ((k % 2) ? -1 : 1) * b[static_cast<size_t>(j - k)];
  return out;
}

struct LieCohomology {
  std::vector<int> computed;
  std::vector<int> predicted;  // C(r,p) * dim of the joint kernel
  int invariants;
  bool agrees;
};

inline int numeric_rank(const Eigen::MatrixXd& m, double tol = 1e-9) {
  if (m.rows() == 0 || m.cols() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  double thr = tol * std::max(1.0, s.size() ? s[0] : 0.0);
  int r = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s[i] > thr) ++r;
  return r;
}

// Chevalley-Eilenberg cohomology of an abelian Lie algebra acting by commuting matrices.
inline LieCohomology abelian_lie_cohomology_dims(const std::vector<Eigen::MatrixXd>& x, int upto = -1) {
  const int r = static_cast<int>(x.size());
  if (r == 0) fail(ErrorKind::Domain, "need at least one action");
  const int n = static_cast<int>(x[0].rows());
  for (auto& m : x)
    if (m.rows() != n || m.cols() != n) fail(ErrorKind::Domain, "actions must be square of equal size");
  for (int i = 0; i < r; ++i)
    for (int j = i + 1; j < r; ++j)
      if ((x[i] * x[j] - x[j] * x[i]).norm() > 1e-10) fail(ErrorKind::Domain, "actions do not commute");
  if (upto < 0 || upto > r) upto = r;

  // subsets of {0..r-1} by size, as bitmasks
  std::vector<std::vector<int>> subsets(static_cast<size_t>(r) + 1);
  for (int mask = 0; mask < (1 << r); ++mask) subsets[static_cast<size_t>(__builtin_popcount(mask))].push_back(mask);
  auto index_of = [&](int q, int mask) {
    auto& v = subsets[static_cast<size_t>(q)];
    return static_cast<int>(std::lower_bound(v.begin(), v.end(), mask) - v.begin());
  };
  // d_q : C^q -> C^{q+1}, (d w)_S = sum_i (-1)^i x_{S_i} w_{S \ S_i}
  std::vector<int> ranks(static_cast<size_t>(r) + 1, 0);
  for (int q = 0; q < r; ++q) {
    const auto& src = subsets[static_cast<size_t>(q)];
    const auto& dst = subsets[static_cast<size_t>(q + 1)];
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dst.size()) * n, static_cast<Eigen::Index>(src.size()) * n);
    for (size_t si = 0; si < dst.size(); ++si) {
      int S = dst[si];
      int pos = 0;
      for (int e = 0; e < r; ++e) {
        if (!(S & (1 << e))) continue;
        int T = S & ~(1 << e);
        int ti = index_of(q, T);
        double sign = (pos % 2) ? -1.0 : 1.0;
        D.block(static_cast<Eigen::Index>(si) * n, static_cast<Eigen::Index>(ti) * n, n, n) += sign * x[static_cast<size_t>(e)];
        ++pos;
      }
    }
    ranks[static_cast<size_t>(q)] = numeric_rank(D);
  }
  LieCohomology out;
  for (int q = 0; q <= upto; ++q) {
    int dimC = static_cast<int>(binom_ll(r, q)) * n;
    int rk_out = q < r ? ranks[static_cast<size_t>(q)] : 0;
    int rk_in = q > 0 ? ranks[static_cast<size_t>(q - 1)] : 0;
    out.computed.push_back(dimC - rk_out - rk_in);
  }
  Eigen::MatrixXd stacked(static_cast<Eigen::Index>(r) * n, n);
  for (int i = 0; i < r; ++i) stacked.block(static_cast<Eigen::Index>(i) * n, 0, n, n) = x[static_cast<size_t>(i)];
  out.invariants = n - numeric_rank(stacked);
  for (int q = 0; q <= upto; ++q) out.predicted.push_back(static_cast<int>(binom_ll(r, q)) * out.invariants);
  out.agrees = out.computed == out.predicted;
  return out;
}

struct AIdentity {
  long long lhs, rhs;
};

// A(i,r,r') = sum_{j=0}^{r'} C(i+j, r) C(r', j) (-1)^j against (-1)^{r'} C(i, r - r')
inline AIdentity A_identity(int i, int r, int rp) {
  __int128 acc = 0;
  for (int j = 0; j <= rp; ++j) acc += __int128(binom_ll(i + j, r)) * binom_ll(rp, j) * ((j % 2) ? -1 : 1);
  long long rhs = ((rp % 2) ? -1 : 1) * binom_ll(i, r - rp);
  return {static_cast<long long>(acc), rhs};
}

}  // namespace zetaforge
