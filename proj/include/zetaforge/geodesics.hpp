#pragma once
// Length spectra of Fuchsian groups and weighted synthetic spectra.
//
// Words use letter 2g for generator g and 2g+1 for its inverse.  In text form
// generator g is the g-th lowercase letter and its inverse the uppercase one.
#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"

namespace zetaforge {

struct LengthEntry {
  double length = 0.0;
  double primitive_length = 0.0;
  double mult_weight = 1.0;
  double sigma_trace = 1.0;
  double phi_trace = 1.0;
  long long class_weight = 1;
  std::string word;  // representative, empty for synthetic entries

  double mu() const { return length / primitive_length; }
  bool operator==(const LengthEntry& o) const {
    return length == o.length && primitive_length == o.primitive_length && mult_weight == o.mult_weight &&
           sigma_trace == o.sigma_trace && phi_trace == o.phi_trace && class_weight == o.class_weight && word == o.word;
  }
};

struct LengthSpectrum {
  std::vector<LengthEntry> entries;
  bool heuristic = false;
  std::vector<std::string> warnings;
  int complete_to_word_length = 0;  // 0 for synthetic spectra
  // every class up to this length is listed; infinity means the list is the whole spectrum
  double complete_to_length = std::numeric_limits<double>::infinity();
  long long words_visited = 0;

  bool operator==(const LengthSpectrum& o) const {
    return entries == o.entries && heuristic == o.heuristic && complete_to_length == o.complete_to_length;
  }
};

using Mat2 = std::array<double, 4>;  // row-major a b / c d

struct FuchsianGroup {
  std::vector<Mat2> generators;
  std::vector<int> relator;  // letters; empty means free
};

struct EnumOptions {
  long long word_budget = 20000000;
  int max_word_length = 64;
  int conjugator_depth = 4;
  double dedup_tol = 1e-9;
};

inline constexpr int inverse_letter(int x) { return x ^ 1; }

inline std::string word_to_string(const std::vector<int>& w) {
  std::string s;
  for (int x : w) {
    if (x / 2 >= 26) fail(ErrorKind::Domain, "word text form supports at most 26 generators");
    s.push_back(static_cast<char>((x & 1 ? 'A' : 'a') + x / 2));
  }
  return s;
}

inline std::vector<int> word_from_string(const std::string& s) {
  std::vector<int> w;
  for (char c : s) {
    if (c >= 'a' && c <= 'z') w.push_back(2 * (c - 'a'));
    else if (c >= 'A' && c <= 'Z') w.push_back(2 * (c - 'A') + 1);
    else fail(ErrorKind::Schema, std::string("invalid letter '") + c + "' in word");
  }
  return w;
}

inline double length_from_trace(double tr) {
  double a = std::abs(tr);
  if (!(a > 2.0)) fail(ErrorKind::Domain, "non-hyperbolic element (|trace| <= 2) encountered");
  return 2.0 * std::acosh(a / 2.0);
}

// Smallest period p of w (p divides |w|).
inline size_t word_period(const std::vector<int>& w) {
  const size_t k = w.size();
  for (size_t p = 1; p < k; ++p) {
    if (k % p) continue;
    bool ok = true;
    for (size_t i = p; i < k && ok; ++i) ok = w[i] == w[i - p];
    if (ok) return p;
  }
  return k;
}

inline bool is_cyclically_reduced(const std::vector<int>& w) {
  if (w.empty()) return false;
  for (size_t i = 0; i + 1 < w.size(); ++i)
    if (w[i + 1] == inverse_letter(w[i])) return false;
  return w.size() == 1 || w.back() != inverse_letter(w.front());
}

// true when w is lexicographically minimal among its rotations
inline bool is_min_rotation(const std::vector<int>& w) {
  const size_t k = w.size();
  for (size_t r = 1; r < k; ++r) {
    for (size_t i = 0; i < k; ++i) {
      int a = w[(i + r) % k], b = w[i];
      if (a < b) return false;
      if (a > b) break;
    }
  }
  return true;
}

namespace detail {

inline Mat2 mat_mul(const Mat2& x, const Mat2& y) {
  return {x[0] * y[0] + x[1] * y[2], x[0] * y[1] + x[1] * y[3], x[2] * y[0] + x[3] * y[2], x[2] * y[1] + x[3] * y[3]};
}
inline Mat2 mat_inv(const Mat2& x) { return {x[3], -x[1], -x[2], x[0]}; }

template <class T>
using Mat2T = std::array<T, 4>;

template <class T>
Mat2T<T> mul(const Mat2T<T>& x, const Mat2T<T>& y) {
  return {x[0] * y[0] + x[1] * y[2], x[0] * y[1] + x[1] * y[3], x[2] * y[0] + x[3] * y[2], x[2] * y[1] + x[3] * y[3]};
}

inline bool all_integral(const FuchsianGroup& G) {
  for (auto& g : G.generators)
    for (double x : g)
      if (x != std::floor(x) || std::abs(x) > 1e15) return false;
  return true;
}

inline void validate_group(const FuchsianGroup& G) {
  if (G.generators.empty()) fail(ErrorKind::Domain, "group needs at least one generator");
  for (size_t i = 0; i < G.generators.size(); ++i) {
    auto& g = G.generators[i];
    double det = g[0] * g[3] - g[1] * g[2];
    if (std::abs(det - 1.0) > 1e-12) fail(ErrorKind::Domain, "generator " + std::to_string(i) + " does not have determinant 1");
    if (!(std::abs(g[0] + g[3]) > 2.0)) fail(ErrorKind::Domain, "generator " + std::to_string(i) + " is not hyperbolic");
  }
  for (int x : G.relator)
    if (x < 0 || x / 2 >= static_cast<int>(G.generators.size())) fail(ErrorKind::Domain, "relator uses an unknown generator");
}

struct RawClass {
  std::vector<int> word;
  double trace;  // |trace|
  double length;
};

// Depth-first enumeration of cyclically reduced words, minimal up to rotation,
// with exact traces for integer generators.
template <class T, class ToDouble>
void enumerate_words(const std::vector<Mat2T<T>>& letters, int k, long long& budget, long long& visited,
                     std::vector<RawClass>& out, ToDouble to_double) {
  const int nl = static_cast<int>(letters.size());
  std::vector<int> w(k);
  std::vector<Mat2T<T>> prefix(k);
  // iterative DFS over positions
  std::vector<int> next(k, 0);
  int pos = 0;
  while (pos >= 0) {
    if (next[pos] >= nl) {
      next[pos] = 0;
      --pos;
      continue;
    }
    int x = next[pos]++;
    if (pos > 0 && x == inverse_letter(w[pos - 1])) continue;
    // rotation-minimal words start with their smallest letter
    if (pos > 0 && x < w[0]) continue;
    w[pos] = x;
    prefix[pos] = pos == 0 ? letters[x] : mul(prefix[pos - 1], letters[x]);
    if (--budget < 0) fail(ErrorKind::Truncation, "word budget exhausted; lower L_max or raise the budget");
    if (pos + 1 < k) {
      ++pos;
      continue;
    }
    ++visited;
    if (k > 1 && w.back() == inverse_letter(w.front())) continue;
    if (!is_min_rotation(w)) continue;
    auto& m = prefix[pos];
    double tr = std::abs(to_double(m[0] + m[3]));
    out.push_back({w, tr, length_from_trace(tr)});
  }
}

inline std::vector<RawClass> classes_of_length(const FuchsianGroup& G, int k, long long& budget, long long& visited) {
  std::vector<RawClass> out;
  if (all_integral(G)) {
    using boost::multiprecision::cpp_int;
    std::vector<Mat2T<cpp_int>> letters;
    for (auto& g : G.generators) {
      Mat2T<cpp_int> m{cpp_int(static_cast<long long>(g[0])), cpp_int(static_cast<long long>(g[1])),
                       cpp_int(static_cast<long long>(g[2])), cpp_int(static_cast<long long>(g[3]))};
      letters.push_back(m);
      letters.push_back({m[3], -m[1], -m[2], m[0]});
    }
    enumerate_words<cpp_int>(letters, k, budget, visited, out, [](const cpp_int& x) { return x.convert_to<double>(); });
  } else {
    std::vector<Mat2T<long double>> letters;
    for (auto& g : G.generators) {
      Mat2T<long double> m{g[0], g[1], g[2], g[3]};
      letters.push_back(m);
      letters.push_back({m[3], -m[1], -m[2], m[0]});
    }
    enumerate_words<long double>(letters, k, budget, visited, out, [](long double x) { return static_cast<double>(x); });
  }
  return out;
}

inline Mat2 word_matrix(const FuchsianGroup& G, const std::vector<int>& w) {
  Mat2 m{1, 0, 0, 1};
  for (int x : w) {
    const Mat2& g = G.generators[x / 2];
    m = mat_mul(m, x & 1 ? mat_inv(g) : g);
  }
  return m;
}

inline LengthEntry entry_from_class(const FuchsianGroup& G, const RawClass& c) {
  LengthEntry e;
  e.length = c.length;
  e.word = word_to_string(c.word);
  size_t p = word_period(c.word);
  if (p == c.word.size()) {
    e.primitive_length = c.length;
  } else {
    std::vector<int> root(c.word.begin(), c.word.begin() + static_cast<long>(p));
    Mat2 m = word_matrix(G, root);
    e.primitive_length = length_from_trace(m[0] + m[3]);
  }
  return e;
}

inline void sort_spectrum(std::vector<LengthEntry>& v) {
  std::sort(v.begin(), v.end(), [](const LengthEntry& a, const LengthEntry& b) {
    if (a.length != b.length) return a.length < b.length;
    return a.word < b.word;
  });
}

}  // namespace detail

// One entry per conjugacy class of the free group with length <= L_max.  Word
// lengths are raised until two consecutive lengths contribute nothing below
// L_max (or max_word_length is hit, which is reported as a warning).
inline LengthSpectrum schottky_lengths(const FuchsianGroup& G, double L_max, const EnumOptions& opt = {}) {
  detail::validate_group(G);
  if (!(L_max > 0.0)) fail(ErrorKind::Domain, "L_max must be positive");
  LengthSpectrum S;
  long long budget = opt.word_budget;
  int empty_run = 0;
  int k = 1;
  for (; k <= opt.max_word_length; ++k) {
    auto raw = detail::classes_of_length(G, k, budget, S.words_visited);
    bool any = false;
    for (auto& c : raw) {
      if (c.length > L_max) continue;
      any = true;
      S.entries.push_back(detail::entry_from_class(G, c));
    }
    empty_run = any ? 0 : empty_run + 1;
    if (empty_run >= 2) break;
  }
  if (k > opt.max_word_length) {
    S.warnings.push_back("max_word_length reached before the length cutoff was exhausted");
    k = opt.max_word_length;
  }
  S.complete_to_word_length = k;
  S.complete_to_length = L_max;
  detail::sort_spectrum(S.entries);
  return S;
}

// Enumeration restricted to a fixed word length (used by the oracle comparisons).
inline LengthSpectrum schottky_classes_by_word_length(const FuchsianGroup& G, int max_len, const EnumOptions& opt = {}) {
  detail::validate_group(G);
  LengthSpectrum S;
  long long budget = opt.word_budget;
  for (int k = 1; k <= max_len; ++k)
    for (auto& c : detail::classes_of_length(G, k, budget, S.words_visited)) S.entries.push_back(detail::entry_from_class(G, c));
  S.complete_to_word_length = max_len;
  detail::sort_spectrum(S.entries);
  return S;
}

// Surface groups: the free-group classes are merged when traces agree to
// dedup_tol and a conjugator of word length <= conjugator_depth carries one
// representative onto the other (up to sign).  The result is heuristic.
inline LengthSpectrum surface_group_lengths(const FuchsianGroup& G, double L_max, const EnumOptions& opt = {}) {
  LengthSpectrum S = schottky_lengths(G, L_max, opt);
  if (G.relator.empty()) return S;
  S.heuristic = true;
  {
    Mat2 r = detail::word_matrix(G, G.relator);
    double off = std::max({std::abs(std::abs(r[0]) - 1.0), std::abs(r[1]), std::abs(r[2]), std::abs(std::abs(r[3]) - 1.0)});
    if (off > 1e-8) S.warnings.push_back("relator does not evaluate to +-identity (deviation " + std::to_string(off) + ")");
  }
  // conjugators: all reduced words of length <= depth
  const int nl = 2 * static_cast<int>(G.generators.size());
  std::vector<Mat2> conj{{1, 0, 0, 1}};
  {
    std::vector<std::pair<Mat2, int>> frontier{{{1, 0, 0, 1}, -1}};
    for (int d = 1; d <= opt.conjugator_depth; ++d) {
      std::vector<std::pair<Mat2, int>> nxt;
      for (auto& [m, last] : frontier)
        for (int x = 0; x < nl; ++x) {
          if (last >= 0 && x == inverse_letter(last)) continue;
          const Mat2& g = G.generators[x / 2];
          Mat2 p = detail::mat_mul(m, x & 1 ? detail::mat_inv(g) : g);
          nxt.emplace_back(p, x);
          conj.push_back(p);
        }
      frontier = std::move(nxt);
    }
  }
  std::vector<Mat2> mats;
  for (auto& e : S.entries) mats.push_back(detail::word_matrix(G, word_from_string(e.word)));
  auto close = [&](const Mat2& a, const Mat2& b, double sgn) {
    double scale = 1.0;
    for (int i = 0; i < 4; ++i) scale = std::max(scale, std::abs(a[i]));
    for (int i = 0; i < 4; ++i)
      if (std::abs(a[i] - sgn * b[i]) > opt.dedup_tol * scale) return false;
    return true;
  };
  std::vector<char> dead(S.entries.size(), 0);
  for (size_t i = 0; i < S.entries.size(); ++i) {
    if (dead[i]) continue;
    for (size_t j = i + 1; j < S.entries.size(); ++j) {
      if (dead[j]) continue;
      double li = S.entries[i].length, lj = S.entries[j].length;
      if (std::abs(li - lj) > opt.dedup_tol * std::max(1.0, li)) break;  // sorted by length
      bool merged = false;
      for (auto& c : conj) {
        Mat2 t = detail::mat_mul(detail::mat_mul(c, mats[j]), detail::mat_inv(c));
        if (close(t, mats[i], 1.0) || close(t, mats[i], -1.0)) {
          merged = true;
          break;
        }
      }
      if (merged) {
        dead[j] = 1;
        S.warnings.push_back("merged " + S.entries[j].word + " into " + S.entries[i].word);
      } else {
        S.warnings.push_back("ambiguous: " + S.entries[j].word + " and " + S.entries[i].word +
                             " share a trace but no conjugator was found");
      }
    }
  }
  std::vector<LengthEntry> kept;
  for (size_t i = 0; i < S.entries.size(); ++i)
    if (!dead[i]) kept.push_back(S.entries[i]);
  S.entries = std::move(kept);
  return S;
}

// Fundamental group of the regular octagon surface of genus 2 (all angles
// pi/4), realized in SL2(R) via the Cayley transform from the disc.
inline FuchsianGroup regular_octagon_group() {
  using C = std::complex<double>;
  const double ch = 1.0 + std::sqrt(2.0);
  const double sh = std::sqrt(ch * ch - 1.0);
  FuchsianGroup G;
  // z -> (z - i)/(z + i) carries the upper half plane to the disc
  const C I(0.0, 1.0);
  const C c[4] = {1.0, -I, 1.0, I};
  const C ci[4] = {I / (2.0 * I), I / (2.0 * I), -1.0 / (2.0 * I), 1.0 / (2.0 * I)};
  auto mul = [](const C* x, const C* y, C* r) {
    r[0] = x[0] * y[0] + x[1] * y[2];
    r[1] = x[0] * y[1] + x[1] * y[3];
    r[2] = x[2] * y[0] + x[3] * y[2];
    r[3] = x[2] * y[1] + x[3] * y[3];
  };
  for (int k = 0; k < 4; ++k) {
    C e = std::polar(1.0, k * M_PI / 4.0);
    C disc[4] = {ch, sh * e, sh * std::conj(e), ch};
    C t[4], h[4];
    mul(disc, c, t);
    mul(ci, t, h);
    G.generators.push_back({h[0].real(), h[1].real(), h[2].real(), h[3].real()});
  }
  // a0 a1^-1 a2 a3^-1 a0^-1 a1 a2^-1 a3
  G.relator = {0, 3, 4, 7, 1, 2, 5, 6};
  return G;
}

// ---------------------------------------------------------------- JSON I/O

inline void validate_spectrum(const LengthSpectrum& S) {
  for (size_t i = 0; i < S.entries.size(); ++i) {
    auto& e = S.entries[i];
    std::string where = "entries[" + std::to_string(i) + "]";
    if (!(e.length > 0.0) || !std::isfinite(e.length)) fail(ErrorKind::Schema, where + ".length must be positive");
    if (!(e.primitive_length > 0.0)) fail(ErrorKind::Schema, where + ".primitive_length must be positive");
    if (e.primitive_length > e.length * (1.0 + 1e-12)) fail(ErrorKind::Schema, where + ": primitive_length exceeds length");
    double mu = e.mu();
    if (std::abs(mu - std::round(mu)) > 1e-9 * std::max(1.0, mu))
      fail(ErrorKind::Schema, where + ": length/primitive_length = " + std::to_string(mu) + " is not an integer");
    if (i > 0 && e.length < S.entries[i - 1].length) fail(ErrorKind::Schema, where + ": entries must be sorted by length");
  }
}

inline nlohmann::ordered_json spectrum_to_json(const LengthSpectrum& S) {
  nlohmann::ordered_json j;
  j["kind"] = "length_spectrum";
  j["heuristic"] = S.heuristic;
  if (std::isfinite(S.complete_to_length)) j["complete_to"] = S.complete_to_length;
  auto arr = nlohmann::ordered_json::array();
  for (auto& e : S.entries) {
    nlohmann::ordered_json x;
    x["length"] = e.length;
    x["primitive_length"] = e.primitive_length;
    x["mult_weight"] = e.mult_weight;
    x["sigma_trace"] = e.sigma_trace;
    x["phi_trace"] = e.phi_trace;
    x["class_weight"] = e.class_weight;
    if (!e.word.empty()) x["word"] = e.word;
    arr.push_back(x);
  }
  j["entries"] = arr;
  return j;
}

inline LengthSpectrum spectrum_from_json(const nlohmann::json& j) {
  LengthSpectrum S;
  const nlohmann::json* arr = &j;
  if (j.is_object()) {
    if (!j.contains("entries")) fail(ErrorKind::Schema, "missing field 'entries'");
    arr = &j.at("entries");
    if (j.contains("heuristic")) {
      if (!j["heuristic"].is_boolean()) fail(ErrorKind::Schema, "field 'heuristic' must be boolean");
      S.heuristic = j["heuristic"].get<bool>();
    }
    if (j.contains("complete_to")) {
      if (!j["complete_to"].is_number()) fail(ErrorKind::Schema, "field 'complete_to' must be a number");
      S.complete_to_length = j["complete_to"].get<double>();
    }
  }
  if (!arr->is_array()) fail(ErrorKind::Schema, "'entries' must be an array");
  for (size_t i = 0; i < arr->size(); ++i) {
    const auto& x = (*arr)[i];
    std::string where = "entries[" + std::to_string(i) + "]";
    if (!x.is_object()) fail(ErrorKind::Schema, where + " must be an object");
    for (auto it = x.begin(); it != x.end(); ++it) {
      static const char* known[] = {"length", "primitive_length", "mult_weight", "sigma_trace", "phi_trace", "class_weight", "word"};
      if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return it.key() == k; }) == std::end(known))
        fail(ErrorKind::Schema, where + ": unknown field '" + it.key() + "'");
    }
    auto num = [&](const char* key, double def, bool required) {
      if (!x.contains(key)) {
        if (required) fail(ErrorKind::Schema, where + ": missing field '" + key + "'");
        return def;
      }
      if (!x[key].is_number()) fail(ErrorKind::Schema, where + "." + key + " must be a number");
      return x[key].get<double>();
    };
    LengthEntry e;
    e.length = num("length", 0.0, true);
    e.primitive_length = num("primitive_length", e.length, false);
    e.mult_weight = num("mult_weight", 1.0, false);
    e.sigma_trace = num("sigma_trace", 1.0, false);
    e.phi_trace = num("phi_trace", 1.0, false);
    if (x.contains("class_weight")) {
      if (!x["class_weight"].is_number_integer()) fail(ErrorKind::Schema, where + ".class_weight must be an integer");
      e.class_weight = x["class_weight"].get<long long>();
    }
    if (x.contains("word")) {
      if (!x["word"].is_string()) fail(ErrorKind::Schema, where + ".word must be a string");
      e.word = x["word"].get<std::string>();
    }
    S.entries.push_back(e);
  }
  validate_spectrum(S);
  return S;
}

inline nlohmann::json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // report a line number alongside the byte offset
    size_t line = 1 + static_cast<size_t>(std::count(text.begin(), text.begin() + static_cast<long>(std::min(e.byte, text.size())), '\n'));
    fail(ErrorKind::Schema, origin + ": line " + std::to_string(line) + ": " + e.what());
  }
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Argument, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline LengthSpectrum load_spectrum(const std::string& path) {
  return spectrum_from_json(parse_json_text(read_text_file(path), path));
}

inline void save_spectrum(const LengthSpectrum& S, const std::string& path) {
  validate_spectrum(S);
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Argument, "cannot write " + path);
  out << spectrum_to_json(S).dump(2) << "\n";
}

inline FuchsianGroup group_from_json(const nlohmann::json& j) {
  FuchsianGroup G;
  if (!j.is_object() || !j.contains("generators") || !j["generators"].is_array())
    fail(ErrorKind::Schema, "group file needs a 'generators' array");
  for (size_t i = 0; i < j["generators"].size(); ++i) {
    const auto& g = j["generators"][i];
    if (!g.is_array() || g.size() != 4) fail(ErrorKind::Schema, "generators[" + std::to_string(i) + "] must be [a, b, c, d]");
    Mat2 m;
    for (int k = 0; k < 4; ++k) {
      if (!g[k].is_number()) fail(ErrorKind::Schema, "generators[" + std::to_string(i) + "] entries must be numbers");
      m[k] = g[k].get<double>();
    }
    G.generators.push_back(m);
  }
  if (j.contains("relator")) {
    if (!j["relator"].is_string()) fail(ErrorKind::Schema, "'relator' must be a word string");
    G.relator = word_from_string(j["relator"].get<std::string>());
  }
  detail::validate_group(G);
  return G;
}

}  // namespace zetaforge
