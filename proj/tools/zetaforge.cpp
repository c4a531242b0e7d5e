// zetaforge: batch command-line front end.
#include <CLI11.hpp>
#include <json.hpp>

#include <zetaforge/complexes.hpp>
#include <zetaforge/detreg.hpp>
#include <zetaforge/divisor.hpp>
#include <zetaforge/geodesics.hpp>
#include <zetaforge/gzeta.hpp>
#include <zetaforge/identities.hpp>
#include <zetaforge/json_io.hpp>
#include <zetaforge/theta.hpp>
#include <zetaforge/torus.hpp>

#include <atomic>
#include <charconv>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace zf = zetaforge;
using zf::cplx;
using zf::ojson;

namespace {

constexpr const char* kToolVersion = "zetaforge 1.0.0";
constexpr double kEps = std::numeric_limits<double>::epsilon();

struct ArgumentError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ------------------------------------------------------------ output

std::string shortest(double x) {
  if (!std::isfinite(x)) return "null";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  std::string s(buf, res.ptr);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

void write_json(std::ostream& os, const ojson& j, int indent, int depth) {
  auto pad = [&](int d) { os << '\n' << std::string(static_cast<size_t>(indent * d), ' '); };
  switch (j.type()) {
    case ojson::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ',';
        first = false;
        pad(depth + 1);
        os << ojson(it.key()).dump() << ": ";
        write_json(os, it.value(), indent, depth + 1);
      }
      pad(depth);
      os << '}';
      return;
    }
    case ojson::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      bool flat = std::all_of(j.begin(), j.end(), [](const ojson& x) { return x.is_primitive(); });
      os << '[';
      bool first = true;
      for (auto& x : j) {
        if (!first) os << (flat ? ", " : ",");
        first = false;
        if (!flat) pad(depth + 1);
        write_json(os, x, indent, depth + 1);
      }
      if (!flat) pad(depth);
      os << ']';
      return;
    }
    case ojson::value_t::number_float:
      os << shortest(j.get<double>());
      return;
    default:
      os << j.dump();
  }
}

std::string csv_cell(const ojson& v) {
  std::string s;
  if (v.is_number_float()) return shortest(v.get<double>());
  if (v.is_string()) s = v.get<std::string>();
  else if (v.is_null()) return "";
  else if (v.is_primitive()) return v.dump();
  else {
    std::ostringstream os;
    write_json(os, v, 0, 0);
    s = os.str();
    s.erase(std::remove(s.begin(), s.end(), '\n'), s.end());
  }
  if (s.find_first_of(",\"\n") != std::string::npos) {
    std::string q = "\"";
    for (char c : s) q += (c == '"') ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  }
  return s;
}

// Rows if the result has a "rows" table, otherwise one row of its scalar fields.
std::string to_csv(const ojson& result) {
  std::vector<ojson> rows;
  if (result.contains("rows") && result["rows"].is_array()) {
    for (auto& r : result["rows"]) rows.push_back(r);
  } else {
    ojson r = ojson::object();
    for (auto it = result.begin(); it != result.end(); ++it)
      if (it.value().is_primitive()) r[it.key()] = it.value();
    rows.push_back(r);
  }
  std::vector<std::string> header;
  for (auto& r : rows)
    for (auto it = r.begin(); it != r.end(); ++it)
      if (std::find(header.begin(), header.end(), it.key()) == header.end()) header.push_back(it.key());
  std::ostringstream os;
  for (size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << csv_cell(ojson(header[i]));
  os << '\n';
  for (auto& r : rows) {
    for (size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << (r.contains(header[i]) ? csv_cell(r[header[i]]) : "");
    os << '\n';
  }
  return os.str();
}

// ------------------------------------------------------------ parsing helpers

std::vector<double> parse_grid(const std::string& text, const char* what) {
  std::vector<double> out;
  auto num = [&](const std::string& s) {
    double v = 0.0;
    const char* b = s.data();
    const char* e = b + s.size();
    while (b < e && *b == ' ') ++b;
    if (b < e && *b == '+') ++b;
    auto r = std::from_chars(b, e, v);
    if (r.ec != std::errc() || r.ptr != e || !std::isfinite(v)) throw ArgumentError(std::string(what) + ": cannot parse number '" + s + "'");
    return v;
  };
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string p;
    while (std::getline(ss, p, ':')) parts.push_back(p);
    if (parts.size() != 3) throw ArgumentError(std::string(what) + ": a grid is start:stop:step");
    double a = num(parts[0]), b = num(parts[1]), h = num(parts[2]);
    if (!(h > 0.0) || b < a) throw ArgumentError(std::string(what) + ": grid needs step > 0 and stop >= start");
    long long n = static_cast<long long>(std::floor((b - a) / h + 1e-9));
    if (n > 1000000) throw ArgumentError(std::string(what) + ": grid has too many points");
    for (long long k = 0; k <= n; ++k) out.push_back(a + double(k) * h);
    return out;
  }
  std::stringstream ss(text);
  std::string p;
  while (std::getline(ss, p, ',')) out.push_back(num(p));
  if (out.empty()) throw ArgumentError(std::string(what) + ": empty list");
  return out;
}

zf::PolyQ parse_poly(const std::vector<std::string>& coeffs, const std::string& parity) {
  std::vector<zf::Rational> c;
  for (auto& s : coeffs) {
    try {
      c.emplace_back(s);
    } catch (const std::exception&) {
      throw ArgumentError("--poly: cannot parse coefficient '" + s + "'");
    }
  }
  zf::Parity p;
  try {
    p = zf::parity_from_name(parity);
  } catch (const zf::Error&) {
    throw ArgumentError("--parity must be even, odd or none");
  }
  return zf::PolyQ(c, p);
}

ojson load_json_file(const std::string& path) {
  return ojson::parse(zf::parse_json_text(zf::read_text_file(path), path).dump());
}

zf::LengthSpectrum load_spectrum_doc(const std::string& path) {
  auto j = zf::parse_json_text(zf::read_text_file(path), path);
  if (j.is_object() && j.contains("spectrum")) return zf::spectrum_from_json(j["spectrum"]);
  return zf::spectrum_from_json(j);
}

unsigned resolve_threads(int requested) {
  if (requested > 0) return static_cast<unsigned>(requested);
  if (const char* env = std::getenv("ZETAFORGE_THREADS")) {
    int v = 0;
    std::string s(env);
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size() || v < 1) throw ArgumentError("ZETAFORGE_THREADS must be a positive integer");
    return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// Evaluates f(0..n-1) on a pool; results are stored by index so the merge is
// independent of scheduling.  The first failure in index order is rethrown.
template <class F>
std::vector<ojson> parallel_rows(size_t n, unsigned threads, F&& f) {
  std::vector<ojson> out(n);
  std::vector<std::exception_ptr> errs(n);
  std::atomic<size_t> next{0};
  auto work = [&] {
    for (size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        out[i] = f(i);
      } catch (...) {
        errs[i] = std::current_exception();
      }
    }
  };
  unsigned t = std::min<unsigned>(threads, static_cast<unsigned>(std::max<size_t>(n, 1)));
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < t; ++k) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
  return out;
}

ojson complex_json(const cplx& z) { return ojson::array({z.real(), z.imag()}); }

// ------------------------------------------------------------ state

struct Context {
  unsigned threads = 1;
  ojson truncation = ojson::object();
};

struct Options {
  // shared
  std::string divisor, spectrum, gens, builtin, complex_file, spectra_file, region = "-1:1:-7:7", mode = "auto";
  std::string lambda_grid, tau_grid, grid = "1:3:0.5", parity = "none", form = "auto", a_list;
  std::vector<double> s{2.0, 0.0}, z{0.0, 1.0};
  std::vector<std::string> poly;
  std::vector<long long> betti;
  std::vector<int> Ns{1, 2, 4, 8};
  double lmax = 8.0, u = 0.0, v = 0.0, t = 0.5, T = 1.0, imag = 0.0, half_width = 1.0, l2_lambda = 0.0;
  int m = 1, r_max = 2, max_word_length = 64, conjugator_depth = 4, pole_grid = 81;
  long long word_budget = 20000000;
  bool sl2 = false, require_complete = false;
};

// ------------------------------------------------------------ commands

ojson cmd_detreg(const Options& o, Context&) {
  auto d = zf::load_divisor(o.divisor);
  auto r = zf::det_reg(d);
  ojson j;
  j["value"] = r.value;
  j["abs_error_estimate"] = r.abs_error_estimate;
  j["log_value"] = r.log_value;
  j["log_abs_error_estimate"] = r.abs_error_estimate / std::max(r.value, std::numeric_limits<double>::min());
  j["zeta_at_zero"] = r.zeta0;
  j["zeta_at_zero_abs_error_estimate"] = 8.0 * kEps * (1.0 + std::abs(r.zeta0));
  j["kernel_excluded"] = d.kernel;
  j["method"] = r.method;
  return j;
}

ojson cmd_charfn(const Options& o, Context& ctx) {
  auto d = zf::load_divisor(o.divisor);
  auto grid = parse_grid(o.lambda_grid, "--lambda");
  ojson j;
  j["rows"] = parallel_rows(grid.size(), ctx.threads, [&](size_t i) {
    double lam = grid[i];
    double v = zf::char_fn(d, lam);
    ojson r;
    r["lambda"] = lam;
    r["value"] = v;
    r["abs_error_estimate"] = std::abs(v) * 4e-16 * (1.0 + std::abs(std::log(std::abs(v) + 1e-300))) * (1.0 + double(d.finite.size()));
    return r;
  });
  j["method"] = "exp(-zeta'(0)) of the shifted divisor";
  return j;
}

ojson cmd_fredholm(const Options& o, Context& ctx) {
  auto d = zf::load_divisor(o.divisor);
  auto f = zf::fredholm_det_inverse(d);
  auto cmp = zf::fredholm_vs_raySinger(d);
  ojson j;
  j["value"] = f.value.real();
  j["value_imag"] = f.value.imag();
  j["abs_error_estimate"] = f.tail_bound + 8.0 * kEps * std::abs(f.value);
  j["ray_singer_ratio"] = cmp.rhs;
  j["ray_singer_abs_error_estimate"] = 16.0 * kEps * std::abs(cmp.rhs);
  j["discrepancy"] = cmp.discrepancy;
  j["tail_bound"] = f.tail_bound;
  j["method"] = f.method;
  ctx.truncation["fredholm_tail_bound"] = f.tail_bound;
  return j;
}

zf::EulerConfig euler_config(const Options& o) {
  zf::EulerConfig c;
  c.require_complete = o.require_complete;
  return c;
}

cplx s_value(const Options& o) {
  if (o.s.size() != 2) throw ArgumentError("--s takes two numbers: real and imaginary part");
  return {o.s[0], o.s[1]};
}

ojson cmd_selberg(const Options& o, Context& ctx) {
  auto S = load_spectrum_doc(o.spectrum);
  cplx s = s_value(o);
  auto cfg = euler_config(o);
  zf::EulerResult r;
  if (o.form == "product") r = zf::log_selberg_Z_product(S, s, cfg);
  else if (o.form == "classes") r = zf::log_selberg_Z_classes(S, s, cfg);
  else if (o.form == "auto") r = zf::log_selberg_Z(S, s, cfg);
  else throw ArgumentError("--form must be auto, product or classes");
  double rel = r.tail_bound + r.class_tail_estimate + 16.0 * kEps * (1.0 + std::abs(r.log_value)) * double(1 + S.entries.size());
  ojson j;
  j["value"] = r.value.real();
  j["value_imag"] = r.value.imag();
  j["abs_error_estimate"] = std::abs(r.value) * rel;
  j["log_value"] = r.log_value.real();
  j["log_value_imag"] = r.log_value.imag();
  j["log_abs_error_estimate"] = rel;
  j["tail_bound"] = r.tail_bound;
  j["class_tail_estimate"] = r.class_tail_estimate;
  j["heuristic_spectrum"] = S.heuristic;
  j["method"] = r.method;
  ctx.truncation["euler_tail_bound"] = r.tail_bound;
  ctx.truncation["class_tail_estimate"] = r.class_tail_estimate;
  return j;
}

ojson cmd_ruelle(const Options& o, Context& ctx) {
  auto S = load_spectrum_doc(o.spectrum);
  cplx s = s_value(o);
  auto cfg = euler_config(o);
  auto rep = zf::ruelle_R(S, s, cfg);
  auto lr = zf::log_ruelle_R(S, s, cfg);
  double rel = lr.tail_bound + lr.class_tail_estimate + 16.0 * kEps * double(1 + S.entries.size());
  ojson j;
  j["value"] = rep.R.real();
  j["value_imag"] = rep.R.imag();
  j["abs_error_estimate"] = std::abs(rep.R) * rel;
  j["z_ratio"] = rep.Z_ratio.real();
  j["z_ratio_imag"] = rep.Z_ratio.imag();
  j["z_ratio_abs_error_estimate"] = std::abs(rep.Z_ratio) * (rel + rep.tail_bound);
  j["discrepancy"] = rep.discrepancy;
  j["tail_bound"] = rep.tail_bound;
  j["class_tail_estimate"] = lr.class_tail_estimate;
  j["method"] = lr.method;
  ctx.truncation["euler_tail_bound"] = rep.tail_bound;
  return j;
}

ojson cmd_lengths(const Options& o, Context& ctx) {
  zf::FuchsianGroup G;
  if (!o.builtin.empty()) {
    if (o.builtin == "octagon") G = zf::regular_octagon_group();
    else if (o.builtin == "schottky") G.generators = {zf::Mat2{5, 12, 2, 5}, zf::Mat2{5, 2, 12, 5}};
    else throw ArgumentError("--builtin must be octagon or schottky");
  } else if (!o.gens.empty()) {
    G = zf::group_from_json(zf::parse_json_text(zf::read_text_file(o.gens), o.gens));
  } else {
    throw ArgumentError("fuchsian-lengths needs --gens or --builtin");
  }
  zf::EnumOptions eo;
  eo.max_word_length = o.max_word_length;
  eo.conjugator_depth = o.conjugator_depth;
  eo.word_budget = o.word_budget;
  std::string mode = o.mode;
  if (mode == "auto") mode = G.relator.empty() ? "schottky" : "surface";
  zf::LengthSpectrum S;
  if (mode == "schottky") S = zf::schottky_lengths(G, o.lmax, eo);
  else if (mode == "surface") S = zf::surface_group_lengths(G, o.lmax, eo);
  else throw ArgumentError("--mode must be auto, schottky or surface");
  ojson j;
  j["count"] = S.entries.size();
  double lmax = 0.0;
  for (auto& e : S.entries) lmax = std::max(lmax, e.length);
  // traces are exact for integral generators; otherwise products accumulate
  bool integral = std::all_of(G.generators.begin(), G.generators.end(), [](const zf::Mat2& m) {
    return std::all_of(m.begin(), m.end(), [](double x) { return std::floor(x) == x; });
  });
  j["length_abs_error_estimate"] = (integral ? 4.0 : 64.0 * double(std::max(1, S.complete_to_word_length))) * kEps * std::max(1.0, lmax);
  j["complete_to_word_length"] = S.complete_to_word_length;
  j["words_visited"] = S.words_visited;
  j["mode"] = mode;
  j["warnings"] = S.warnings;
  j["spectrum"] = zf::spectrum_to_json(S);
  ctx.truncation["complete_to_word_length"] = S.complete_to_word_length;
  return j;
}

zf::TorusSpec torus_spec(const Options& o) {
  if (o.z.size() != 2) throw ArgumentError("--z takes two numbers: real and imaginary part");
  zf::TorusSpec s{cplx(o.z[0], o.z[1]), o.u, o.v};
  s.validate();
  return s;
}

ojson cmd_torus_torsion(const Options& o, Context&) {
  auto s = torus_spec(o);
  auto a = zf::hol_torsion(s, 0, o.T);
  auto b = zf::hol_torsion(s, 0, 0.5 * o.T);
  ojson j;
  j["value"] = a.spectral;
  j["abs_error_estimate"] = std::abs(a.spectral - b.spectral) + 8.0 * kEps * a.spectral;
  j["closed_form"] = a.closed_form;
  j["closed_form_abs_error_estimate"] = 8.0 * kEps * a.closed_form;
  j["log_discrepancy"] = a.log_discrepancy;
  j["split_parameter"] = o.T;
  j["method"] = "Mellin split of the Epstein zeta function with Poisson-summed small-time side";
  return j;
}

ojson cmd_tower(const Options& o, Context& ctx) {
  auto s = torus_spec(o);
  auto rep = zf::tower_traces(s, o.Ns, o.t);
  ojson j;
  std::vector<ojson> rows;
  for (size_t i = 0; i < rep.index.size(); ++i) {
    ojson r;
    r["N"] = rep.index[i];
    r["scaled_trace"] = rep.scaled_traces[i];
    r["gamma_trace"] = rep.gamma_trace;
    r["diff"] = rep.scaled_traces[i] - rep.gamma_trace;
    r["abs_error_estimate"] = 64.0 * kEps * std::abs(rep.scaled_traces[i]);
    rows.push_back(r);
  }
  j["rows"] = rows;
  j["t"] = rep.t;
  if (o.l2_lambda > 0.0) {
    auto ns = o.Ns;
    auto l2rows = parallel_rows(ns.size(), ctx.threads, [&](size_t i) {
      auto rep2 = zf::l2_char_fn(s, o.l2_lambda, {ns[i]});
      ojson r;
      r["N"] = ns[i];
      r["quotient"] = rep2.quotients[0];
      r["closed_form"] = rep2.closed_form;
      r["diff"] = rep2.quotients[0] - rep2.closed_form;
      r["abs_error_estimate"] = 1e-12 * std::abs(rep2.quotients[0]);
      return r;
    });
    ojson l2;
    l2["lambda"] = o.l2_lambda;
    l2["rows"] = l2rows;
    j["l2_characteristic_function"] = l2;
  }
  return j;
}

ojson cmd_euler_char(const Options& o, Context&) {
  if (o.betti.empty()) throw ArgumentError("--betti needs at least one number");
  for (auto b : o.betti)
    if (b < 0) throw ArgumentError("--betti entries must be nonnegative");
  ojson j;
  std::vector<ojson> rows;
  for (int r = 0; r <= static_cast<int>(o.betti.size()); ++r) {
    ojson row;
    row["r"] = r;
    row["chi"] = zf::chi_r(o.betti, r);
    row["abs_error_estimate"] = 0;
    rows.push_back(row);
  }
  j["rows"] = rows;
  auto g = zf::chi_gen(o.betti);
  j["chi_gen_r"] = g.r;
  j["chi_gen"] = g.value;
  j["abs_error_estimate"] = 0;
  j["method"] = "exact integer arithmetic";
  return j;
}

Eigen::MatrixXd matrix_from_json(const ojson& m, size_t idx) {
  std::string where = "differential " + std::to_string(idx);
  if (!m.is_array() || m.empty()) throw zf::Error(zf::ErrorKind::Schema, where + ": expected a nonempty list of rows");
  size_t cols = m[0].is_array() ? m[0].size() : 0;
  Eigen::MatrixXd M(static_cast<long>(m.size()), static_cast<long>(cols));
  for (size_t i = 0; i < m.size(); ++i) {
    if (!m[i].is_array() || m[i].size() != cols) throw zf::Error(zf::ErrorKind::Schema, where + ": rows must have equal length");
    for (size_t k = 0; k < cols; ++k) {
      if (!m[i][k].is_number()) throw zf::Error(zf::ErrorKind::Schema, where + ": entries must be numbers");
      M(static_cast<long>(i), static_cast<long>(k)) = m[i][k].get<double>();
    }
  }
  return M;
}

ojson cmd_torsion(const Options& o, Context&) {
  zf::VirtualSpectra vs;
  ojson j;
  if (!o.complex_file.empty()) {
    ojson c = load_json_file(o.complex_file);
    const ojson& list = c.is_object() && c.contains("differentials") ? c["differentials"] : c;
    if (!list.is_array()) throw zf::Error(zf::ErrorKind::Schema, "complex: expected a list of row-major matrices");
    std::vector<Eigen::MatrixXd> ds;
    for (size_t i = 0; i < list.size(); ++i) ds.push_back(matrix_from_json(list[i], i));
    auto lap = zf::laplacian_spectra(zf::GradedComplex::from_differentials(ds));
    vs = lap.spectra;
    j["kernel_dims"] = lap.kernel_dims;
  } else if (!o.spectra_file.empty()) {
    ojson c = load_json_file(o.spectra_file);
    const ojson& list = c.is_object() && c.contains("degrees") ? c["degrees"] : c;
    if (!list.is_array()) throw zf::Error(zf::ErrorKind::Schema, "spectra: expected a list of per-degree divisors");
    std::vector<zf::SignedMultiset> degs;
    for (size_t i = 0; i < list.size(); ++i) {
      ojson deg = list[i];
      long long sign = 1;
      if (deg.is_object() && deg.contains("sign")) {
        if (!deg["sign"].is_number_integer() || std::abs(deg["sign"].get<long long>()) != 1)
          throw zf::Error(zf::ErrorKind::Schema, "spectra degree " + std::to_string(i) + ": sign must be 1 or -1");
        sign = deg["sign"].get<long long>();
        deg.erase("sign");
      }
      auto d = zf::divisor_from_json(deg);
      if (!d.is_finite()) throw zf::Error(zf::ErrorKind::Domain, "spectra degree " + std::to_string(i) + ": only finite divisors are supported");
      zf::SignedMultiset sm;
      for (auto& [lam, m] : d.finite) sm[lam] += sign * m;
      degs.push_back(sm);
    }
    vs = zf::finite_spectra(degs);
  } else {
    throw ArgumentError("torsion needs --complex or --spectra");
  }
  std::vector<double> logdets;
  for (int p = 0; p <= vs.horizon(); ++p) logdets.push_back(vs.degree_log_det(p));
  j["log_det_by_degree"] = logdets;
  std::vector<ojson> rows;
  for (int r = 0; r <= o.r_max; ++r) {
    ojson row;
    row["r"] = r;
    try {
      auto t = zf::tau_r(vs, r);
      row["tau"] = t.value;
      row["tau_iterated_twist"] = t.iterated_twist_value;
      row["discrepancy"] = t.discrepancy;
      row["abs_error_estimate"] = 64.0 * kEps * std::abs(t.value) * double(1 + vs.horizon()) + t.discrepancy;
    } catch (const zf::Error& e) {
      if (e.kind() != zf::ErrorKind::Hypothesis) throw;
      row["tau"] = nullptr;
      row["abs_error_estimate"] = nullptr;
      row["note"] = e.what();
    }
    rows.push_back(row);
  }
  j["rows"] = rows;
  j["pseudofinite"] = vs.pseudofinite();
  return j;
}

ojson cmd_em(const Options& o, Context&) {
  auto r = zf::em_constant(o.m);
  ojson j;
  j["value"] = r.value;
  j["abs_error_estimate"] = 8.0 * kEps * std::abs(r.value) * (1.0 + std::abs(r.log_value));
  j["exact"] = r.exact_string();
  j["log_value"] = r.log_value;
  j["exponents_integral"] = r.exponents_integral;
  ojson pp = ojson::object();
  for (auto& [p, e] : r.prime_powers)
    if (e != 0) pp[std::to_string(p)] = zf::rational_string(e);
  j["prime_powers"] = pp;
  j["exponential_argument"] = zf::rational_string(r.N);
  j["method"] = "exact rational pipeline";
  return j;
}

ojson cmd_factor_infinity(const Options& o, Context&) {
  auto grid = parse_grid(o.grid, "--grid");
  auto r = zf::factor_infinity_check(grid);
  ojson j;
  std::vector<ojson> rows;
  for (size_t i = 0; i < r.s.size(); ++i) {
    ojson row;
    row["s"] = r.s[i];
    row["log_lhs"] = r.log_lhs[i];
    row["log_rhs"] = r.log_rhs[i];
    row["log_ratio"] = r.log_ratio[i];
    row["log_ratio_with_kernel"] = r.log_ratio_with_kernel[i];
    double err = 0.0;
    zf::l2_log_det_continuous(r.s[i], &err);
    row["abs_error_estimate"] = err + 16.0 * kEps * (1.0 + std::abs(r.log_rhs[i]));
    rows.push_back(row);
  }
  j["rows"] = rows;
  j["spread"] = r.spread;
  j["constant"] = r.constant;
  j["spread_with_kernel"] = r.spread_with_kernel;
  ojson cal;
  cal["small_t_ratio"] = r.calibration.small_t_ratio;
  cal["t"] = r.calibration.t;
  cal["difference"] = r.calibration.difference;
  cal["max_deviation_from_half"] = r.calibration.max_deviation;
  j["calibration"] = cal;
  j["abs_error_estimate"] = r.spread;
  return j;
}

ojson cmd_theta_dual(const Options& o, Context& ctx) {
  if (o.poly.empty()) throw ArgumentError("--poly needs at least one coefficient");
  auto Q = parse_poly(o.poly, o.parity);
  auto grid = parse_grid(o.tau_grid, "--tau-grid");
  ojson j;
  j["rows"] = parallel_rows(grid.size(), ctx.threads, [&](size_t i) {
    cplx tau(grid[i], o.imag);
    cplx v = zf::theta_dual(Q, tau);
    ojson r;
    r["tau"] = tau.real();
    r["tau_imag"] = tau.imag();
    r["value"] = v.real();
    r["value_imag"] = v.imag();
    double err = 64.0 * kEps * std::abs(v) * double(1 + Q.degree());
    if (tau.real() > 0.05) {
      double d = std::abs(v - zf::theta_dual_series(Q, tau));
      r["series_discrepancy"] = d;
      err = std::max(err, d);
    }
    r["abs_error_estimate"] = err;
    return r;
  });
  j["method"] = "Q(-d/dtau) applied to the geometric kernel";
  return j;
}

ojson region_json(const zf::Region& R) { return ojson::array({R.re_min, R.re_max, R.im_min, R.im_max}); }

zf::Region parse_region(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string p;
  while (std::getline(ss, p, ':')) v.push_back(parse_grid(p, "--region")[0]);
  if (v.size() != 4 || !(v[1] > v[0] && v[3] > v[2])) throw ArgumentError("--region is re_min:re_max:im_min:im_max with nonempty ranges");
  return {v[0], v[1], v[2], v[3]};
}

ojson cmd_theta_poles(const Options& o, Context&) {
  auto R = parse_region(o.region);
  if (o.pole_grid < 9 || o.pole_grid > 2001) throw ArgumentError("--grid-points must lie in [9, 2001]");
  zf::PoleReport rep;
  ojson j;
  if (o.sl2) {
    rep = zf::theta_sl2_poles(R, o.pole_grid);
    j["function"] = "sum (2j+1) exp(-tau (j+1/2))";
  } else {
    if (o.poly.empty()) throw ArgumentError("theta-poles needs --poly or --sl2");
    auto Q = parse_poly(o.poly, o.parity);
    rep = zf::theta_dual_poles(Q, R, o.pole_grid);
    j["function"] = "theta_dual Q = " + Q.to_string();
  }
  j["region"] = region_json(R);
  std::vector<ojson> poles;
  for (auto& p : rep.poles) {
    ojson x;
    x["center"] = p.center.real();
    x["center_imag"] = p.center.imag();
    x["order"] = p.order;
    ojson coeffs = ojson::array();
    for (auto& c : p.coefficients) coeffs.push_back(complex_json(c));
    x["laurent_from_order"] = -p.order;
    x["coefficients"] = coeffs;
    x["residual"] = p.residual;
    x["abs_error_estimate"] = p.residual;
    x["fit_radius"] = p.radius;
    x["matches_claim"] = p.matches_claim;
    poles.push_back(x);
  }
  j["rows"] = poles;
  ojson claimed = ojson::array(), missing = ojson::array(), unclaimed = ojson::array();
  for (auto& c : rep.claimed) claimed.push_back(complex_json(c));
  for (auto& c : rep.claimed_missing) missing.push_back(complex_json(c));
  for (auto& c : rep.unclaimed) unclaimed.push_back(complex_json(c));
  j["claimed_poles"] = claimed;
  j["claimed_order"] = rep.claimed_order;
  j["claimed_missing"] = missing;
  j["unclaimed"] = unclaimed;
  j["agrees_with_claim"] = rep.agrees;
  j["method"] = "grid search of 1/f, multiplicity-corrected Newton, trapezoid Laurent fit";
  return j;
}

ojson cmd_contour_theta(const Options& o, Context& ctx) {
  std::vector<double> a;
  if (!o.divisor.empty()) {
    auto d = zf::load_divisor(o.divisor);
    if (!d.is_finite()) throw zf::Error(zf::ErrorKind::Domain, "contour-theta needs a finite divisor");
    for (long long k = 0; k < d.kernel; ++k) a.push_back(0.0);
    for (auto& [lam, m] : d.finite)
      for (long long k = 0; k < m; ++k) a.push_back(lam);
  } else if (!o.a_list.empty()) {
    for (double x : parse_grid(o.a_list, "--a")) a.push_back(x);
  } else {
    throw ArgumentError("contour-theta needs --a or --divisor");
  }
  auto grid = parse_grid(o.tau_grid, "--tau");
  zf::ContourOptions co;
  co.half_width = o.half_width;
  ojson j;
  j["rows"] = parallel_rows(grid.size(), ctx.threads, [&](size_t i) {
    double tau = grid[i];
    auto c = zf::contour_theta(a, tau, co);
    double direct = 0.0;
    for (double x : a) direct += std::exp(-tau * x);
    ojson r;
    r["tau"] = tau;
    r["value"] = c.value;
    r["abs_error_estimate"] = c.abs_error + std::abs(c.imag_residue);
    r["direct_sum"] = direct;
    r["difference"] = c.value - direct;
    return r;
  });
  j["method"] = "argument principle on Re z = -X, [-X, X], Re z = X";
  return j;
}

ojson cmd_identities(const Options&, Context& ctx) {
  auto probes = zf::identity_probes();
  auto rows = parallel_rows(probes.size(), ctx.threads, [&](size_t i) {
    auto c = zf::run_identity(probes[i].first, probes[i].second);
    ojson r;
    r["name"] = c.name;
    r["passed"] = c.passed;
    r["value"] = c.value;
    r["reference"] = c.reference;
    r["discrepancy"] = c.discrepancy;
    r["abs_error_estimate"] = c.discrepancy;
    r["tolerance"] = c.tolerance;
    if (!c.error.empty()) r["error"] = c.error;
    return r;
  });
  size_t failed = 0;
  for (auto& r : rows)
    if (!r["passed"].get<bool>()) ++failed;
  ojson j;
  j["rows"] = rows;
  j["total"] = rows.size();
  j["failed"] = failed;
  return j;
}

// ------------------------------------------------------------ dispatch

struct Emit {
  bool csv = false;
  std::string out, manifest_out;
};

int report_error(const std::string& command, const std::string& kind, const std::string& message) {
  ojson e;
  e["error"] = {{"kind", kind}, {"message", message}, {"command", command}};
  write_json(std::cout, e, 2, 0);
  std::cout << '\n';
  return 1;
}

int dispatch(std::vector<std::string> args, int depth = 0);

int dispatch(std::vector<std::string> args, int depth) {
  CLI::App app{"zetaforge: zeta-regularized determinants, geometric zeta functions and theta series"};
  app.name("zetaforge");
  app.set_help_all_flag("--help-all", "Show help for every subcommand");
  app.fallthrough();
  Options o;
  Emit emit;
  int threads = 0;
  std::string replay;
  app.add_flag("--csv", emit.csv, "Write CSV instead of JSON");
  app.add_option("--out", emit.out, "Write output to this file instead of stdout");
  app.add_option("--threads", threads, "Worker threads (default: ZETAFORGE_THREADS, then hardware)")->check(CLI::PositiveNumber);
  app.add_option("--manifest", emit.manifest_out, "Also write the run manifest to this file");
  app.add_option("--replay", replay, "Re-run the command recorded in a manifest")->check(CLI::ExistingFile);

  std::map<std::string, std::function<ojson(const Options&, Context&)>> handlers;
  auto sub = [&](const char* name, const char* help, std::function<ojson(const Options&, Context&)> fn) {
    handlers[name] = std::move(fn);
    return app.add_subcommand(name, help);
  };

  auto* detreg = sub("detreg", "Regularized determinant det(D) = exp(-zeta'(0))", cmd_detreg);
  detreg->add_option("--divisor", o.divisor, "Divisor JSON file")->required()->check(CLI::ExistingFile);

  auto* charfn = sub("charfn", "Characteristic function det(D + lambda)", cmd_charfn);
  charfn->add_option("--divisor", o.divisor, "Divisor JSON file")->required()->check(CLI::ExistingFile);
  charfn->add_option("--lambda", o.lambda_grid, "Values: a,b,c or start:stop:step")->required();

  auto* fred = sub("fredholm", "Fredholm determinant det(1 + D^{-1}) against det(D+1)/det(D)", cmd_fredholm);
  fred->add_option("--divisor", o.divisor, "Divisor JSON file")->required()->check(CLI::ExistingFile);

  for (auto [name, help, fn] : {std::tuple{"selberg", "Selberg zeta function from a length spectrum", &cmd_selberg},
                                std::tuple{"ruelle", "Ruelle zeta function and Z(s)/Z(s+1)", &cmd_ruelle}}) {
    auto* c = sub(name, help, fn);
    c->add_option("--spectrum", o.spectrum, "Length-spectrum JSON file")->required()->check(CLI::ExistingFile);
    c->add_option("--s", o.s, "Real and imaginary part of s")->expected(2)->allow_extra_args(false);
    c->add_flag("--require-complete", o.require_complete, "Fail when classes beyond the enumeration could matter");
    if (std::string(name) == "selberg") c->add_option("--form", o.form, "auto, product or classes");
  }

  auto* lengths = sub("fuchsian-lengths", "Enumerate closed geodesics of a Fuchsian group", cmd_lengths);
  lengths->add_option("--gens", o.gens, "Group JSON file: {\"generators\": [[a,b,c,d], ...], \"relator\": \"...\"}")->check(CLI::ExistingFile);
  lengths->add_option("--builtin", o.builtin, "octagon or schottky");
  lengths->add_option("--lmax", o.lmax, "Largest length")->required();
  lengths->add_option("--mode", o.mode, "auto, schottky or surface");
  lengths->add_option("--max-word-length", o.max_word_length, "Word-length cap")->check(CLI::Range(1, 256));
  lengths->add_option("--conjugator-depth", o.conjugator_depth, "Conjugator search depth for surface groups")->check(CLI::Range(0, 12));
  lengths->add_option("--word-budget", o.word_budget, "Maximum number of words visited")->check(CLI::PositiveNumber);

  auto torus_opts = [&](CLI::App* c) {
    c->add_option("--z", o.z, "Real and imaginary part of the modulus")->expected(2)->allow_extra_args(false);
    c->add_option("--u", o.u, "Character parameter u");
    c->add_option("--v", o.v, "Character parameter v");
  };
  auto* tt = sub("torus-torsion", "Holomorphic torsion of a flat torus with a character", cmd_torus_torsion);
  torus_opts(tt);
  tt->add_option("--split", o.T, "Mellin split point")->check(CLI::PositiveNumber);

  auto* tower = sub("tower", "Heat traces along the sublattice tower N<1,z>", cmd_tower);
  torus_opts(tower);
  tower->add_option("--t", o.t, "Time")->check(CLI::PositiveNumber);
  tower->add_option("--N", o.Ns, "Tower indices")->delimiter(',');
  tower->add_option("--lambda", o.l2_lambda, "Also compare det(Delta_N + lambda)^{1/N^2} with the L2 determinant")->check(CLI::PositiveNumber);

  auto* ec = sub("euler-char", "Higher Euler characteristics chi_r and chi_gen", cmd_euler_char);
  ec->add_option("--betti", o.betti, "Betti numbers b_0,b_1,...")->delimiter(',')->required();

  auto* tor = sub("torsion", "Higher torsion tau_r of a complex or of virtual spectra", cmd_torsion);
  tor->add_option("--complex", o.complex_file, "JSON list of row-major differentials")->check(CLI::ExistingFile);
  tor->add_option("--spectra", o.spectra_file, "JSON list of per-degree finite divisors with optional sign")->check(CLI::ExistingFile);
  tor->add_option("--r", o.r_max, "Largest r")->check(CLI::Range(0, 32));

  auto* em = sub("em", "The constant E(m) by the exact rational recipe", cmd_em);
  em->add_option("--m", o.m, "m")->required()->check(CLI::Range(1, 12));

  auto* fi = sub("factor-infinity", "Factor at infinity check for m = 1", cmd_factor_infinity);
  fi->add_option("--grid", o.grid, "s values: a,b,c or start:stop:step (s > 1/2)");

  auto poly_opts = [&](CLI::App* c) {
    c->add_option("--poly", o.poly, "Coefficients c0,c1,... (integers or p/q)")->delimiter(',');
    c->add_option("--parity", o.parity, "even, odd or none");
  };
  auto* td = sub("theta-dual", "Continued dual theta series", cmd_theta_dual);
  poly_opts(td);
  td->add_option("--tau-grid", o.tau_grid, "Real parts of tau: a,b,c or start:stop:step")->required();
  td->add_option("--imag", o.imag, "Common imaginary part of tau");

  auto* tp = sub("theta-poles", "Discover poles of a dual theta function by Laurent fitting", cmd_theta_poles);
  poly_opts(tp);
  tp->add_flag("--sl2", o.sl2, "Use the divisor (j + 1/2, 2j + 1)");
  tp->add_option("--region", o.region, "re_min:re_max:im_min:im_max");
  tp->add_option("--grid-points", o.pole_grid, "Grid points per axis");

  auto* ct = sub("contour-theta", "Theta series from the argument principle", cmd_contour_theta);
  ct->add_option("--a", o.a_list, "Spectrum values a_j >= 0, comma separated");
  ct->add_option("--divisor", o.divisor, "Finite divisor JSON file (kernel counts as a_j = 0)")->check(CLI::ExistingFile);
  ct->add_option("--tau", o.tau_grid, "tau values: a,b,c or start:stop:step")->required();
  ct->add_option("--half-width", o.half_width, "Contour half width X")->check(CLI::PositiveNumber);

  sub("identities", "Run the invariant suite; exits nonzero on any failure", cmd_identities);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  if (!replay.empty()) {
    if (depth > 0) {
      std::cerr << "error: a replayed manifest cannot itself request a replay\n";
      return 2;
    }
    zf::RunManifest m;
    try {
      m = zf::RunManifest::from_json(load_json_file(replay));
    } catch (const std::exception& e) {
      return report_error("replay", "schema", e.what());
    }
    std::vector<std::string> a;
    for (const char* g : {"--csv", "--out"})
      if (m.parameters.count(g))
        for (auto& x : m.parameters.at(g)) {
          a.push_back(g);
          if (std::string(g) != "--csv") a.push_back(x);
        }
    if (!emit.out.empty()) a = {"--out", emit.out};
    if (emit.csv && std::find(a.begin(), a.end(), "--csv") == a.end()) a.push_back("--csv");
    a.push_back(m.command);
    for (auto& [k, vals] : m.parameters) {
      if (k == "--csv" || k == "--out") continue;
      if (vals.empty()) {
        a.push_back(k);
        continue;
      }
      for (auto& x : vals) {
        a.push_back(k);
        a.push_back(x);
      }
    }
    return dispatch(a, depth + 1);
  }

  auto chosen = app.get_subcommands();
  if (chosen.size() != 1) {
    std::cerr << "error: exactly one subcommand is required\n\n" << app.help();
    return 2;
  }
  CLI::App* cmd = chosen[0];
  const std::string command = cmd->get_name();

  Context ctx;
  zf::RunManifest manifest;
  manifest.command = command;
  manifest.tool_version = kToolVersion;
  for (auto* opt : cmd->get_options()) {
    if (opt->count() == 0 || opt->get_name() == "--help") continue;
    std::string key = opt->get_name();
    if (opt->get_type_size() == 0) {
      manifest.parameters[key] = {};
      continue;
    }
    auto res = opt->results();
    manifest.parameters[key] = std::vector<std::string>(res.begin(), res.end());
  }
  if (emit.csv) manifest.parameters["--csv"] = {};
  if (!emit.out.empty()) {
    manifest.parameters["--out"] = {emit.out};
    manifest.outputs.push_back(emit.out);
  }

  ojson result;
  try {
    ctx.threads = resolve_threads(threads);
    result = handlers.at(command)(o, ctx);
  } catch (const ArgumentError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << cmd->help();
    return 2;
  } catch (const zf::Error& e) {
    if (e.kind() == zf::ErrorKind::Argument) {
      std::cerr << "error: " << e.what() << "\n\n" << cmd->help();
      return 2;
    }
    return report_error(command, zf::error_kind_name(e.kind()), e.what());
  } catch (const std::exception& e) {
    return report_error(command, "numerical", e.what());
  }

  for (auto it = ctx.truncation.begin(); it != ctx.truncation.end(); ++it) manifest.truncation_metadata[it.key()] = it.value();
  ojson doc = ojson::object();
  doc["command"] = command;
  for (auto it = result.begin(); it != result.end(); ++it) doc[it.key()] = it.value();
  doc["manifest"] = manifest.to_json();

  std::string text;
  if (emit.csv) {
    text = to_csv(result);
  } else {
    std::ostringstream os;
    write_json(os, doc, 2, 0);
    os << '\n';
    text = os.str();
  }
  if (emit.out.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(emit.out, std::ios::binary);
    if (!f) return report_error(command, "io", "cannot write " + emit.out);
    f << text;
  }
  if (!emit.manifest_out.empty()) {
    std::ofstream f(emit.manifest_out, std::ios::binary);
    if (!f) return report_error(command, "io", "cannot write " + emit.manifest_out);
    std::ostringstream os;
    write_json(os, manifest.to_json(), 2, 0);
    f << os.str() << '\n';
  }
  if (command == "identities" && result["failed"].get<size_t>() > 0) return 1;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    return dispatch(args);
  } catch (const std::exception& e) {
    return report_error("", "internal", e.what());
  }
}
