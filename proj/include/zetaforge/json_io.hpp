#pragma once
// JSON forms of spectral divisors and run manifests.
#include <json.hpp>

#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "divisor.hpp"
#include "errors.hpp"
#include "geodesics.hpp"
#include "polyq.hpp"

namespace zetaforge {

using ojson = nlohmann::ordered_json;

namespace detail {

inline void require_known_fields(const ojson& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) fail(ErrorKind::Schema, where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) fail(ErrorKind::Schema, where + ": unknown field \"" + it.key() + "\"");
}

inline double number_field(const ojson& j, const char* key, double dflt, const std::string& where) {
  if (!j.contains(key)) return dflt;
  if (!j[key].is_number()) fail(ErrorKind::Schema, where + "." + key + ": expected a number");
  return j[key].get<double>();
}

inline long long integer_field(const ojson& j, const char* key, long long dflt, const std::string& where) {
  if (!j.contains(key)) return dflt;
  const auto& v = j[key];
  if (v.is_number_integer()) return v.get<long long>();
  if (v.is_number_float()) {
    double x = v.get<double>();
    if (std::floor(x) == x && std::abs(x) < 9e15) return static_cast<long long>(x);
  }
  fail(ErrorKind::Schema, where + "." + key + ": expected an integer");
}

}  // namespace detail

// Rationals travel as integers when integral and as "p/q" strings otherwise;
// plain floating numbers are accepted on input and converted exactly.
inline ojson rational_to_json(const Rational& r) {
  if (denominator(r) == 1) {
    const auto& n = numerator(r);
    if (n <= BigInt(std::numeric_limits<long long>::max()) && n >= BigInt(std::numeric_limits<long long>::min()))
      return ojson(n.convert_to<long long>());
  }
  return ojson(rational_string(r));
}

inline Rational rational_from_json(const ojson& v, const std::string& where) {
  if (v.is_number_integer()) return Rational(v.get<long long>());
  if (v.is_number_float()) {
    double x = v.get<double>();
    if (!std::isfinite(x)) fail(ErrorKind::Schema, where + ": non-finite number");
    return rational_from_double(x);
  }
  if (v.is_string()) {
    try {
      return Rational(v.get<std::string>());
    } catch (const std::exception&) {
      fail(ErrorKind::Schema, where + ": cannot parse rational \"" + v.get<std::string>() + "\"");
    }
  }
  fail(ErrorKind::Schema, where + ": expected a number or a \"p/q\" string");
}

inline ojson poly_to_json(const PolyQ& Q) {
  ojson a = ojson::array();
  for (auto& c : Q.coeffs()) a.push_back(rational_to_json(c));
  return a;
}

inline PolyQ poly_from_json(const ojson& v, Parity parity, const std::string& where) {
  if (!v.is_array()) fail(ErrorKind::Schema, where + ": expected an array of coefficients");
  std::vector<Rational> c;
  for (size_t i = 0; i < v.size(); ++i) c.push_back(rational_from_json(v[i], where + "[" + std::to_string(i) + "]"));
  try {
    return PolyQ(c, parity);
  } catch (const Error& e) {
    fail(ErrorKind::Schema, where + ": " + e.what());
  }
}

inline ojson tail_to_json(const PolyTail& t) {
  ojson j;
  j["offset"] = t.offset;
  j["step"] = t.step;
  j["start"] = t.start;
  j["poly"] = poly_to_json(t.poly);
  j["parity"] = parity_name(t.poly.parity());
  if (t.power != 1.0) j["power"] = t.power;
  if (t.scale != 1.0) j["scale"] = t.scale;
  if (t.shift != 0.0) j["shift"] = t.shift;
  return j;
}

inline PolyTail tail_from_json(const ojson& j, const std::string& where) {
  detail::require_known_fields(j, {"offset", "step", "start", "poly", "parity", "power", "scale", "shift"}, where);
  PolyTail t;
  t.offset = detail::number_field(j, "offset", 0.0, where);
  t.step = detail::number_field(j, "step", 1.0, where);
  t.start = detail::integer_field(j, "start", 0, where);
  Parity p = Parity::None;
  if (j.contains("parity")) {
    if (!j["parity"].is_string()) fail(ErrorKind::Schema, where + ".parity: expected a string");
    try {
      p = parity_from_name(j["parity"].get<std::string>());
    } catch (const Error& e) {
      fail(ErrorKind::Schema, where + ".parity: " + e.what());
    }
  }
  t.poly = j.contains("poly") ? poly_from_json(j["poly"], p, where + ".poly") : PolyQ::constant(1).with_parity(p);
  t.power = detail::number_field(j, "power", 1.0, where);
  t.scale = detail::number_field(j, "scale", 1.0, where);
  t.shift = detail::number_field(j, "shift", 0.0, where);
  return t;
}

inline ojson divisor_to_json(const SpectralDivisor& d) {
  ojson j;
  ojson f = ojson::array();
  for (auto& [lam, m] : d.finite) f.push_back(ojson::array({lam, m}));
  j["finite"] = f;
  if (d.tails.size() == 1) {
    j["tail"] = tail_to_json(d.tails[0]);
  } else if (!d.tails.empty()) {
    ojson ts = ojson::array();
    for (auto& t : d.tails) ts.push_back(tail_to_json(t));
    j["tails"] = ts;
  }
  j["kernel"] = d.kernel;
  if (d.truncation) {
    j["truncation"] = {{"points_per_tail", d.truncation->points_per_tail}, {"largest_kept", d.truncation->largest_kept}};
  }
  return j;
}

inline SpectralDivisor divisor_from_json(const ojson& j, int integrality_checks = 100) {
  const std::string where = "divisor";
  detail::require_known_fields(j, {"finite", "tail", "tails", "kernel", "truncation"}, where);
  if (j.contains("tail") && j.contains("tails")) fail(ErrorKind::Schema, "divisor: give either \"tail\" or \"tails\", not both");
  SpectralDivisor d;
  if (j.contains("finite")) {
    const auto& f = j["finite"];
    if (!f.is_array()) fail(ErrorKind::Schema, "divisor.finite: expected an array of [lambda, mult] pairs");
    for (size_t i = 0; i < f.size(); ++i) {
      std::string w = "divisor.finite[" + std::to_string(i) + "]";
      if (!f[i].is_array() || f[i].size() != 2 || !f[i][0].is_number())
        fail(ErrorKind::Schema, w + ": expected [lambda, mult]");
      ojson wrap = {{"m", f[i][1]}};
      d.finite.emplace_back(f[i][0].get<double>(), detail::integer_field(wrap, "m", 0, w));
    }
  }
  d.kernel = detail::integer_field(j, "kernel", 0, where);
  std::vector<ojson> tails;
  if (j.contains("tail")) tails.push_back(j["tail"]);
  if (j.contains("tails")) {
    if (!j["tails"].is_array()) fail(ErrorKind::Schema, "divisor.tails: expected an array");
    for (auto& t : j["tails"]) tails.push_back(t);
  }
  for (size_t i = 0; i < tails.size(); ++i) {
    PolyTail t = tail_from_json(tails[i], "divisor.tail" + (tails.size() > 1 ? "s[" + std::to_string(i) + "]" : std::string()));
    detail::validate_tail(t, integrality_checks);
    d.tails.push_back(std::move(t));
  }
  if (j.contains("truncation")) {
    const auto& t = j["truncation"];
    detail::require_known_fields(t, {"points_per_tail", "largest_kept"}, "divisor.truncation");
    TruncationInfo info;
    info.points_per_tail = detail::integer_field(t, "points_per_tail", 0, "divisor.truncation");
    info.largest_kept = detail::number_field(t, "largest_kept", 0.0, "divisor.truncation");
    d.truncation = info;
  }
  for (auto& [lam, m] : d.finite) {
    if (!std::isfinite(lam) || !(lam > 0.0)) fail(ErrorKind::Domain, "divisor.finite: eigenvalues must be positive and finite");
    if (m < 0) fail(ErrorKind::Domain, "divisor.finite: multiplicities must be nonnegative");
  }
  if (d.kernel < 0) fail(ErrorKind::Domain, "divisor.kernel must be nonnegative");
  auto trunc = d.truncation;
  d = normalize(d);
  d.truncation = trunc;
  return d;
}

inline SpectralDivisor load_divisor(const std::string& path) {
  return divisor_from_json(ojson::parse(parse_json_text(read_text_file(path), path).dump()));
}

// ------------------------------------------------------------ run manifest

struct RunManifest {
  std::string command;
  std::map<std::string, std::vector<std::string>> parameters;  // sorted keys
  std::string tool_version;
  std::map<std::string, ojson> truncation_metadata;
  std::vector<std::string> outputs;

  ojson to_json() const {
    ojson j;
    j["command"] = command;
    ojson p = ojson::object();
    for (auto& [k, v] : parameters) p[k] = v;
    j["parameters"] = p;
    j["tool_version"] = tool_version;
    ojson t = ojson::object();
    for (auto& [k, v] : truncation_metadata) t[k] = v;
    j["truncation_metadata"] = t;
    j["outputs"] = outputs;
    return j;
  }

  static RunManifest from_json(const ojson& j) {
    detail::require_known_fields(j, {"command", "parameters", "tool_version", "truncation_metadata", "outputs"}, "manifest");
    RunManifest m;
    if (!j.contains("command") || !j["command"].is_string()) fail(ErrorKind::Schema, "manifest.command: expected a string");
    m.command = j["command"].get<std::string>();
    if (j.contains("parameters")) {
      if (!j["parameters"].is_object()) fail(ErrorKind::Schema, "manifest.parameters: expected an object");
      for (auto it = j["parameters"].begin(); it != j["parameters"].end(); ++it) {
        if (!it.value().is_array()) fail(ErrorKind::Schema, "manifest.parameters." + it.key() + ": expected an array of strings");
        std::vector<std::string> vals;
        for (auto& v : it.value()) {
          if (!v.is_string()) fail(ErrorKind::Schema, "manifest.parameters." + it.key() + ": expected strings");
          vals.push_back(v.get<std::string>());
        }
        m.parameters[it.key()] = vals;
      }
    }
    if (j.contains("tool_version")) m.tool_version = j["tool_version"].get<std::string>();
    if (j.contains("truncation_metadata"))
      for (auto it = j["truncation_metadata"].begin(); it != j["truncation_metadata"].end(); ++it) m.truncation_metadata[it.key()] = it.value();
    if (j.contains("outputs"))
      for (auto& o : j["outputs"]) m.outputs.push_back(o.get<std::string>());
    return m;
  }
};

}  // namespace zetaforge
