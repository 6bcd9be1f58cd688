#pragma once

// JSON forms of the structured inputs. Errors carry a JSON-pointer style path.
//
//   real:   {"rational": "p/q"} | {"surd": {"a": "p/q", "b": "p/q", "D": n}}
//           | {"sqrt": n} | {"cf": [a0, a1, ...], "period": k} | {"cf_rule": name}
//           | "p/q" | integer
//   bohr:   {"alpha": [real...], "gamma": [real...], "N": n, "rho": ["p/q"...]}
//   gap:    {"b": n, "A": [...], "N": [...], "shape": "symmetric" | "proper_asymmetric"}
//   shift:  {"alpha_cf": real, "b_prefix": [...], "b_tail_rule": "half", "sigma": [...], "dandy": bool}

#include "bohr.hpp"
#include "ostrowski.hpp"
#include "sums.hpp"

#include <json.hpp>

namespace diophlab {

using Json = nlohmann::json;

class SchemaError : public ParameterError {
 public:
  SchemaError(std::string path, const std::string& what)
      : ParameterError("schema error at " + (path.empty() ? std::string("/") : path) + ": " + what),
        path_(path.empty() ? std::string("/") : std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

namespace json_detail {

inline std::string child(const std::string& path, const std::string& key) { return path + "/" + key; }
inline std::string child(const std::string& path, std::size_t i) { return path + "/" + std::to_string(i); }

inline const Json& field(const Json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) throw SchemaError(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError(path, "missing field '" + key + "'");
  return *it;
}

inline const Json& array(const Json& j, const std::string& path) {
  if (!j.is_array()) throw SchemaError(path, "expected an array");
  return j;
}

template <class F>
auto at_path(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const SchemaError&) {
    throw;
  } catch (const ParameterError& e) {
    throw SchemaError(path, e.what());
  }
}

}  // namespace json_detail

inline BigInt integer_from_json(const Json& j, const std::string& path = "") {
  if (j.is_number_integer()) return BigInt(static_cast<long>(j.get<long long>()));
  if (j.is_number_unsigned()) return BigInt(static_cast<unsigned long>(j.get<unsigned long long>()));
  if (j.is_string()) {
    const auto& s = j.get_ref<const std::string&>();
    BigInt out;
    if (s.empty() || out.set_str(s, 10) != 0) throw SchemaError(path, "expected an integer, got \"" + s + "\"");
    return out;
  }
  throw SchemaError(path, "expected an integer");
}

inline long long int64_from_json(const Json& j, const std::string& path = "") {
  BigInt v = integer_from_json(j, path);
  if (!v.fits_slong_p()) throw SchemaError(path, "integer out of 64-bit range");
  return v.get_si();
}

inline BigRational rational_from_json(const Json& j, const std::string& path = "") {
  if (j.is_number_integer() || j.is_number_unsigned()) return BigRational(integer_from_json(j, path));
  if (j.is_string()) return json_detail::at_path(path, [&] { return parse_rational(j.get<std::string>()); });
  throw SchemaError(path, "expected a rational as \"p/q\" or an integer");
}

inline Json rational_to_json(const BigRational& r) { return to_string(r); }

inline RealSpec real_from_json(const Json& j, const std::string& path = "") {
  using namespace json_detail;
  if (j.is_string() || j.is_number_integer() || j.is_number_unsigned()) return RealSpec(rational_from_json(j, path));
  if (!j.is_object() || j.size() == 0) throw SchemaError(path, "expected a real specification object");
  if (j.contains("rational")) return RealSpec(rational_from_json(j["rational"], child(path, "rational")));
  if (j.contains("sqrt")) {
    BigInt D = integer_from_json(j["sqrt"], child(path, "sqrt"));
    return at_path(child(path, "sqrt"), [&] { return RealSpec::sqrt(D); });
  }
  if (j.contains("surd")) {
    std::string p = child(path, "surd");
    const Json& s = j["surd"];
    BigRational a = s.is_object() && s.contains("a") ? rational_from_json(s["a"], child(p, "a")) : BigRational(0);
    BigRational b = rational_from_json(field(s, "b", p), child(p, "b"));
    BigInt D = integer_from_json(field(s, "D", p), child(p, "D"));
    return at_path(p, [&] { return RealSpec::surd(a, b, D); });
  }
  if (j.contains("cf")) {
    std::string p = child(path, "cf");
    const Json& arr = array(j["cf"], p);
    if (arr.empty()) throw SchemaError(p, "need at least a0");
    BigInt a0 = integer_from_json(arr[0], child(p, 0));
    std::vector<BigInt> rest;
    for (std::size_t i = 1; i < arr.size(); ++i) rest.push_back(integer_from_json(arr[i], child(p, i)));
    if (j.contains("period")) {
      long long period = int64_from_json(j["period"], child(path, "period"));
      if (period < 1) throw SchemaError(child(path, "period"), "period must be positive");
      return at_path(p, [&] { return RealSpec(rules::periodic(a0, rest, static_cast<std::size_t>(period))); });
    }
    return at_path(p, [&] { return RealSpec(PartialQuotientStream(a0, rest)); });
  }
  if (j.contains("cf_rule")) {
    std::string p = child(path, "cf_rule");
    if (!j["cf_rule"].is_string()) throw SchemaError(p, "expected a rule name");
    return at_path(p, [&] { return RealSpec(rules::named(j["cf_rule"].get<std::string>())); });
  }
  throw SchemaError(path, "expected one of rational, surd, sqrt, cf, cf_rule");
}

inline Json real_to_json(const RealSpec& x) {
  if (x.is_rational()) return Json{{"rational", to_string(x.as_rational())}};
  if (x.is_surd()) {
    const auto& s = x.as_surd();
    return Json{{"surd", {{"a", to_string(s.a)}, {"b", to_string(s.b)}, {"D", s.D.get_str()}}}};
  }
  if (x.is_stream()) {
    const auto& s = x.as_stream();
    auto list = [&] {
      Json arr = Json::array();
      arr.push_back(s.a0().get_str());
      for (const auto& a : s.prefix()) arr.push_back(a.get_str());
      return arr;
    };
    if (!s.has_rule()) return Json{{"cf", list()}};
    if (s.name().rfind("periodic:", 0) == 0) return Json{{"cf", list()}, {"period", std::stoll(s.name().substr(9))}};
    if (!s.name().empty() && s.prefix().empty()) return Json{{"cf_rule", s.name()}};
  }
  throw ParameterError("real value has no JSON form");
}

inline std::vector<RealSpec> reals_from_json(const Json& j, const std::string& path) {
  std::vector<RealSpec> out;
  const Json& arr = json_detail::array(j, path);
  for (std::size_t i = 0; i < arr.size(); ++i) out.push_back(real_from_json(arr[i], json_detail::child(path, i)));
  return out;
}

inline BohrParams bohr_from_json(const Json& j, const std::string& path = "") {
  using namespace json_detail;
  BohrParams p;
  p.alpha = reals_from_json(field(j, "alpha", path), child(path, "alpha"));
  if (j.contains("gamma")) p.gamma = reals_from_json(j["gamma"], child(path, "gamma"));
  else p.gamma.assign(p.alpha.size(), RealSpec(BigRational(0)));
  p.N = integer_from_json(field(j, "N", path), child(path, "N"));
  const Json& rho = array(field(j, "rho", path), child(path, "rho"));
  for (std::size_t i = 0; i < rho.size(); ++i) p.rho.push_back(rational_from_json(rho[i], child(child(path, "rho"), i)));
  at_path(path, [&] {
    p.validate();
    return 0;
  });
  return p;
}

inline Json bohr_to_json(const BohrParams& p) {
  Json j;
  for (const auto& a : p.alpha) j["alpha"].push_back(real_to_json(a));
  for (const auto& g : p.gamma) j["gamma"].push_back(real_to_json(g));
  j["N"] = p.N.get_str();
  for (const auto& r : p.rho) j["rho"].push_back(to_string(r));
  return j;
}

inline GAP gap_from_json(const Json& j, const std::string& path = "") {
  using namespace json_detail;
  GAP g;
  g.b = j.is_object() && j.contains("b") ? int64_from_json(j["b"], child(path, "b")) : 0;
  for (const char* key : {"A", "N"}) {
    const Json& arr = array(field(j, key, path), child(path, key));
    auto& dst = std::string(key) == "A" ? g.A : g.N;
    for (std::size_t i = 0; i < arr.size(); ++i) dst.push_back(int64_from_json(arr[i], child(child(path, key), i)));
  }
  if (j.contains("shape")) {
    if (!j["shape"].is_string()) throw SchemaError(child(path, "shape"), "expected a string");
    g.shape = at_path(child(path, "shape"), [&] { return parse_gap_shape(j["shape"].get<std::string>()); });
  }
  at_path(path, [&] {
    g.validate();
    return 0;
  });
  return g;
}

inline Json gap_to_json(const GAP& g) {
  return Json{{"b", g.b}, {"A", g.A}, {"N", g.N}, {"shape", to_string(g.shape)}};
}

inline GammaDigits shift_digits_from_json(const Json& j, const std::string& path = "") {
  using namespace json_detail;
  RealSpec alpha = real_from_json(field(j, "alpha_cf", path), child(path, "alpha_cf"));
  std::vector<BigInt> prefix;
  if (j.contains("b_prefix")) {
    const Json& arr = array(j["b_prefix"], child(path, "b_prefix"));
    for (std::size_t i = 0; i < arr.size(); ++i)
      prefix.push_back(integer_from_json(arr[i], child(child(path, "b_prefix"), i)));
  }
  std::string tail_name = "zero";
  if (j.contains("b_tail_rule")) {
    if (!j["b_tail_rule"].is_string()) throw SchemaError(child(path, "b_tail_rule"), "expected a rule name");
    tail_name = j["b_tail_rule"].get<std::string>();
  }
  BigInt constant = 0;
  auto tail = at_path(child(path, "b_tail_rule"), [&] { return GammaDigits::parse_tail(tail_name, &constant); });
  std::vector<int> sigma;
  if (j.contains("sigma")) {
    const Json& arr = array(j["sigma"], child(path, "sigma"));
    for (std::size_t i = 0; i < arr.size(); ++i)
      sigma.push_back(static_cast<int>(int64_from_json(arr[i], child(child(path, "sigma"), i))));
  }
  bool dandy = j.value("dandy", false);
  return at_path(path, [&] { return GammaDigits(cf_of(alpha), prefix, tail, constant, sigma, dandy); });
}

inline ApproxFunction approx_from_json(const Json& j, const std::string& path = "") {
  if (!j.is_string()) throw SchemaError(path, "expected an approximation function name");
  return json_detail::at_path(path, [&] { return ApproxFunction::parse(j.get<std::string>()); });
}

/// Parses text, mapping syntax errors to SchemaError at the root.
inline Json parse_json_text(const std::string& text, const std::string& origin = "") {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw SchemaError("", (origin.empty() ? "" : origin + ": ") + "malformed JSON (" + e.what() + ")");
  }
}

}  // namespace diophlab
