#pragma once

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fairflow/errors.hpp"
#include "fairflow/util.hpp"

namespace fairflow {

// Integer exponents over the seven SI base dimensions.
struct Dimension {
  // length, mass, time, temperature, current, amount, luminous intensity
  std::array<int, 7> exp{};

  bool operator==(const Dimension&) const = default;
  bool dimensionless() const { return *this == Dimension{}; }

  Dimension operator+(const Dimension& o) const {
    Dimension r;
    for (size_t i = 0; i < 7; ++i) r.exp[i] = exp[i] + o.exp[i];
    return r;
  }
  Dimension operator-(const Dimension& o) const {
    Dimension r;
    for (size_t i = 0; i < 7; ++i) r.exp[i] = exp[i] - o.exp[i];
    return r;
  }
  Dimension operator*(int n) const {
    Dimension r;
    for (size_t i = 0; i < 7; ++i) r.exp[i] = exp[i] * n;
    return r;
  }

  std::string str() const {
    static constexpr const char* kNames[7] = {"L", "M", "T", "Th", "I", "N", "J"};
    std::string out;
    for (size_t i = 0; i < 7; ++i) {
      if (exp[i] == 0) continue;
      if (!out.empty()) out += ' ';
      out += kNames[i];
      if (exp[i] != 1) out += '^' + std::to_string(exp[i]);
    }
    return out.empty() ? "1" : out;
  }
};

namespace unit_detail {

// Correctly rounded decimal power of ten (cached strtod of "1e<k>"), so
// metric-prefix conversions stay exact powers of ten instead of drifting
// through repeated multiplication.
inline double pow10(int e) {
  static const auto table = [] {
    std::array<double, 701> t{};
    for (int k = -350; k <= 350; ++k) {
      char buf[16];
      std::snprintf(buf, sizeof buf, "1e%d", k);
      t[static_cast<size_t>(k + 350)] = std::strtod(buf, nullptr);
    }
    return t;
  }();
  if (e < -350) return 0.0;
  if (e > 350) return std::numeric_limits<double>::infinity();
  return table[static_cast<size_t>(e + 350)];
}

// Rescales v by 10^delta the way a human would move the decimal point:
// take the shortest decimal spelling that round-trips to v, shift its
// exponent, and re-parse. "0.3615" shifted by +1 therefore lands on the
// same double as the literal 3.615 — correctly rounded, never worse than
// one multiplication, and equal spellings of the same quantity collapse
// to the same bits.
inline double shift_decimal_exp10(double v, int delta) {
  if (delta == 0 || v == 0.0 || !std::isfinite(v)) return delta == 0 ? v : v * pow10(delta);
  std::string s = shortest_double(v);
  size_t epos = s.find_first_of("eE");
  long long exp10 = 0;
  std::string digits;
  if (epos == std::string::npos) {
    digits = s;
  } else {
    digits = s.substr(0, epos);
    exp10 = std::strtoll(s.c_str() + epos + 1, nullptr, 10);
  }
  digits += 'e';
  digits += std::to_string(exp10 + delta);
  return std::strtod(digits.c_str(), nullptr);
}

constexpr Dimension dim(int l, int m = 0, int t = 0, int th = 0, int i = 0, int n = 0, int j = 0) {
  return Dimension{{l, m, t, th, i, n, j}};
}

struct BaseUnit {
  Dimension dimension;
  double mantissa;  // scale to SI base = mantissa * 10^exp10
  int exp10;
  double offset;  // nonzero only for affine temperature units
  bool prefixable;
};

// Curated table; everything else the engine needs is reachable via SI
// prefixes on these. Scales are relative to (m, kg, s, K, A, mol, cd).
inline const std::map<std::string, BaseUnit, std::less<>>& unit_table() {
  static const std::map<std::string, BaseUnit, std::less<>> table = {
      {"m", {dim(1), 1.0, 0, 0.0, true}},
      {"g", {dim(0, 1), 1.0, -3, 0.0, true}},
      {"s", {dim(0, 0, 1), 1.0, 0, 0.0, true}},
      {"K", {dim(0, 0, 0, 1), 1.0, 0, 0.0, true}},
      {"A", {dim(0, 0, 0, 0, 1), 1.0, 0, 0.0, true}},
      {"mol", {dim(0, 0, 0, 0, 0, 1), 1.0, 0, 0.0, true}},
      {"cd", {dim(0, 0, 0, 0, 0, 0, 1), 1.0, 0, 0.0, true}},
      {"eV", {dim(2, 1, -2), 1.602176634, -19, 0.0, true}},
      {"V", {dim(2, 1, -3, 0, -1), 1.0, 0, 0.0, true}},
      {"degC", {dim(0, 0, 0, 1), 1.0, 0, 273.15, false}},
      {"angstrom", {dim(1), 1.0, -10, 0.0, false}},
      {"\xC3\x85", {dim(1), 1.0, -10, 0.0, false}},  // Å
      {"u", {dim(0, 1), 1.66053906660, -27, 0.0, false}},
      {"amu", {dim(0, 1), 1.66053906660, -27, 0.0, false}},
      {"minute", {dim(0, 0, 1), 6.0, 1, 0.0, false}},
      {"hour", {dim(0, 0, 1), 3.6, 3, 0.0, false}},
  };
  return table;
}

inline const std::map<std::string, int, std::less<>>& prefix_table() {
  static const std::map<std::string, int, std::less<>> table = {
      {"y", -24}, {"z", -21}, {"a", -18}, {"f", -15}, {"p", -12}, {"n", -9}, {"u", -6},
      {"m", -3},  {"c", -2},  {"d", -1},  {"da", 1},  {"h", 2},   {"k", 3},  {"M", 6},
      {"G", 9},   {"T", 12},  {"P", 15},  {"E", 18},  {"Z", 21},  {"Y", 24},
  };
  return table;
}

}  // namespace unit_detail

// One factor of a normalized unit expression.
struct UnitTerm {
  std::string prefix;  // empty when none
  std::string symbol;
  int exponent = 1;

  bool operator==(const UnitTerm&) const = default;
};

// Parsed unit expression with derived conversion data.
class UnitExpr {
 public:
  UnitExpr() = default;

  const std::string& text() const { return text_; }
  const std::vector<UnitTerm>& terms() const { return terms_; }
  double scale() const { return mantissa_ * unit_detail::pow10(exp10_); }
  double offset() const { return offset_; }
  const Dimension& dimension() const { return dim_; }
  bool dimensionless() const { return dim_.dimensionless(); }

  std::string str() const { return text_.empty() ? "dimensionless" : text_; }

  bool compatible(const UnitExpr& o) const { return dim_ == o.dim_; }

  // value in this unit -> value in target unit
  double convert_to(double v, const UnitExpr& target) const {
    if (dim_ != target.dim_)
      throw Error(Errc::dimension_mismatch, "cannot convert '" + str() + "' (" + dim_.str() +
                                                ") to '" + target.str() + "' (" +
                                                target.dim_.str() + ")");
    if (mantissa_ == target.mantissa_ && exp10_ == target.exp10_ && offset_ == target.offset_)
      return v;
    if (offset_ == 0.0 && target.offset_ == 0.0) {
      // Pure decimal rescaling: shift the decimal exponent instead of
      // multiplying, so "0.3615 nm" lands on the identical double as a
      // literal 3.615 in angstrom.
      if (mantissa_ == target.mantissa_)
        return unit_detail::shift_decimal_exp10(v, exp10_ - target.exp10_);
      return v * (mantissa_ / target.mantissa_) * unit_detail::pow10(exp10_ - target.exp10_);
    }
    return (v * scale() + offset_ - target.offset_) / target.scale();
  }

  friend UnitExpr parse_unit(std::string_view expr);
  friend UnitExpr operator*(const UnitExpr& a, const UnitExpr& b);
  friend UnitExpr unit_pow(const UnitExpr& a, int n);

  // Conversion identity, not spelling: parse_unit("K /ps") == parse_unit("K/ps").
  bool operator==(const UnitExpr& o) const {
    return terms_ == o.terms_ && mantissa_ == o.mantissa_ && exp10_ == o.exp10_ &&
           offset_ == o.offset_ && dim_ == o.dim_;
  }

 private:
  std::string text_;
  std::vector<UnitTerm> terms_;
  double mantissa_ = 1.0;
  int exp10_ = 0;
  double offset_ = 0.0;
  Dimension dim_{};

  void derive();
};

namespace unit_detail {

struct RawTerm {
  std::string body;
  int exponent;
};

inline std::string strip_ws(std::string_view s) {
  std::string out;
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c))) out += c;
  return out;
}

inline std::string canonical_symbol(const std::string& symbol) {
  if (symbol == "\xC3\x85") return "angstrom";
  if (symbol == "amu") return "u";
  return symbol;
}

// Resolves a term body to (prefix, symbol). Exact symbol match wins over a
// prefixed interpretation ("u" is the mass unit, "um" is micro-metre).
inline std::pair<std::string, std::string> resolve_symbol(const std::string& body) {
  if (unit_table().count(body)) return {"", canonical_symbol(body)};
  for (size_t plen : {size_t{2}, size_t{1}}) {
    if (body.size() <= plen) continue;
    std::string prefix = body.substr(0, plen);
    std::string rest = body.substr(plen);
    auto pit = prefix_table().find(prefix);
    if (pit == prefix_table().end()) continue;
    auto uit = unit_table().find(rest);
    if (uit != unit_table().end() && uit->second.prefixable) return {prefix, rest};
  }
  throw Error(Errc::unknown_unit, "unknown unit '" + body + "'");
}

}  // namespace unit_detail

// Grammar: unit := term (('*'|'/') term)* ; term := [prefix] symbol ['^' int].
// Whitespace is ignored; the empty expression is dimensionless.
inline UnitExpr parse_unit(std::string_view expr) {
  using namespace unit_detail;
  UnitExpr result;
  result.text_ = strip_ws(expr);
  if (result.text_.empty()) return result;

  const std::string& s = result.text_;
  std::vector<RawTerm> raw;
  size_t pos = 0;
  int sign = 1;
  while (true) {
    size_t next = s.find_first_of("*/", pos);
    std::string token = s.substr(pos, next == std::string::npos ? next : next - pos);
    if (token.empty()) throw Error(Errc::grammar_error, "empty term in '" + s + "'");

    int exponent = 1;
    if (auto caret = token.find('^'); caret != std::string::npos) {
      std::string exp_text = token.substr(caret + 1);
      token = token.substr(0, caret);
      if (token.empty() || exp_text.empty())
        throw Error(Errc::grammar_error, "malformed exponent in '" + s + "'");
      const char* b = exp_text.data();
      const char* e = b + exp_text.size();
      if (*b == '+') ++b;
      auto [p, ec] = std::from_chars(b, e, exponent);
      if (ec != std::errc() || p != e)
        throw Error(Errc::grammar_error, "malformed exponent '" + exp_text + "' in '" + s + "'");
    }
    raw.push_back({token, sign * exponent});

    if (next == std::string::npos) break;
    sign = s[next] == '/' ? -1 : 1;
    pos = next + 1;
    if (pos >= s.size()) throw Error(Errc::grammar_error, "dangling operator in '" + s + "'");
  }

  for (const auto& rt : raw) {
    auto [prefix, symbol] = resolve_symbol(rt.body);
    bool merged = false;
    for (auto& t : result.terms_) {
      if (t.prefix == prefix && t.symbol == symbol) {
        t.exponent += rt.exponent;
        merged = true;
        break;
      }
    }
    if (!merged) result.terms_.push_back({prefix, symbol, rt.exponent});
  }
  std::erase_if(result.terms_, [](const UnitTerm& t) { return t.exponent == 0; });

  result.derive();
  return result;
}

inline void UnitExpr::derive() {
  using namespace unit_detail;
  mantissa_ = 1.0;
  exp10_ = 0;
  offset_ = 0.0;
  dim_ = Dimension{};
  bool affine_seen = false;
  for (const auto& t : terms_) {
    const BaseUnit& bu = unit_table().at(t.symbol);
    int term_exp10 = bu.exp10 + (t.prefix.empty() ? 0 : prefix_table().at(t.prefix));
    mantissa_ *= std::pow(bu.mantissa, t.exponent);
    exp10_ += term_exp10 * t.exponent;
    dim_ = dim_ + bu.dimension * t.exponent;
    if (bu.offset != 0.0) affine_seen = true;
  }
  if (affine_seen) {
    // Affine units are legal only as a bare temperature with exponent 1.
    if (terms_.size() != 1 || terms_[0].exponent != 1)
      throw Error(Errc::affine_composition, "affine unit cannot be composed in '" + text_ + "'");
    offset_ = unit_table().at(terms_[0].symbol).offset;
  }
}

inline UnitExpr operator*(const UnitExpr& a, const UnitExpr& b) {
  if (a.offset_ != 0.0 || b.offset_ != 0.0)
    throw Error(Errc::affine_composition, "affine unit cannot be composed");
  UnitExpr r = a;
  r.text_ = a.text_.empty() ? b.text_ : (b.text_.empty() ? a.text_ : a.text_ + "*" + b.text_);
  for (const auto& t : b.terms_) {
    bool merged = false;
    for (auto& rt : r.terms_) {
      if (rt.prefix == t.prefix && rt.symbol == t.symbol) {
        rt.exponent += t.exponent;
        merged = true;
        break;
      }
    }
    if (!merged) r.terms_.push_back(t);
  }
  std::erase_if(r.terms_, [](const UnitTerm& t) { return t.exponent == 0; });
  r.derive();
  return r;
}

inline UnitExpr unit_pow(const UnitExpr& a, int n) {
  if (a.offset_ != 0.0) throw Error(Errc::affine_composition, "affine unit cannot be composed");
  UnitExpr r = a;
  if (n == 0) {
    r.terms_.clear();
    r.text_.clear();
  } else {
    for (auto& t : r.terms_) t.exponent *= n;
    if (n != 1) r.text_ = "(" + a.text_ + ")^" + std::to_string(n);
  }
  r.derive();
  return r;
}

inline Dimension dimension_of(const UnitExpr& u) { return u.dimension(); }

// A number or rectangular numeric array paired with a unit. Scalars have an
// empty shape and exactly one element in data.
struct Quantity {
  std::vector<double> data;
  std::vector<size_t> shape;
  UnitExpr unit;

  static Quantity scalar(double v, UnitExpr u = {}) { return {{v}, {}, std::move(u)}; }
  bool is_scalar() const { return shape.empty(); }
  double value() const { return data.at(0); }
};

inline Quantity convert(const Quantity& q, const UnitExpr& target) {
  Quantity out = q;
  out.unit = target;
  for (double& v : out.data) v = q.unit.convert_to(v, target);
  return out;
}

// "<number> <unit-expr>" in one string; the unit part is optional.
struct ParsedQuantity {
  double value;
  std::optional<UnitExpr> unit;
};

inline ParsedQuantity parse_quantity_string(std::string_view s) {
  size_t start = 0;
  while (start < s.size() && std::isspace(static_cast<unsigned char>(s[start]))) ++start;
  const char* b = s.data() + start;
  const char* e = s.data() + s.size();
  double value = 0;
  auto [p, ec] = std::from_chars(b, e, value);
  if (ec != std::errc() || p == b || !std::isfinite(value))
    throw Error(Errc::grammar_error, "expected '<number> [unit]', got '" + std::string(s) + "'");
  std::string rest = unit_detail::strip_ws(std::string_view(p, static_cast<size_t>(e - p)));
  ParsedQuantity out{value, std::nullopt};
  if (!rest.empty()) out.unit = parse_unit(rest);
  return out;
}

}  // namespace fairflow
