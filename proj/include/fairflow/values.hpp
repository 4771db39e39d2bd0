#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fairflow/canonical.hpp"
#include "fairflow/elements.hpp"
#include "fairflow/errors.hpp"
#include "fairflow/manifest.hpp"
#include "fairflow/sha256.hpp"
#include "fairflow/units.hpp"

namespace fairflow {

namespace fs = std::filesystem;

struct NumberValue {
  double value = 0;
  std::optional<UnitExpr> units;  // declared units after conversion
  bool operator==(const NumberValue&) const = default;
};

struct ArrayValue {
  std::vector<double> data;  // row-major
  std::vector<size_t> shape;
  std::optional<UnitExpr> units;
  bool operator==(const ArrayValue&) const = default;
};

struct ImageValue {
  std::string digest;  // sha256 hex of the bytes
  std::string format;  // PPM | PNG | JPEG | GIF | TIFF | BMP
  uint64_t bytes = 0;
  fs::path file;  // local source, not part of the value identity

  bool operator==(const ImageValue& o) const {
    return digest == o.digest && format == o.format && bytes == o.bytes;
  }
};

struct ElementValue {
  std::string symbol;  // canonical symbol; empty for numeric pass-through
  std::optional<double> property_value;
  bool operator==(const ElementValue&) const = default;
};

struct TypedValue {
  Kind kind = Kind::Text;
  std::variant<std::monostate, bool, int64_t, NumberValue, ArrayValue, std::string, json,
               ImageValue, ElementValue>
      v;

  bool operator==(const TypedValue&) const = default;

  bool as_bool() const { return std::get<bool>(v); }
  int64_t as_int() const { return std::get<int64_t>(v); }
  const NumberValue& as_number() const { return std::get<NumberValue>(v); }
  const ArrayValue& as_array() const { return std::get<ArrayValue>(v); }
  const std::string& as_text() const { return std::get<std::string>(v); }
  const json& as_json() const { return std::get<json>(v); }
  const ImageValue& as_image() const { return std::get<ImageValue>(v); }
  const ElementValue& as_element() const { return std::get<ElementValue>(v); }
};

// Complete, validated assignment for every declared input of one tool.
using InputSet = std::map<std::string, TypedValue>;

namespace value_detail {

inline bool is_file_ref(const json& j) {
  return j.is_object() && j.size() == 1 && j.contains("file") && j["file"].is_string();
}

inline fs::path resolve_ref(const json& ref, const fs::path& base) {
  fs::path p = ref["file"].get<std::string>();
  return p.is_absolute() ? p : base / p;
}

inline double finite_number(const json& j, const std::string& what) {
  if (!j.is_number()) throw Error(Errc::type_mismatch, what + " must be a number");
  double v = j.get<double>();
  if (!std::isfinite(v)) throw Error(Errc::type_mismatch, what + " is not finite");
  return v;
}

inline std::vector<size_t> array_shape(const json& a) {
  std::vector<size_t> shape;
  const json* cur = &a;
  while (cur->is_array()) {
    shape.push_back(cur->size());
    if (cur->empty()) break;
    cur = &(*cur)[0];
  }
  return shape;
}

inline void collect_array(const json& node, const std::vector<size_t>& shape, size_t depth,
                          std::vector<double>& out) {
  if (depth == shape.size()) {
    out.push_back(finite_number(node, "array element"));
    return;
  }
  if (!node.is_array() || node.size() != shape[depth])
    throw Error(Errc::type_mismatch, "array is not rectangular");
  for (const auto& elem : node) collect_array(elem, shape, depth + 1, out);
}

inline json nested_from_flat(const std::vector<double>& data, const std::vector<size_t>& shape,
                             size_t depth, size_t& pos) {
  json out = json::array();
  if (depth + 1 == shape.size()) {
    for (size_t i = 0; i < shape[depth]; ++i) out.push_back(data[pos++]);
  } else {
    for (size_t i = 0; i < shape[depth]; ++i)
      out.push_back(nested_from_flat(data, shape, depth + 1, pos));
  }
  return out;
}

inline json array_to_nested(const ArrayValue& a) {
  if (a.shape.empty()) return json::array();
  size_t pos = 0;
  return nested_from_flat(a.data, a.shape, 0, pos);
}

inline std::string detect_image_format(std::string_view bytes) {
  auto starts = [&](std::string_view sig) {
    return bytes.size() >= sig.size() && bytes.substr(0, sig.size()) == sig;
  };
  if (starts("\x89PNG\r\n\x1a\n")) return "PNG";
  if (bytes.size() >= 3 && static_cast<unsigned char>(bytes[0]) == 0xFF &&
      static_cast<unsigned char>(bytes[1]) == 0xD8 && static_cast<unsigned char>(bytes[2]) == 0xFF)
    return "JPEG";
  if (starts("GIF87a") || starts("GIF89a")) return "GIF";
  if (starts("II*\0") || starts("MM\0*")) return "TIFF";
  if (starts("BM")) return "BMP";
  if (bytes.size() >= 3 && bytes[0] == 'P' && bytes[1] >= '1' && bytes[1] <= '6' &&
      (bytes[2] == '\n' || bytes[2] == '\r' || bytes[2] == ' ' || bytes[2] == '\t'))
    return "PPM";
  throw Error(Errc::bad_image, "unrecognized image format (magic bytes)");
}

inline ImageValue load_image(const fs::path& path) {
  std::string bytes = read_file(path);
  ImageValue img;
  img.format = detect_image_format(bytes);
  img.digest = sha256_hex(bytes);
  img.bytes = bytes.size();
  img.file = path;
  return img;
}

// Shared by input validation and output envelopes: a number given as a bare
// value, a "<number> <unit>" string, or a {value, units} object, converted
// into the declared units.
inline NumberValue coerce_number(const json& raw, const std::optional<UnitExpr>& declared) {
  double value = 0;
  std::optional<UnitExpr> given;
  if (raw.is_number()) {
    value = finite_number(raw, "value");
  } else if (raw.is_string()) {
    ParsedQuantity q = parse_quantity_string(raw.get<std::string>());
    value = q.value;
    given = q.unit;
  } else if (raw.is_object() && raw.contains("value")) {
    for (const auto& [k, ignored] : raw.items())
      if (k != "value" && k != "units")
        throw Error(Errc::type_mismatch, "unexpected key '" + k + "' in quantity object");
    value = finite_number(raw["value"], "value");
    if (raw.contains("units")) {
      if (!raw["units"].is_string()) throw Error(Errc::type_mismatch, "units must be a string");
      given = parse_unit(raw["units"].get<std::string>());
    }
  } else {
    throw Error(Errc::type_mismatch, "expected a number, quantity string, or {value, units}");
  }
  if (!std::isfinite(value)) throw Error(Errc::type_mismatch, "value is not finite");

  NumberValue out;
  out.units = declared;
  if (given) {
    UnitExpr target = declared ? *declared : UnitExpr{};
    out.value = given->convert_to(value, target);
  } else {
    out.value = value;  // bare number: already in declared units
  }
  if (!std::isfinite(out.value)) throw Error(Errc::type_mismatch, "converted value is not finite");
  return out;
}

inline ArrayValue coerce_array(const json& raw, const std::optional<UnitExpr>& declared,
                               const fs::path& base) {
  json nested;
  std::optional<UnitExpr> given;
  if (is_file_ref(raw)) {
    std::string text = read_file(resolve_ref(raw, base));
    json parsed;
    try {
      parsed = json::parse(text);
    } catch (const json::exception& e) {
      throw Error(Errc::type_mismatch, std::string("array file is not valid JSON: ") + e.what());
    }
    return coerce_array(parsed, declared, base);
  }
  if (raw.is_array()) {
    nested = raw;
  } else if (raw.is_object() && raw.contains("value")) {
    for (const auto& [k, ignored] : raw.items())
      if (k != "value" && k != "units")
        throw Error(Errc::type_mismatch, "unexpected key '" + k + "' in array object");
    nested = raw["value"];
    if (raw.contains("units")) {
      if (!raw["units"].is_string()) throw Error(Errc::type_mismatch, "units must be a string");
      given = parse_unit(raw["units"].get<std::string>());
    }
  } else {
    throw Error(Errc::type_mismatch, "expected an array, {value, units} object, or file reference");
  }
  if (!nested.is_array()) throw Error(Errc::type_mismatch, "array value must be a JSON array");

  ArrayValue out;
  out.shape = array_shape(nested);
  out.data.reserve([&] {
    size_t n = 1;
    for (size_t d : out.shape) n *= d;
    return n;
  }());
  collect_array(nested, out.shape, 0, out.data);
  out.units = declared;
  if (given) {
    UnitExpr target = declared ? *declared : UnitExpr{};
    for (double& v : out.data) v = given->convert_to(v, target);
  }
  return out;
}

inline void check_bounds(double v, const InputSpec& spec) {
  if ((spec.min && v < *spec.min) || (spec.max && v > *spec.max)) {
    std::string units_text = spec.units ? " " + spec.units->text() : "";
    std::string range = "[" + (spec.min ? shortest_double(*spec.min) : "-inf") + ", " +
                        (spec.max ? shortest_double(*spec.max) : "inf") + "]";
    throw Error(Errc::out_of_range, "value " + shortest_double(v) + units_text +
                                        " outside range " + range + units_text);
  }
}

}  // namespace value_detail

// Coerce one raw value (JSON literal, quantity string, or file reference)
// to the declared kind, convert to declared units, and bounds-check.
inline TypedValue validate_value(const InputSpec& spec, const json& raw,
                                 const fs::path& base = ".") {
  using namespace value_detail;
  TypedValue tv;
  tv.kind = spec.kind;
  switch (spec.kind) {
    case Kind::Boolean: {
      if (!raw.is_boolean()) throw Error(Errc::type_mismatch, "expected a boolean");
      tv.v = raw.get<bool>();
      break;
    }
    case Kind::Integer: {
      if (raw.is_number_integer()) {
        tv.v = raw.get<int64_t>();
      } else if (raw.is_number_float()) {
        double d = finite_number(raw, "value");
        double integral = 0;
        if (std::modf(d, &integral) != 0.0)
          throw Error(Errc::type_mismatch, "expected an integral value, got " + shortest_double(d));
        tv.v = static_cast<int64_t>(integral);
      } else {
        throw Error(Errc::type_mismatch, "expected an integer");
      }
      check_bounds(static_cast<double>(std::get<int64_t>(tv.v)), spec);
      break;
    }
    case Kind::Number: {
      NumberValue n = coerce_number(raw, spec.units);
      check_bounds(n.value, spec);
      tv.v = std::move(n);
      break;
    }
    case Kind::Array: {
      tv.v = coerce_array(raw, spec.units, base);
      break;
    }
    case Kind::Text: {
      if (is_file_ref(raw))
        tv.v = read_file(resolve_ref(raw, base));
      else if (raw.is_string())
        tv.v = raw.get<std::string>();
      else
        throw Error(Errc::type_mismatch, "expected a string or file reference");
      break;
    }
    case Kind::Choice: {
      if (!raw.is_string()) throw Error(Errc::type_mismatch, "expected an option string");
      std::string s = raw.get<std::string>();
      if (std::find(spec.options.begin(), spec.options.end(), s) == spec.options.end()) {
        std::string opts;
        for (size_t i = 0; i < spec.options.size(); ++i) opts += (i ? ", " : "") + spec.options[i];
        throw Error(Errc::unknown_choice, "'" + s + "' is not one of {" + opts + "}");
      }
      tv.v = std::move(s);
      break;
    }
    case Kind::List:
    case Kind::Dictionary: {
      json payload;
      if (is_file_ref(raw)) {
        std::string text = read_file(resolve_ref(raw, base));
        try {
          payload = json::parse(text);
        } catch (const json::exception& e) {
          throw Error(Errc::type_mismatch, std::string("file is not valid JSON: ") + e.what());
        }
      } else {
        payload = raw;
      }
      if (spec.kind == Kind::List && !payload.is_array())
        throw Error(Errc::type_mismatch, "expected a JSON array");
      if (spec.kind == Kind::Dictionary && !payload.is_object())
        throw Error(Errc::type_mismatch, "expected a JSON object");
      tv.v = std::move(payload);
      break;
    }
    case Kind::Image: {
      fs::path path;
      if (is_file_ref(raw))
        path = resolve_ref(raw, base);
      else if (raw.is_string())
        path = [&] {
          fs::path p = raw.get<std::string>();
          return p.is_absolute() ? p : base / p;
        }();
      else
        throw Error(Errc::type_mismatch, "expected an image file reference");
      tv.v = load_image(path);
      break;
    }
    case Kind::Element: {
      ElementValue ev;
      if (raw.is_string()) {
        const ElementRecord& rec = lookup_element(raw.get<std::string>());
        ev.symbol = rec.symbol;
        if (spec.property) ev.property_value = element_property(rec, *spec.property);
      } else if (raw.is_number()) {
        if (!spec.property)
          throw Error(Errc::type_mismatch,
                      "numeric value for an Element input requires a declared property");
        ev.property_value = finite_number(raw, "value");
      } else if (raw.is_object() && raw.contains("symbol") && raw["symbol"].is_string()) {
        for (const auto& [k, ignored] : raw.items())
          if (k != "symbol" && k != "value")
            throw Error(Errc::type_mismatch, "unexpected key '" + k + "' in element object");
        const ElementRecord& rec = lookup_element(raw["symbol"].get<std::string>());
        ev.symbol = rec.symbol;
        if (spec.property) ev.property_value = element_property(rec, *spec.property);
      } else if (raw.is_object() && raw.size() == 1 && raw.contains("value")) {
        if (!spec.property)
          throw Error(Errc::type_mismatch,
                      "numeric value for an Element input requires a declared property");
        ev.property_value = finite_number(raw["value"], "value");
      } else {
        throw Error(Errc::type_mismatch, "expected an element symbol, name, or property value");
      }
      tv.v = std::move(ev);
      break;
    }
  }
  return tv;
}

// Defaults overlaid with validated overrides; every declared input must end
// up with a value. Errors are annotated with the input name.
inline InputSet build_input_set(const ToolManifest& m, const std::map<std::string, json>& overrides,
                                const fs::path& base = ".") {
  for (const auto& [name, ignored] : overrides)
    if (!m.find_input(name))
      throw Error(Errc::unknown_input_name,
                  "'" + name + "' is not an input of " + m.name);
  InputSet set;
  for (const auto& [name, spec] : m.inputs) {
    auto it = overrides.find(name);
    const json* raw = it != overrides.end() ? &it->second
                      : spec.default_value  ? &*spec.default_value
                                            : nullptr;
    if (!raw)
      throw Error(Errc::missing_input, "input '" + name + "' has no value and no default");
    try {
      set.emplace(name, validate_value(spec, *raw, base));
    } catch (const Error& e) {
      throw Error::annotated(name, e);
    }
  }
  return set;
}

// Output envelope `{"type": kind, "value": v, "units": optional}` or
// `{"type": "Image", "file": rel}`; units converted to the declared ones.
inline TypedValue validate_output(const OutputSpec& spec, const json& envelope,
                                  const fs::path& dir) {
  using namespace value_detail;
  if (!envelope.is_object() || !envelope.contains("type") || !envelope["type"].is_string())
    throw Error(Errc::type_mismatch, "output envelope must be an object with a 'type'");
  for (const auto& [k, ignored] : envelope.items())
    if (k != "type" && k != "value" && k != "units" && k != "file")
      throw Error(Errc::type_mismatch, "unexpected key '" + k + "' in output envelope");
  const std::string type = envelope["type"].get<std::string>();
  if (type != kind_name(spec.kind))
    throw Error(Errc::type_mismatch,
                "envelope type " + type + " does not match declared " +
                    std::string(kind_name(spec.kind)));

  TypedValue tv;
  tv.kind = spec.kind;
  if (spec.kind == Kind::Image) {
    if (!envelope.contains("file") || !envelope["file"].is_string())
      throw Error(Errc::type_mismatch, "Image envelope must carry a 'file' path");
    fs::path p = envelope["file"].get<std::string>();
    tv.v = load_image(p.is_absolute() ? p : dir / p);
    return tv;
  }
  if (!envelope.contains("value"))
    throw Error(Errc::type_mismatch, "output envelope missing 'value'");
  const json& value = envelope["value"];

  switch (spec.kind) {
    case Kind::Number: {
      json quantity = json::object();
      quantity["value"] = value;
      if (envelope.contains("units")) quantity["units"] = envelope["units"];
      tv.v = coerce_number(quantity, spec.units);
      break;
    }
    case Kind::Array: {
      json quantity = json::object();
      quantity["value"] = value;
      if (envelope.contains("units")) quantity["units"] = envelope["units"];
      tv.v = coerce_array(quantity, spec.units, dir);
      break;
    }
    case Kind::Boolean: {
      if (!value.is_boolean()) throw Error(Errc::type_mismatch, "expected a boolean value");
      tv.v = value.get<bool>();
      break;
    }
    case Kind::Integer: {
      InputSpec shim;
      shim.kind = Kind::Integer;
      tv = validate_value(shim, value, dir);
      break;
    }
    case Kind::Text:
    case Kind::Choice: {
      if (!value.is_string()) throw Error(Errc::type_mismatch, "expected a string value");
      tv.v = value.get<std::string>();
      break;
    }
    case Kind::List: {
      if (!value.is_array()) throw Error(Errc::type_mismatch, "expected a JSON array value");
      tv.v = value;
      break;
    }
    case Kind::Dictionary: {
      if (!value.is_object()) throw Error(Errc::type_mismatch, "expected a JSON object value");
      tv.v = value;
      break;
    }
    case Kind::Element: {
      ElementValue ev;
      if (value.is_string())
        ev.symbol = lookup_element(value.get<std::string>()).symbol;
      else
        throw Error(Errc::type_mismatch, "expected an element symbol");
      tv.v = std::move(ev);
      break;
    }
    case Kind::Image:
      break;  // handled above
  }
  return tv;
}

// ---- serializations ----------------------------------------------------
//
// Run form: what a workflow step reads from inputs.json. Unit-bearing kinds
// are `{"units": "<declared>", "value": v}`; images are `{"file": rel}`;
// everything else is bare JSON.
//
// Canonical form: identical except images collapse to "sha256:<hex>" so the
// bytes hash independently of file paths. This is the cache-key material.

inline json to_run_json(const TypedValue& tv, const std::string& image_rel_path = "") {
  using namespace value_detail;
  switch (tv.kind) {
    case Kind::Boolean: return tv.as_bool();
    case Kind::Integer: return tv.as_int();
    case Kind::Number: {
      const NumberValue& n = tv.as_number();
      if (!n.units) return n.value;
      json out = json::object();
      out["units"] = n.units->text();
      out["value"] = n.value;
      return out;
    }
    case Kind::Array: {
      const ArrayValue& a = tv.as_array();
      json nested = array_to_nested(a);
      if (!a.units) return nested;
      json out = json::object();
      out["units"] = a.units->text();
      out["value"] = std::move(nested);
      return out;
    }
    case Kind::Text:
    case Kind::Choice: return tv.as_text();
    case Kind::List:
    case Kind::Dictionary: return tv.as_json();
    case Kind::Image: {
      json out = json::object();
      out["file"] = image_rel_path.empty() ? tv.as_image().file.string() : image_rel_path;
      return out;
    }
    case Kind::Element: {
      const ElementValue& e = tv.as_element();
      json out = json::object();
      if (!e.symbol.empty()) out["symbol"] = e.symbol;
      if (e.property_value) out["value"] = *e.property_value;
      return out;
    }
  }
  return nullptr;
}

inline json to_canonical_json(const TypedValue& tv) {
  if (tv.kind == Kind::Image) return "sha256:" + tv.as_image().digest;
  return to_run_json(tv);
}

inline json input_set_to_canonical_json(const InputSet& set) {
  json out = json::object();
  for (const auto& [name, tv] : set) out[name] = to_canonical_json(tv);
  return out;
}

}  // namespace fairflow
