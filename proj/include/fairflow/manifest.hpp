#pragma once

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "fairflow/canonical.hpp"
#include "fairflow/elements.hpp"
#include "fairflow/errors.hpp"
#include "fairflow/units.hpp"
#include "fairflow/util.hpp"

namespace fairflow {

enum class Kind {
  Boolean,
  Integer,
  Number,
  Array,
  Text,
  Choice,
  List,
  Dictionary,
  Image,
  Element,
};

inline std::string_view kind_name(Kind k) {
  switch (k) {
    case Kind::Boolean: return "Boolean";
    case Kind::Integer: return "Integer";
    case Kind::Number: return "Number";
    case Kind::Array: return "Array";
    case Kind::Text: return "Text";
    case Kind::Choice: return "Choice";
    case Kind::List: return "List";
    case Kind::Dictionary: return "Dictionary";
    case Kind::Image: return "Image";
    case Kind::Element: return "Element";
  }
  return "?";
}

inline std::optional<Kind> kind_from_name(std::string_view s) {
  static constexpr Kind kAll[] = {Kind::Boolean, Kind::Integer, Kind::Number,     Kind::Array,
                                  Kind::Text,    Kind::Choice,  Kind::List,       Kind::Dictionary,
                                  Kind::Image,   Kind::Element};
  for (Kind k : kAll)
    if (kind_name(k) == s) return k;
  return std::nullopt;
}

// `dev` is the mutable working copy; `r<N>` (N >= 1) is an immutable
// published revision.
struct RevisionTag {
  int number = 0;  // 0 means dev

  bool is_dev() const { return number == 0; }
  std::string str() const { return is_dev() ? "dev" : "r" + std::to_string(number); }

  static RevisionTag dev() { return {}; }
  static RevisionTag published(int n) { return {n}; }

  static RevisionTag parse(std::string_view s) {
    if (s == "dev") return dev();
    if (s.size() >= 2 && s[0] == 'r') {
      int n = 0;
      auto [p, ec] = std::from_chars(s.data() + 1, s.data() + s.size(), n);
      if (ec == std::errc() && p == s.data() + s.size() && n >= 1 && s[1] != '0')
        return published(n);
    }
    throw Error(Errc::schema_error, "bad revision tag '" + std::string(s) + "' (want dev or r<N>)");
  }

  bool operator==(const RevisionTag&) const = default;
};

struct InputSpec {
  Kind kind = Kind::Text;
  std::string description;
  std::optional<json> default_value;
  std::optional<UnitExpr> units;       // Number, Array only
  std::optional<double> min, max;      // Integer, Number only
  std::vector<std::string> options;    // Choice only
  std::optional<std::string> property; // Element only

  bool operator==(const InputSpec&) const = default;
};

struct OutputSpec {
  Kind kind = Kind::Text;
  std::string description;
  std::optional<UnitExpr> units;  // Number, Array only

  bool operator==(const OutputSpec&) const = default;
};

struct WorkflowStep {
  std::string name;
  std::vector<std::string> command;
  std::optional<int> timeout_seconds;

  bool operator==(const WorkflowStep&) const = default;
};

struct ToolManifest {
  std::string name;
  RevisionTag revision;
  std::string description;
  std::vector<std::pair<std::string, InputSpec>> inputs;    // declaration order
  std::vector<std::pair<std::string, OutputSpec>> outputs;  // declaration order
  std::vector<std::string> files;
  std::vector<WorkflowStep> steps;

  const InputSpec* find_input(std::string_view name) const {
    for (const auto& [n, s] : inputs)
      if (n == name) return &s;
    return nullptr;
  }
  const OutputSpec* find_output(std::string_view name) const {
    for (const auto& [n, s] : outputs)
      if (n == name) return &s;
    return nullptr;
  }

  bool operator==(const ToolManifest&) const = default;
};

namespace manifest_detail {

inline bool is_tool_name(std::string_view s) {
  if (s.empty() || s.size() > 64) return false;
  if (!(s[0] >= 'a' && s[0] <= 'z')) return false;
  for (char c : s.substr(1))
    if (!((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_')) return false;
  return true;
}

inline bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; };
  if (!alpha(s[0])) return false;
  for (char c : s.substr(1))
    if (!(alpha(c) || (c >= '0' && c <= '9'))) return false;
  return true;
}

inline std::optional<int64_t> parse_int_strict(const std::string& s) {
  if (s.empty()) return std::nullopt;
  const char* b = s.data();
  const char* e = b + s.size();
  if (*b == '+') ++b;
  int64_t v = 0;
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e) return std::nullopt;
  return v;
}

inline std::optional<double> parse_double_strict(const std::string& s) {
  if (s.empty()) return std::nullopt;
  const char* b = s.data();
  const char* e = b + s.size();
  if (*b == '+') ++b;
  double v = 0;
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e || !std::isfinite(v)) return std::nullopt;
  return v;
}

// YAML -> JSON with conservative plain-scalar inference: quoted scalars are
// always strings; plain scalars become null/bool/int/double only on an exact
// match, otherwise strings.
inline json yaml_to_json(const YAML::Node& n) {
  switch (n.Type()) {
    case YAML::NodeType::Null:
      return nullptr;
    case YAML::NodeType::Scalar: {
      const std::string& s = n.Scalar();
      if (n.Tag() != "?") return s;
      if (s == "null" || s == "~") return nullptr;
      if (s == "true") return true;
      if (s == "false") return false;
      if (auto i = parse_int_strict(s)) return *i;
      if (auto d = parse_double_strict(s)) return *d;
      return s;
    }
    case YAML::NodeType::Sequence: {
      json arr = json::array();
      for (const auto& item : n) arr.push_back(yaml_to_json(item));
      return arr;
    }
    case YAML::NodeType::Map: {
      json obj = json::object();
      for (const auto& kv : n) {
        if (!kv.first.IsScalar())
          throw Error(Errc::schema_error, "mapping keys must be scalars");
        const std::string key = kv.first.Scalar();
        if (obj.contains(key))
          throw Error(Errc::schema_error, "duplicate key '" + key + "'");
        obj[key] = yaml_to_json(kv.second);
      }
      return obj;
    }
    default:
      throw Error(Errc::schema_error, "unsupported YAML node type");
  }
}

inline std::string scalar_text(const YAML::Node& n, const std::string& what) {
  if (!n.IsScalar()) throw Error(Errc::schema_error, what + " must be a scalar");
  return n.Scalar();
}

inline double numeric_value(const YAML::Node& n, const std::string& what) {
  json j = yaml_to_json(n);
  if (!j.is_number()) throw Error(Errc::schema_error, what + " must be a number");
  return j.get<double>();
}

inline void check_keys(const YAML::Node& map, const std::set<std::string>& allowed,
                       const std::string& where) {
  std::set<std::string> seen;
  for (const auto& kv : map) {
    if (!kv.first.IsScalar())
      throw Error(Errc::schema_error, where + ": mapping keys must be scalars");
    const std::string key = kv.first.Scalar();
    if (!allowed.count(key))
      throw Error(Errc::schema_error, where + ": unknown key '" + key + "'");
    if (!seen.insert(key).second)
      throw Error(Errc::schema_error, where + ": duplicate key '" + key + "'");
  }
}

// "5 nm" or bare number -> value expressed in the declared units.
inline double default_as_number(const json& def, const std::optional<UnitExpr>& units,
                                const std::string& where) {
  if (def.is_number()) return def.get<double>();
  if (def.is_string()) {
    ParsedQuantity q = parse_quantity_string(def.get<std::string>());
    if (!q.unit) return q.value;
    UnitExpr target = units ? *units : UnitExpr{};
    return q.unit->convert_to(q.value, target);
  }
  throw Error(Errc::schema_error, where + ": default must be a number or quantity string");
}

inline InputSpec parse_input_spec(const std::string& name, const YAML::Node& node) {
  const std::string where = "input '" + name + "'";
  if (!node.IsMap()) throw Error(Errc::schema_error, where + " must be a mapping");
  check_keys(node, {"type", "description", "value", "units", "min", "max", "options", "property"},
             where);

  InputSpec spec;
  if (!node["type"]) throw Error(Errc::schema_error, where + ": missing 'type'");
  const std::string kind_text = scalar_text(node["type"], where + " type");
  auto kind = kind_from_name(kind_text);
  if (!kind) throw Error(Errc::schema_error, where + ": unknown kind '" + kind_text + "'");
  spec.kind = *kind;

  if (node["description"]) spec.description = scalar_text(node["description"], where + " description");
  if (node["value"]) spec.default_value = yaml_to_json(node["value"]);

  if (node["units"]) {
    if (spec.kind != Kind::Number && spec.kind != Kind::Array)
      throw Error(Errc::schema_error,
                  where + ": 'units' is not legal for kind " + std::string(kind_name(spec.kind)));
    spec.units = parse_unit(scalar_text(node["units"], where + " units"));
  }
  for (const char* bound : {"min", "max"}) {
    if (!node[bound]) continue;
    if (spec.kind != Kind::Integer && spec.kind != Kind::Number)
      throw Error(Errc::schema_error, where + ": '" + bound + "' is not legal for kind " +
                                          std::string(kind_name(spec.kind)));
    double v = numeric_value(node[bound], where + " " + bound);
    (std::string_view(bound) == "min" ? spec.min : spec.max) = v;
  }
  if (node["options"]) {
    if (spec.kind != Kind::Choice)
      throw Error(Errc::schema_error,
                  where + ": 'options' is not legal for kind " + std::string(kind_name(spec.kind)));
    if (!node["options"].IsSequence())
      throw Error(Errc::schema_error, where + ": 'options' must be a list");
    for (const auto& opt : node["options"])
      spec.options.push_back(scalar_text(opt, where + " option"));
    std::set<std::string> uniq(spec.options.begin(), spec.options.end());
    if (uniq.size() != spec.options.size())
      throw Error(Errc::schema_error, where + ": duplicate options");
  }
  if (node["property"]) {
    if (spec.kind != Kind::Element)
      throw Error(Errc::schema_error, where + ": 'property' is not legal for kind " +
                                          std::string(kind_name(spec.kind)));
    std::string prop = scalar_text(node["property"], where + " property");
    if (!is_element_property(prop))
      throw Error(Errc::schema_error, where + ": unknown element property '" + prop + "'");
    spec.property = prop;
  }

  if (spec.kind == Kind::Choice && spec.options.empty())
    throw Error(Errc::schema_error, where + ": Choice requires a non-empty 'options' list");
  if (spec.min && spec.max && *spec.min > *spec.max)
    throw Error(Errc::schema_error, where + ": min " + shortest_double(*spec.min) + " > max " +
                                        shortest_double(*spec.max));

  if (spec.default_value) {
    if (spec.kind == Kind::Choice) {
      if (!spec.default_value->is_string() ||
          std::find(spec.options.begin(), spec.options.end(),
                    spec.default_value->get<std::string>()) == spec.options.end())
        throw Error(Errc::schema_error,
                    where + ": default " + spec.default_value->dump() + " not in options");
    } else if ((spec.min || spec.max) &&
               (spec.default_value->is_number() || spec.default_value->is_string())) {
      double v = default_as_number(*spec.default_value, spec.units, where);
      if ((spec.min && v < *spec.min) || (spec.max && v > *spec.max))
        throw Error(Errc::schema_error, where + ": default " + shortest_double(v) +
                                            " outside [" +
                                            (spec.min ? shortest_double(*spec.min) : "") + ", " +
                                            (spec.max ? shortest_double(*spec.max) : "") + "]");
    }
  }
  return spec;
}

inline OutputSpec parse_output_spec(const std::string& name, const YAML::Node& node) {
  const std::string where = "output '" + name + "'";
  if (!node.IsMap()) throw Error(Errc::schema_error, where + " must be a mapping");
  check_keys(node, {"type", "description", "units"}, where);

  OutputSpec spec;
  if (!node["type"]) throw Error(Errc::schema_error, where + ": missing 'type'");
  const std::string kind_text = scalar_text(node["type"], where + " type");
  auto kind = kind_from_name(kind_text);
  if (!kind) throw Error(Errc::schema_error, where + ": unknown kind '" + kind_text + "'");
  spec.kind = *kind;
  if (node["description"]) spec.description = scalar_text(node["description"], where + " description");
  if (node["units"]) {
    if (spec.kind != Kind::Number && spec.kind != Kind::Array)
      throw Error(Errc::schema_error,
                  where + ": 'units' is not legal for kind " + std::string(kind_name(spec.kind)));
    spec.units = parse_unit(scalar_text(node["units"], where + " units"));
  }
  return spec;
}

inline WorkflowStep parse_step(size_t index, const YAML::Node& node) {
  const std::string where = "step " + std::to_string(index + 1);
  if (!node.IsMap()) throw Error(Errc::schema_error, where + " must be a mapping");
  check_keys(node, {"name", "command", "timeout_seconds"}, where);
  WorkflowStep step;
  if (!node["name"]) throw Error(Errc::schema_error, where + ": missing 'name'");
  step.name = scalar_text(node["name"], where + " name");
  if (!is_identifier(step.name))
    throw Error(Errc::schema_error, where + ": bad step name '" + step.name + "'");
  if (!node["command"] || !node["command"].IsSequence() || node["command"].size() == 0)
    throw Error(Errc::schema_error, where + ": 'command' must be a non-empty argument list");
  for (const auto& arg : node["command"])
    step.command.push_back(scalar_text(arg, where + " command argument"));
  if (node["timeout_seconds"]) {
    json j = yaml_to_json(node["timeout_seconds"]);
    if (!j.is_number_integer() || j.get<int64_t>() <= 0)
      throw Error(Errc::schema_error, where + ": timeout_seconds must be a positive integer");
    step.timeout_seconds = static_cast<int>(j.get<int64_t>());
  }
  return step;
}

inline void check_file_path(const std::string& path) {
  if (path.empty()) throw Error(Errc::schema_error, "empty path in files");
  if (path.front() == '/')
    throw Error(Errc::schema_error, "files entry '" + path + "' must be relative");
  size_t pos = 0;
  while (pos <= path.size()) {
    size_t slash = path.find('/', pos);
    std::string_view seg(path.data() + pos,
                         (slash == std::string::npos ? path.size() : slash) - pos);
    if (seg == "..")
      throw Error(Errc::schema_error, "files entry '" + path + "' contains a '..' segment");
    if (slash == std::string::npos) break;
    pos = slash + 1;
  }
}

inline std::string yaml_quote(std::string_view s) {
  std::string out = "\"";
  for (unsigned char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (c < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\x%02x", c);
          out += buf;
        } else {
          out += static_cast<char>(c);
        }
    }
  }
  out += '"';
  return out;
}

}  // namespace manifest_detail

inline ToolManifest parse_manifest(std::string_view text) {
  using namespace manifest_detail;
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw Error(Errc::syntax_error, std::string("malformed YAML: ") + e.what());
  }
  if (!root.IsMap()) throw Error(Errc::schema_error, "manifest root must be a mapping");
  check_keys(root, {"name", "revision", "description", "inputs", "outputs", "files", "steps"},
             "manifest");

  ToolManifest m;
  if (!root["name"]) throw Error(Errc::schema_error, "manifest: missing 'name'");
  m.name = scalar_text(root["name"], "tool name");
  if (!is_tool_name(m.name))
    throw Error(Errc::schema_error,
                "bad tool name '" + m.name + "' (want [a-z][a-z0-9_]{0,63})");
  m.revision =
      root["revision"] ? RevisionTag::parse(scalar_text(root["revision"], "revision")) : RevisionTag::dev();
  if (root["description"] && !root["description"].IsNull())
    m.description = scalar_text(root["description"], "description");

  auto parse_section = [&](const char* section, auto parse_one, auto& out_vec) {
    YAML::Node node = root[section];
    if (!node || node.IsNull()) return;
    if (!node.IsMap()) throw Error(Errc::schema_error, std::string(section) + " must be a mapping");
    std::set<std::string> seen;
    for (const auto& kv : node) {
      if (!kv.first.IsScalar())
        throw Error(Errc::schema_error, std::string(section) + " keys must be scalars");
      const std::string name = kv.first.Scalar();
      if (!is_identifier(name))
        throw Error(Errc::schema_error, std::string(section) + ": bad name '" + name + "'");
      if (!seen.insert(name).second)
        throw Error(Errc::schema_error, std::string(section) + ": duplicate name '" + name + "'");
      out_vec.emplace_back(name, parse_one(name, kv.second));
    }
  };
  parse_section("inputs", parse_input_spec, m.inputs);
  parse_section("outputs", parse_output_spec, m.outputs);

  if (root["files"] && !root["files"].IsNull()) {
    if (!root["files"].IsSequence()) throw Error(Errc::schema_error, "files must be a list");
    for (const auto& f : root["files"]) {
      std::string path = scalar_text(f, "files entry");
      check_file_path(path);
      m.files.push_back(std::move(path));
    }
  }

  if (!root["steps"] || !root["steps"].IsSequence() || root["steps"].size() == 0)
    throw Error(Errc::schema_error, "manifest: 'steps' must be a non-empty list");
  std::set<std::string> step_names;
  size_t idx = 0;
  for (const auto& s : root["steps"]) {
    WorkflowStep step = parse_step(idx++, s);
    if (!step_names.insert(step.name).second)
      throw Error(Errc::schema_error, "duplicate step name '" + step.name + "'");
    m.steps.push_back(std::move(step));
  }
  return m;
}

// Deterministic emission: fixed key order, all strings double-quoted,
// defaults as JSON flow values. serialize(parse(serialize(m))) is
// byte-identical to serialize(m).
inline std::string serialize_manifest(const ToolManifest& m) {
  using namespace manifest_detail;
  std::string out;
  out += "name: " + yaml_quote(m.name) + "\n";
  out += "revision: " + yaml_quote(m.revision.str()) + "\n";
  out += "description: " + yaml_quote(m.description) + "\n";

  auto emit_units = [&](const std::optional<UnitExpr>& u, const char* indent) {
    if (u) out += std::string(indent) + "units: " + yaml_quote(u->text()) + "\n";
  };

  out += "inputs:";
  out += m.inputs.empty() ? " {}\n" : "\n";
  for (const auto& [name, spec] : m.inputs) {
    out += "  " + name + ":\n";
    out += "    type: " + yaml_quote(kind_name(spec.kind)) + "\n";
    if (!spec.description.empty()) out += "    description: " + yaml_quote(spec.description) + "\n";
    if (spec.default_value) out += "    value: " + spec.default_value->dump() + "\n";
    emit_units(spec.units, "    ");
    if (spec.min) out += "    min: " + shortest_double(*spec.min) + "\n";
    if (spec.max) out += "    max: " + shortest_double(*spec.max) + "\n";
    if (!spec.options.empty()) {
      out += "    options: [";
      for (size_t i = 0; i < spec.options.size(); ++i)
        out += (i ? ", " : "") + yaml_quote(spec.options[i]);
      out += "]\n";
    }
    if (spec.property) out += "    property: " + yaml_quote(*spec.property) + "\n";
  }

  out += "outputs:";
  out += m.outputs.empty() ? " {}\n" : "\n";
  for (const auto& [name, spec] : m.outputs) {
    out += "  " + name + ":\n";
    out += "    type: " + yaml_quote(kind_name(spec.kind)) + "\n";
    if (!spec.description.empty()) out += "    description: " + yaml_quote(spec.description) + "\n";
    emit_units(spec.units, "    ");
  }

  out += "files: [";
  for (size_t i = 0; i < m.files.size(); ++i) out += (i ? ", " : "") + yaml_quote(m.files[i]);
  out += "]\n";

  out += "steps:\n";
  for (const auto& step : m.steps) {
    out += "  - name: " + yaml_quote(step.name) + "\n";
    out += "    command: [";
    for (size_t i = 0; i < step.command.size(); ++i)
      out += (i ? ", " : "") + yaml_quote(step.command[i]);
    out += "]\n";
    if (step.timeout_seconds)
      out += "    timeout_seconds: " + std::to_string(*step.timeout_seconds) + "\n";
  }
  return out;
}

inline std::string describe(const ToolManifest& m) {
  std::string out = m.name + " (" + m.revision.str() + ")\n";
  if (!m.description.empty()) out += m.description + "\n";

  auto line_for = [&](const std::string& name, Kind kind, const std::optional<double>& min,
                      const std::optional<double>& max, const std::optional<UnitExpr>& units,
                      const std::vector<std::string>& options,
                      const std::optional<std::string>& property, const std::string& desc) {
    std::string line = "  " + name + " " + std::string(kind_name(kind));
    if (min && max)
      line += " [" + shortest_double(*min) + ", " + shortest_double(*max) + "]";
    else if (min)
      line += " [min " + shortest_double(*min) + "]";
    else if (max)
      line += " [max " + shortest_double(*max) + "]";
    if (units) line += " " + units->text();
    if (!options.empty()) {
      line += " {";
      for (size_t i = 0; i < options.size(); ++i) line += (i ? ", " : "") + options[i];
      line += "}";
    }
    if (property) line += " (" + *property + ")";
    if (!desc.empty()) line += " - " + desc;
    return line + "\n";
  };

  out += "inputs:\n";
  for (const auto& [name, s] : m.inputs)
    out += line_for(name, s.kind, s.min, s.max, s.units, s.options, s.property, s.description);
  out += "outputs:\n";
  for (const auto& [name, s] : m.outputs)
    out += line_for(name, s.kind, std::nullopt, std::nullopt, s.units, {}, std::nullopt,
                    s.description);
  return out;
}

struct Bundle {
  std::filesystem::path dir;
  ToolManifest manifest;
};

inline Bundle load_bundle(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::path manifest_path = dir / "tool.yaml";
  if (!fs::exists(manifest_path))
    throw Error(Errc::tool_not_found, "no tool.yaml in " + dir.string());
  ToolManifest m = parse_manifest(read_file(manifest_path));
  for (const auto& f : m.files)
    if (!fs::exists(dir / f))
      throw Error(Errc::schema_error, "files entry '" + f + "' missing from bundle " + dir.string());
  return {dir, std::move(m)};
}

}  // namespace fairflow
