#pragma once

// Embedded append-only results database.
//
// The log `results.jsonl` (one JSON object per line, UTF-8, LF) is the source
// of truth; `index.json` is a rebuildable sidecar mapping record ids and
// (tool, revision) pairs to byte offsets. Writers serialize through an
// advisory lock; readers never lock and see a consistent prefix.
//
// Scalar input/output values (Boolean, Integer, Number, Text, Choice,
// Element) are stored inline in their canonical run forms. Array, List,
// Dictionary and Image payloads are stored as digest references
// {"kind": "...", "ref": "sha256:<hex>"} — the bytes themselves live with the
// cache/artifact store.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fairflow/canonical.hpp"
#include "fairflow/errors.hpp"
#include "fairflow/manifest.hpp"
#include "fairflow/sha256.hpp"
#include "fairflow/util.hpp"
#include "fairflow/values.hpp"

namespace fairflow {

namespace fs = std::filesystem;

struct StepResult {
  std::string name;
  int exit_code = 0;
  double duration_s = 0.0;
  uint64_t stdout_bytes = 0;
  uint64_t stderr_bytes = 0;
  std::string stdout_sha256;
  std::string stderr_sha256;

  json to_json() const {
    json j = json::object();
    j["name"] = name;
    j["exit_code"] = exit_code;
    j["duration_s"] = duration_s;
    j["stdout_bytes"] = stdout_bytes;
    j["stderr_bytes"] = stderr_bytes;
    j["stdout_sha256"] = stdout_sha256;
    j["stderr_sha256"] = stderr_sha256;
    return j;
  }
  static StepResult from_json(const json& j) {
    StepResult s;
    s.name = j.at("name").get<std::string>();
    s.exit_code = j.at("exit_code").get<int>();
    s.duration_s = j.at("duration_s").get<double>();
    s.stdout_bytes = j.value("stdout_bytes", uint64_t{0});
    s.stderr_bytes = j.value("stderr_bytes", uint64_t{0});
    s.stdout_sha256 = j.value("stdout_sha256", std::string());
    s.stderr_sha256 = j.value("stderr_sha256", std::string());
    return s;
  }
  bool operator==(const StepResult&) const = default;
};

// The stored form of a value: inline canonical run form for scalar kinds, a
// digest reference for payload kinds.
inline json stored_form(const TypedValue& tv) {
  switch (tv.kind) {
    case Kind::Array:
    case Kind::List:
    case Kind::Dictionary: {
      json ref = json::object();
      ref["kind"] = kind_name(tv.kind);
      ref["ref"] = "sha256:" + sha256_hex(canonical_json(to_run_json(tv)));
      return ref;
    }
    case Kind::Image: {
      json ref = json::object();
      ref["kind"] = "Image";
      ref["ref"] = "sha256:" + tv.as_image().digest;
      return ref;
    }
    default: return to_run_json(tv);
  }
}

struct RunRecord {
  std::string id;  // ULID: lexicographic order == insertion order
  std::string tool;
  RevisionTag revision;
  std::string cache_key;
  std::string status;  // "completed" | "failed:<ErrorClass>"
  std::string started;
  std::string ended;
  bool cache_hit = false;
  json inputs = json::object();   // name -> stored form
  json outputs = json::object();  // name -> stored form
  std::vector<StepResult> steps;

  bool completed() const { return status == "completed"; }

  json to_json() const {
    json j = json::object();
    j["id"] = id;
    j["tool"] = tool;
    j["revision"] = revision.str();
    j["cache_key"] = cache_key;
    j["status"] = status;
    j["started"] = started;
    j["ended"] = ended;
    j["cache_hit"] = cache_hit;
    j["inputs"] = inputs;
    j["outputs"] = outputs;
    json steps_j = json::array();
    for (const auto& s : steps) steps_j.push_back(s.to_json());
    j["steps"] = std::move(steps_j);
    return j;
  }

  static RunRecord from_json(const json& j) {
    RunRecord r;
    r.id = j.at("id").get<std::string>();
    r.tool = j.at("tool").get<std::string>();
    r.revision = RevisionTag::parse(j.at("revision").get<std::string>());
    r.cache_key = j.at("cache_key").get<std::string>();
    r.status = j.at("status").get<std::string>();
    r.started = j.at("started").get<std::string>();
    r.ended = j.at("ended").get<std::string>();
    r.cache_hit = j.at("cache_hit").get<bool>();
    r.inputs = j.at("inputs");
    r.outputs = j.at("outputs");
    for (const auto& s : j.at("steps")) r.steps.push_back(StepResult::from_json(s));
    return r;
  }

  bool operator==(const RunRecord& o) const {
    return to_json() == o.to_json();
  }
};

// ---------------------------------------------------------------------------
// Query predicates
// ---------------------------------------------------------------------------

enum class PredOp { eq, ne, lt, le, gt, ge, in };

inline const char* pred_op_name(PredOp op) {
  switch (op) {
    case PredOp::eq: return "=";
    case PredOp::ne: return "!=";
    case PredOp::lt: return "<";
    case PredOp::le: return "<=";
    case PredOp::gt: return ">";
    case PredOp::ge: return ">=";
    case PredOp::in: return "in";
  }
  return "?";
}

struct PredAtom {
  std::string field;  // tool | revision | status | input.<name> | output.<name>
  PredOp op = PredOp::eq;
  json operand;
};

struct QueryPredicate {
  std::vector<PredAtom> atoms;  // conjunction

  // Convenience: the tool name this predicate pins down, if any.
  std::optional<std::string> constrained_tool() const {
    for (const auto& a : atoms)
      if (a.field == "tool" && a.op == PredOp::eq && a.operand.is_string())
        return a.operand.get<std::string>();
    return std::nullopt;
  }
};

namespace resultsdb_detail {

inline bool is_ordering(PredOp op) {
  return op == PredOp::lt || op == PredOp::le || op == PredOp::gt || op == PredOp::ge;
}

inline bool compare_num(double lhs, PredOp op, double rhs) {
  switch (op) {
    case PredOp::eq: return lhs == rhs;
    case PredOp::ne: return lhs != rhs;
    case PredOp::lt: return lhs < rhs;
    case PredOp::le: return lhs <= rhs;
    case PredOp::gt: return lhs > rhs;
    case PredOp::ge: return lhs >= rhs;
    case PredOp::in: return false;  // handled by caller
  }
  return false;
}

// Convert a predicate operand for a numeric field into the field's declared
// units. Accepts JSON numbers (already in declared units) and quantity
// strings.
inline double numeric_operand(const json& operand, const std::optional<UnitExpr>& declared,
                              const std::string& field) {
  if (operand.is_number()) return operand.get<double>();
  if (operand.is_string()) {
    ParsedQuantity q = parse_quantity_string(operand.get<std::string>());
    if (!q.unit) return q.value;
    UnitExpr target = declared ? *declared : parse_unit("");
    try {
      return q.unit->convert_to(q.value, target);
    } catch (const Error& e) {
      throw Error(Errc::predicate_type_error,
                  "operand for " + field + ": " + e.raw_message());
    }
  }
  throw Error(Errc::predicate_type_error,
              "operand for numeric field " + field + " must be a number or quantity string");
}

// Extract the comparable scalar from a stored form, given the declared kind.
// Returns nullopt when the record simply lacks the field (e.g. outputs of a
// failed run) — the atom is then false, not an error.
struct FieldView {
  enum class Type { number, boolean, text } type;
  double num = 0.0;
  bool flag = false;
  std::string text;
};

inline std::optional<FieldView> view_scalar(const json& stored, Kind kind) {
  FieldView v{};
  switch (kind) {
    case Kind::Boolean:
      if (!stored.is_boolean()) return std::nullopt;
      v.type = FieldView::Type::boolean;
      v.flag = stored.get<bool>();
      return v;
    case Kind::Integer:
      if (!stored.is_number()) return std::nullopt;
      v.type = FieldView::Type::number;
      v.num = stored.get<double>();
      return v;
    case Kind::Number: {
      v.type = FieldView::Type::number;
      if (stored.is_number()) {
        v.num = stored.get<double>();
        return v;
      }
      if (stored.is_object() && stored.contains("value") && stored["value"].is_number()) {
        v.num = stored["value"].get<double>();
        return v;
      }
      return std::nullopt;
    }
    case Kind::Text:
    case Kind::Choice:
      if (!stored.is_string()) return std::nullopt;
      v.type = FieldView::Type::text;
      v.text = stored.get<std::string>();
      return v;
    case Kind::Element: {
      v.type = FieldView::Type::text;
      if (stored.is_object() && stored.contains("symbol") && stored["symbol"].is_string()) {
        v.text = stored["symbol"].get<std::string>();
        return v;
      }
      return std::nullopt;
    }
    default: return std::nullopt;  // payload kinds are not comparable
  }
}

inline bool eval_string_atom(const std::string& value, const PredAtom& atom, bool status_field) {
  auto matches = [&](const json& operand) -> bool {
    if (!operand.is_string()) return false;
    std::string want = operand.get<std::string>();
    if (status_field && want == "failed") return value.rfind("failed", 0) == 0;
    return value == want;
  };
  switch (atom.op) {
    case PredOp::eq: return matches(atom.operand);
    case PredOp::ne: return !matches(atom.operand);
    case PredOp::in: {
      if (!atom.operand.is_array())
        throw Error(Errc::predicate_type_error, "operand of 'in' must be a list");
      for (const auto& item : atom.operand)
        if (matches(item)) return true;
      return false;
    }
    default:
      throw Error(Errc::predicate_type_error,
                  std::string("operator ") + pred_op_name(atom.op) +
                      " requires a numeric field, but " + atom.field + " is text");
  }
}

}  // namespace resultsdb_detail

// Evaluates one atom against one record. `manifest` supplies declared kinds
// and units for input./output. fields; pass nullptr for unconstrained-tool
// queries, where only tool/revision/status may be referenced.
inline bool eval_atom(const RunRecord& r, const PredAtom& atom, const ToolManifest* manifest) {
  using namespace resultsdb_detail;

  if (atom.field == "tool") return eval_string_atom(r.tool, atom, false);
  if (atom.field == "revision") return eval_string_atom(r.revision.str(), atom, false);
  if (atom.field == "status") return eval_string_atom(r.status, atom, true);

  bool is_input = atom.field.rfind("input.", 0) == 0;
  bool is_output = atom.field.rfind("output.", 0) == 0;
  if (!is_input && !is_output)
    throw Error(Errc::unknown_field, "unknown query field " + atom.field +
                                         " (expected tool, revision, status, input.<name> or "
                                         "output.<name>)");
  if (!manifest)
    throw Error(Errc::unknown_field,
                "field " + atom.field +
                    " requires the query to constrain a tool (add tool = <name>)");

  std::string name = atom.field.substr(is_input ? 6 : 7);
  Kind kind{};
  std::optional<UnitExpr> units;
  if (is_input) {
    const InputSpec* spec = manifest->find_input(name);
    if (!spec)
      throw Error(Errc::unknown_field,
                  "tool " + manifest->name + " declares no input named " + name);
    kind = spec->kind;
    units = spec->units;
  } else {
    const OutputSpec* spec = manifest->find_output(name);
    if (!spec)
      throw Error(Errc::unknown_field,
                  "tool " + manifest->name + " declares no output named " + name);
    kind = spec->kind;
    units = spec->units;
  }

  if (kind == Kind::Array || kind == Kind::List || kind == Kind::Dictionary ||
      kind == Kind::Image)
    throw Error(Errc::predicate_type_error,
                "field " + atom.field + " holds a " + std::string(kind_name(kind)) +
                    " payload and cannot be compared");

  if (is_ordering(atom.op) && !(kind == Kind::Number || kind == Kind::Integer))
    throw Error(Errc::predicate_type_error,
                std::string("operator ") + pred_op_name(atom.op) +
                    " requires a Number or Integer field, but " + atom.field + " is " +
                    std::string(kind_name(kind)));

  const json& bag = is_input ? r.inputs : r.outputs;
  if (!bag.is_object() || !bag.contains(name)) return false;  // absent ⇒ no match
  auto view = view_scalar(bag.at(name), kind);
  if (!view) return false;

  switch (view->type) {
    case FieldView::Type::number: {
      if (atom.op == PredOp::in) {
        if (!atom.operand.is_array())
          throw Error(Errc::predicate_type_error, "operand of 'in' must be a list");
        for (const auto& item : atom.operand)
          if (view->num == numeric_operand(item, units, atom.field)) return true;
        return false;
      }
      return compare_num(view->num, atom.op, numeric_operand(atom.operand, units, atom.field));
    }
    case FieldView::Type::boolean: {
      auto as_bool = [&](const json& operand) -> bool {
        if (operand.is_boolean()) return operand.get<bool>();
        throw Error(Errc::predicate_type_error,
                    "operand for Boolean field " + atom.field + " must be true or false");
      };
      if (atom.op == PredOp::eq) return view->flag == as_bool(atom.operand);
      if (atom.op == PredOp::ne) return view->flag != as_bool(atom.operand);
      if (atom.op == PredOp::in) {
        if (!atom.operand.is_array())
          throw Error(Errc::predicate_type_error, "operand of 'in' must be a list");
        for (const auto& item : atom.operand)
          if (view->flag == as_bool(item)) return true;
        return false;
      }
      throw Error(Errc::predicate_type_error,
                  std::string("operator ") + pred_op_name(atom.op) +
                      " requires a numeric field, but " + atom.field + " is Boolean");
    }
    case FieldView::Type::text: return eval_string_atom(view->text, atom, false);
  }
  return false;
}

inline bool eval_predicate(const RunRecord& r, const QueryPredicate& p,
                           const ToolManifest* manifest) {
  for (const auto& atom : p.atoms)
    if (!eval_atom(r, atom, manifest)) return false;
  return true;  // empty conjunction is vacuously true
}

// Parses the CLI mini-grammar: `field OP literal (AND field OP literal)*`,
// OP ∈ {=, !=, <, <=, >, >=, in}. Literals parse as JSON when possible, else
// as bare strings (so `status = completed` and `output.t >= "1 kK"` both
// work). The empty string parses to the empty conjunction.
inline QueryPredicate parse_predicate(const std::string& text) {
  QueryPredicate pred;
  size_t pos = 0;
  auto skip_ws = [&] {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  };
  auto take_token = [&]() -> std::string {
    skip_ws();
    size_t start = pos;
    if (pos < text.size() && text[pos] == '"') {
      ++pos;
      while (pos < text.size() && text[pos] != '"') pos += (text[pos] == '\\') ? 2 : 1;
      if (pos >= text.size())
        throw Error(Errc::grammar_error,
                    "unterminated string in predicate: " + text.substr(start));
      ++pos;
      return text.substr(start, pos - start);
    }
    if (pos < text.size() && text[pos] == '[') {
      int depth = 0;
      bool in_str = false;
      for (; pos < text.size(); ++pos) {
        char c = text[pos];
        if (in_str) {
          if (c == '\\') ++pos;
          else if (c == '"') in_str = false;
        } else if (c == '"') {
          in_str = true;
        } else if (c == '[') {
          ++depth;
        } else if (c == ']' && --depth == 0) {
          ++pos;
          return text.substr(start, pos - start);
        }
      }
      throw Error(Errc::grammar_error, "unterminated list in predicate: " + text.substr(start));
    }
    while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    return text.substr(start, pos - start);
  };

  skip_ws();
  while (pos < text.size()) {
    std::string field = take_token();
    std::string op_tok = take_token();
    skip_ws();
    if (field.empty() || op_tok.empty() || pos >= text.size())
      throw Error(Errc::grammar_error,
                  "predicate atom must be `field OP literal`, got: " + text);

    PredOp op;
    if (op_tok == "=" || op_tok == "==") op = PredOp::eq;
    else if (op_tok == "!=") op = PredOp::ne;
    else if (op_tok == "<") op = PredOp::lt;
    else if (op_tok == "<=") op = PredOp::le;
    else if (op_tok == ">") op = PredOp::gt;
    else if (op_tok == ">=") op = PredOp::ge;
    else if (op_tok == "in") op = PredOp::in;
    else
      throw Error(Errc::grammar_error, "unknown predicate operator " + op_tok);

    std::string lit = take_token();
    json operand = json::parse(lit, nullptr, false);
    if (operand.is_discarded()) {
      if (!lit.empty() && lit.front() == '[' && lit.back() == ']') {
        // bracket list of bare words: [probe, other]
        operand = json::array();
        std::string body = lit.substr(1, lit.size() - 2);
        size_t item_start = 0;
        while (item_start <= body.size()) {
          size_t comma = body.find(',', item_start);
          std::string item = body.substr(
              item_start, comma == std::string::npos ? std::string::npos : comma - item_start);
          size_t b = item.find_first_not_of(" \t");
          size_t e = item.find_last_not_of(" \t");
          item = (b == std::string::npos) ? std::string() : item.substr(b, e - b + 1);
          if (!item.empty()) {
            json parsed = json::parse(item, nullptr, false);
            operand.push_back(parsed.is_discarded() ? json(item) : parsed);
          }
          if (comma == std::string::npos) break;
          item_start = comma + 1;
        }
      } else {
        operand = json(lit);  // bare word ⇒ string
      }
    }

    pred.atoms.push_back(PredAtom{field, op, std::move(operand)});

    skip_ws();
    if (pos >= text.size()) break;
    std::string conj = take_token();
    std::string upper = conj;
    std::transform(upper.begin(), upper.end(), upper.begin(), ::toupper);
    if (upper != "AND")
      throw Error(Errc::grammar_error, "expected AND between predicate atoms, got " + conj);
    skip_ws();
    if (pos >= text.size())
      throw Error(Errc::grammar_error, "dangling AND at end of predicate");
  }
  return pred;
}

// ---------------------------------------------------------------------------
// Tabular results (summaries, query projections)
// ---------------------------------------------------------------------------

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;  // cells: null | bool | number | string

  bool operator==(const Table&) const = default;
};

namespace resultsdb_detail {

inline bool is_scalar_kind(Kind k) {
  switch (k) {
    case Kind::Boolean:
    case Kind::Integer:
    case Kind::Number:
    case Kind::Text:
    case Kind::Choice:
    case Kind::Element: return true;
    default: return false;
  }
}

// Flattened cell for a stored form: scalars inline, payload kinds by ref.
inline json flatten_cell(const json& stored, Kind kind) {
  if (!is_scalar_kind(kind)) {
    if (stored.is_object() && stored.contains("ref")) return stored.at("ref");
    return json();
  }
  auto view = view_scalar(stored, kind);
  if (!view) {
    // Element given as a bare property value stores {"value": v}
    if (kind == Kind::Element && stored.is_object() && stored.contains("value"))
      return stored.at("value");
    return json();
  }
  switch (view->type) {
    case FieldView::Type::number:
      if (kind == Kind::Integer) return json(static_cast<int64_t>(view->num));
      return json(view->num);
    case FieldView::Type::boolean: return json(view->flag);
    case FieldView::Type::text: return json(view->text);
  }
  return json();
}

}  // namespace resultsdb_detail

class ResultsDb {
 public:
  explicit ResultsDb(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw Error(Errc::io_error, "cannot create results dir " + dir_.string());
  }

  fs::path log_path() const { return dir_ / "results.jsonl"; }
  fs::path index_path() const { return dir_ / "index.json"; }

  // Appends one record. Ids must be fresh; the log is immutable afterwards.
  std::string save_record(const RunRecord& r) {
    if (r.id.empty()) throw Error(Errc::schema_error, "record id must not be empty");
    FileLock lock(dir_ / "results.lock");
    json index = load_or_rebuild_index();
    if (index["ids"].contains(r.id))
      throw Error(Errc::duplicate_id, "record id " + r.id + " already saved");

    std::string line = canonical_json(r.to_json());
    uint64_t offset = index["size"].get<uint64_t>();
    {
      std::ofstream out(log_path(), std::ios::binary | std::ios::app);
      if (!out) throw Error(Errc::io_error, "cannot open " + log_path().string());
      out << line << '\n';
      out.flush();
      if (!out) throw Error(Errc::io_error, "cannot append to " + log_path().string());
    }

    index["ids"][r.id] = offset;
    index["by_tool_rev"][r.tool + "\t" + r.revision.str()].push_back(offset);
    index["size"] = offset + line.size() + 1;
    write_file_atomic(index_path(), canonical_json(index));
    return r.id;
  }

  std::optional<RunRecord> fetch(const std::string& id) const {
    json index = load_or_rebuild_index();
    if (!index["ids"].contains(id)) return std::nullopt;
    return read_at(index["ids"][id].get<uint64_t>());
  }

  // Every record, in insertion (= id) order.
  std::vector<RunRecord> all_records() const {
    std::vector<RunRecord> out;
    std::ifstream in(log_path(), std::ios::binary);
    if (!in) return out;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      out.push_back(RunRecord::from_json(json::parse(line)));
    }
    return out;
  }

  // Records satisfying the conjunction, newest first. `manifest` resolves
  // input./output. fields; nullptr restricts fields to tool/revision/status.
  std::vector<RunRecord> query(const QueryPredicate& p, const ToolManifest* manifest,
                               std::optional<size_t> limit = std::nullopt) const {
    std::vector<RunRecord> candidates = candidate_records(p);
    std::vector<RunRecord> out;
    for (const auto& r : candidates)
      if (eval_predicate(r, p, manifest)) out.push_back(r);
    std::sort(out.begin(), out.end(),
              [](const RunRecord& a, const RunRecord& b) { return a.id > b.id; });
    if (limit && out.size() > *limit) out.resize(*limit);
    return out;
  }

  // One row per record of the tool (optionally one revision), newest first.
  // Columns: id, each scalar input, each scalar output (declaration order),
  // status, started, ended.
  Table summarize(const ToolManifest& manifest,
                  std::optional<RevisionTag> rev = std::nullopt) const {
    using namespace resultsdb_detail;
    Table t;
    t.columns.push_back("id");
    std::vector<std::pair<std::string, Kind>> in_cols, out_cols;
    for (const auto& [name, spec] : manifest.inputs)
      if (is_scalar_kind(spec.kind)) {
        t.columns.push_back("input." + name);
        in_cols.emplace_back(name, spec.kind);
      }
    for (const auto& [name, spec] : manifest.outputs)
      if (is_scalar_kind(spec.kind)) {
        t.columns.push_back("output." + name);
        out_cols.emplace_back(name, spec.kind);
      }
    t.columns.push_back("status");
    t.columns.push_back("started");
    t.columns.push_back("ended");

    QueryPredicate p;
    p.atoms.push_back(PredAtom{"tool", PredOp::eq, json(manifest.name)});
    if (rev) p.atoms.push_back(PredAtom{"revision", PredOp::eq, json(rev->str())});
    for (const auto& r : query(p, &manifest)) {
      std::vector<json> row;
      row.push_back(r.id);
      for (const auto& [name, kind] : in_cols)
        row.push_back(r.inputs.contains(name) ? flatten_cell(r.inputs.at(name), kind) : json());
      for (const auto& [name, kind] : out_cols)
        row.push_back(r.outputs.contains(name) ? flatten_cell(r.outputs.at(name), kind) : json());
      row.push_back(r.status);
      row.push_back(r.started);
      row.push_back(r.ended);
      t.rows.push_back(std::move(row));
    }
    return t;
  }

 private:
  fs::path dir_;

  json load_or_rebuild_index() const {
    uint64_t actual = 0;
    std::error_code ec;
    if (fs::exists(log_path())) actual = fs::file_size(log_path(), ec);
    if (fs::exists(index_path())) {
      json index = json::parse(read_file(index_path()), nullptr, false);
      if (!index.is_discarded() && index.is_object() && index.contains("size") &&
          index["size"].is_number() && index["size"].get<uint64_t>() == actual)
        return index;
    }
    // Rebuild by scanning the log.
    json index = json::object();
    index["size"] = actual;
    index["ids"] = json::object();
    index["by_tool_rev"] = json::object();
    std::ifstream in(log_path(), std::ios::binary);
    if (in) {
      std::string line;
      uint64_t offset = 0;
      while (std::getline(in, line)) {
        if (!line.empty()) {
          json j = json::parse(line, nullptr, false);
          if (!j.is_discarded()) {
            index["ids"][j.at("id").get<std::string>()] = offset;
            index["by_tool_rev"][j.at("tool").get<std::string>() + "\t" +
                                 j.at("revision").get<std::string>()]
                .push_back(offset);
          }
        }
        offset += line.size() + 1;
      }
    }
    return index;
  }

  RunRecord read_at(uint64_t offset) const {
    std::ifstream in(log_path(), std::ios::binary);
    if (!in) throw Error(Errc::io_error, "cannot open " + log_path().string());
    in.seekg(static_cast<std::streamoff>(offset));
    std::string line;
    if (!std::getline(in, line))
      throw Error(Errc::io_error, "truncated results log at offset " + std::to_string(offset));
    return RunRecord::from_json(json::parse(line));
  }

  // Index acceleration: a tool-equality atom narrows the scan to that tool's
  // offsets; anything else falls back to the full log.
  std::vector<RunRecord> candidate_records(const QueryPredicate& p) const {
    auto tool = p.constrained_tool();
    if (!tool) return all_records();
    json index = load_or_rebuild_index();
    std::vector<uint64_t> offsets;
    for (const auto& [key, offs] : index["by_tool_rev"].items()) {
      if (key.rfind(*tool + "\t", 0) != 0) continue;
      for (const auto& o : offs) offsets.push_back(o.get<uint64_t>());
    }
    std::sort(offsets.begin(), offsets.end());
    std::vector<RunRecord> out;
    out.reserve(offsets.size());
    for (uint64_t off : offsets) out.push_back(read_at(off));
    return out;
  }
};

// ---------------------------------------------------------------------------
// Output formats
// ---------------------------------------------------------------------------

inline std::string cell_text(const json& cell) {
  if (cell.is_null()) return "";
  if (cell.is_string()) return cell.get<std::string>();
  if (cell.is_boolean()) return cell.get<bool>() ? "true" : "false";
  if (cell.is_number_integer()) return std::to_string(cell.get<int64_t>());
  if (cell.is_number()) return shortest_double(cell.get<double>());
  return cell.dump();
}

inline std::string table_to_csv(const Table& t) {
  auto escape = [](const std::string& s) -> std::string {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
      if (c == '"') out += '"';
      out += c;
    }
    out += '"';
    return out;
  };
  std::string out;
  for (size_t i = 0; i < t.columns.size(); ++i) {
    if (i) out += ',';
    out += escape(t.columns[i]);
  }
  out += '\n';
  for (const auto& row : t.rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += escape(cell_text(row[i]));
    }
    out += '\n';
  }
  return out;
}

inline std::string table_to_jsonl(const Table& t) {
  std::string out;
  for (const auto& row : t.rows) {
    json obj = json::object();
    for (size_t i = 0; i < t.columns.size() && i < row.size(); ++i) obj[t.columns[i]] = row[i];
    out += canonical_json(obj);
    out += '\n';
  }
  return out;
}

inline std::string table_to_text(const Table& t) {
  std::vector<size_t> widths(t.columns.size());
  for (size_t i = 0; i < t.columns.size(); ++i) widths[i] = t.columns[i].size();
  std::vector<std::vector<std::string>> cells;
  for (const auto& row : t.rows) {
    std::vector<std::string> line;
    for (size_t i = 0; i < row.size(); ++i) {
      line.push_back(cell_text(row[i]));
      if (i < widths.size()) widths[i] = std::max(widths[i], line.back().size());
    }
    cells.push_back(std::move(line));
  }
  std::string out;
  auto emit_row = [&](const std::vector<std::string>& line) {
    for (size_t i = 0; i < line.size(); ++i) {
      if (i) out += "  ";
      out += line[i];
      if (i + 1 < line.size()) out.append(widths[i] - line[i].size(), ' ');
    }
    out += '\n';
  };
  emit_row(t.columns);
  std::vector<std::string> rule;
  for (size_t w : widths) rule.push_back(std::string(w, '-'));
  emit_row(rule);
  for (const auto& line : cells) emit_row(line);
  return out;
}

}  // namespace fairflow
