// fairflow — command-line surface of the workflow engine.
//
// Exit codes: 0 success, 1 user/validation error, 2 execution failure,
// 3 internal error. Every store lives under FAIRFLOW_HOME (default
// ~/.fairflow); concurrent invocations are safe, the stores lock themselves.

#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fairflow/engine.hpp"

namespace fs = std::filesystem;
using namespace fairflow;

namespace {

fs::path resolve_home(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("FAIRFLOW_HOME"); env && *env) return env;
  if (const char* home = std::getenv("HOME"); home && *home)
    return fs::path(home) / ".fairflow";
  return fs::current_path() / ".fairflow";
}

std::optional<RevisionTag> parse_rev_flag(const std::string& rev) {
  if (rev.empty()) return std::nullopt;
  return RevisionTag::parse(rev);
}

// --set k=v: value parses as JSON when possible, else as a quantity string,
// else as plain text. The latter two both travel as a JSON string; the
// validator disambiguates them per input kind.
std::map<std::string, json> parse_sets(const std::vector<std::string>& sets) {
  std::map<std::string, json> overrides;
  for (const std::string& kv : sets) {
    size_t eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
      throw Error(Errc::schema_error,
                  "--set expects name=value, got '" + kv + "'");
    std::string key = kv.substr(0, eq);
    std::string raw = kv.substr(eq + 1);
    json parsed = json::parse(raw, nullptr, /*allow_exceptions=*/false);
    overrides[key] = parsed.is_discarded() ? json(raw) : parsed;
  }
  return overrides;
}

std::string kind_str(Kind k) { return std::string(kind_name(k)); }

json spec_row_json(const std::string& name, const InputSpec& s) {
  json row = json::object();
  row["name"] = name;
  row["type"] = kind_str(s.kind);
  row["description"] = s.description;
  if (s.units) row["units"] = s.units->text();
  if (s.default_value) row["value"] = *s.default_value;
  if (s.min) row["min"] = *s.min;
  if (s.max) row["max"] = *s.max;
  if (!s.options.empty()) row["options"] = s.options;
  if (s.property) row["property"] = *s.property;
  return row;
}

json spec_row_json(const std::string& name, const OutputSpec& s) {
  json row = json::object();
  row["name"] = name;
  row["type"] = kind_str(s.kind);
  row["description"] = s.description;
  if (s.units) row["units"] = s.units->text();
  return row;
}

void print_table(const Table& t, const std::string& format) {
  if (format == "csv")
    std::cout << table_to_csv(t);
  else if (format == "jsonl")
    std::cout << table_to_jsonl(t);
  else
    std::cout << table_to_text(t);
}

std::string render_output_value(const TypedValue& tv, const OutputSpec& spec) {
  switch (tv.kind) {
    case Kind::Boolean: return tv.as_bool() ? "true" : "false";
    case Kind::Integer: return std::to_string(tv.as_int());
    case Kind::Number: {
      const NumberValue& n = tv.as_number();
      std::string s = shortest_double(n.value);
      if (n.units) s += " " + n.units->text();
      return s;
    }
    case Kind::Text:
    case Kind::Choice: return tv.as_text();
    case Kind::Element: {
      const ElementValue& e = tv.as_element();
      std::string s = e.symbol;
      if (e.property_value) {
        if (!s.empty()) s += " ";
        s += shortest_double(*e.property_value);
      }
      return s;
    }
    case Kind::Array: {
      const ArrayValue& a = tv.as_array();
      std::string shape;
      for (size_t d : a.shape) {
        if (!shape.empty()) shape += " x ";
        shape += std::to_string(d);
      }
      std::string s = "array [" + shape + "]";
      if (spec.units) s += " " + spec.units->text();
      if (a.data.size() <= 12) s += " " + canonical_json(to_run_json(tv));
      return s;
    }
    case Kind::List:
    case Kind::Dictionary: return canonical_json(tv.as_json());
    case Kind::Image: {
      const ImageValue& img = tv.as_image();
      return img.format + " image, " + std::to_string(img.bytes) + " bytes, " +
             img.file.string();
    }
  }
  return "";
}

Table records_table(const std::vector<RunRecord>& records) {
  Table t;
  t.columns = {"id", "tool", "revision", "status", "started", "ended"};
  for (const RunRecord& r : records)
    t.rows.push_back({json(r.id), json(r.tool), json(r.revision.str()),
                      json(r.status), json(r.started), json(r.ended)});
  return t;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fairflow — FAIR simulation workflows: publish tools, run them "
               "with validated inputs, cache and query the results"};
  app.require_subcommand(1);

  std::string home_flag;
  app.add_option("--home", home_flag,
                 "store root (overrides FAIRFLOW_HOME; default ~/.fairflow)");

  std::function<int(Engine&)> action;

  // ---- list ----------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("list", "List installed and published tools");
    auto filter = std::make_shared<std::string>();
    auto format = std::make_shared<std::string>("table");
    cmd->add_option("--filter", *filter, "substring match on name or description");
    cmd->add_option("--format", *format, "table|jsonl")
        ->check(CLI::IsMember({"table", "jsonl"}));
    cmd->callback([&action, filter, format] {
      action = [filter, format](Engine& engine) {
        std::vector<ToolListing> tools = engine.registry().find_tools(*filter);
        if (*format == "jsonl") {
          for (const ToolListing& t : tools) {
            json row = {{"name", t.name},
                        {"revision", t.latest.str()},
                        {"description", t.description}};
            std::cout << canonical_json(row) << "\n";
          }
          return 0;
        }
        Table table;
        table.columns = {"name", "revision", "description"};
        for (const ToolListing& t : tools)
          table.rows.push_back({json(t.name), json(t.latest.str()), json(t.description)});
        print_table(table, "table");
        return 0;
      };
    });
  }

  // ---- search --------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("search", "Resolve one tool and show its identity");
    auto name = std::make_shared<std::string>();
    auto rev = std::make_shared<std::string>();
    auto format = std::make_shared<std::string>("table");
    cmd->add_option("name", *name, "tool name")->required();
    cmd->add_option("--rev", *rev, "revision tag (rN or dev; default latest)");
    cmd->add_option("--format", *format, "table|jsonl")
        ->check(CLI::IsMember({"table", "jsonl"}));
    cmd->callback([&action, name, rev, format] {
      action = [name, rev, format](Engine& engine) {
        ResolvedTool t = engine.registry().search_tool(*name, parse_rev_flag(*rev));
        if (*format == "jsonl") {
          json row = {{"name", t.name},
                      {"revision", t.revision.str()},
                      {"description", t.manifest.description},
                      {"doi", t.doi}};
          std::cout << canonical_json(row) << "\n";
          return 0;
        }
        std::cout << t.name << " " << t.revision.str() << "\n";
        if (!t.doi.empty()) std::cout << "doi: " << t.doi << "\n";
        if (!t.manifest.description.empty())
          std::cout << t.manifest.description << "\n";
        std::vector<PublishedRevision> revs = engine.registry().revisions(*name);
        for (const PublishedRevision& pr : revs)
          std::cout << "  " << pr.revision.str() << "  " << pr.doi << "  published "
                    << pr.published << "\n";
        return 0;
      };
    });
  }

  // ---- describe ------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("describe", "Full manifest description");
    auto name = std::make_shared<std::string>();
    auto rev = std::make_shared<std::string>();
    cmd->add_option("name", *name, "tool name")->required();
    cmd->add_option("--rev", *rev, "revision tag (rN or dev; default latest)");
    cmd->callback([&action, name, rev] {
      action = [name, rev](Engine& engine) {
        ResolvedTool t = engine.registry().search_tool(*name, parse_rev_flag(*rev));
        std::cout << describe(t.manifest);
        if (!t.doi.empty()) std::cout << "doi: " << t.doi << "\n";
        return 0;
      };
    });
  }

  // ---- inputs / outputs ----------------------------------------------
  for (const bool is_inputs : {true, false}) {
    auto* cmd = app.add_subcommand(is_inputs ? "inputs" : "outputs",
                                   is_inputs ? "Declared inputs of a tool"
                                             : "Declared outputs of a tool");
    auto name = std::make_shared<std::string>();
    auto rev = std::make_shared<std::string>();
    auto format = std::make_shared<std::string>("table");
    cmd->add_option("name", *name, "tool name")->required();
    cmd->add_option("--rev", *rev, "revision tag (rN or dev; default latest)");
    cmd->add_option("--format", *format, "table|jsonl")
        ->check(CLI::IsMember({"table", "jsonl"}));
    cmd->callback([&action, name, rev, format, is_inputs] {
      action = [name, rev, format, is_inputs](Engine& engine) {
        std::vector<json> rows;
        if (is_inputs) {
          for (const auto& [n, spec] :
               engine.registry().get_inputs(*name, parse_rev_flag(*rev)))
            rows.push_back(spec_row_json(n, spec));
        } else {
          for (const auto& [n, spec] :
               engine.registry().get_outputs(*name, parse_rev_flag(*rev)))
            rows.push_back(spec_row_json(n, spec));
        }
        if (*format == "jsonl") {
          for (const json& row : rows) std::cout << canonical_json(row) << "\n";
          return 0;
        }
        Table table;
        table.columns = {"name", "type", "units", "default", "range", "description"};
        for (const json& row : rows) {
          json range;
          if (row.contains("min") || row.contains("max")) {
            std::string lo = row.contains("min") ? cell_text(row["min"]) : "";
            std::string hi = row.contains("max") ? cell_text(row["max"]) : "";
            range = "[" + lo + ", " + hi + "]";
          } else if (row.contains("options")) {
            std::string opts;
            for (const auto& o : row["options"]) {
              if (!opts.empty()) opts += ", ";
              opts += o.get<std::string>();
            }
            range = opts;
          } else if (row.contains("property")) {
            range = "property: " + row["property"].get<std::string>();
          }
          table.rows.push_back({row["name"], row["type"],
                                row.contains("units") ? row["units"] : json(),
                                row.contains("value") ? row["value"] : json(), range,
                                row["description"]});
        }
        print_table(table, "table");
        return 0;
      };
    });
  }

  // ---- validate ------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("validate",
                                   "Validate a full input set without running");
    auto name = std::make_shared<std::string>();
    auto rev = std::make_shared<std::string>();
    auto sets = std::make_shared<std::vector<std::string>>();
    cmd->add_option("name", *name, "tool name")->required();
    cmd->add_option("--rev", *rev, "revision tag (rN or dev; default latest)");
    cmd->add_option("--set", *sets, "input override name=value (repeatable)");
    cmd->callback([&action, name, rev, sets] {
      action = [name, rev, sets](Engine& engine) {
        InputSet inputs = engine.validate(*name, parse_rev_flag(*rev),
                                          parse_sets(*sets), fs::current_path());
        std::cout << canonical_json(input_set_to_canonical_json(inputs)) << "\n";
        std::cerr << "inputs valid\n";
        return 0;
      };
    });
  }

  // ---- run -----------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("run", "Run a tool (cached unless bypassed)");
    auto name = std::make_shared<std::string>();
    auto rev = std::make_shared<std::string>();
    auto sets = std::make_shared<std::vector<std::string>>();
    auto cache = std::make_shared<std::string>("use");
    auto timeout = std::make_shared<double>(3600.0);
    auto format = std::make_shared<std::string>("table");
    cmd->add_option("name", *name, "tool name")->required();
    cmd->add_option("--rev", *rev, "revision tag (rN or dev; default latest)");
    cmd->add_option("--set", *sets, "input override name=value (repeatable)");
    cmd->add_option("--cache", *cache, "use|bypass|bypass-read|bypass-write")
        ->check(CLI::IsMember({"use", "bypass", "bypass-read", "bypass-write"}));
    cmd->add_option("--timeout", *timeout, "wall-time limit in seconds (default 3600)");
    cmd->add_option("--format", *format, "table|jsonl")
        ->check(CLI::IsMember({"table", "jsonl"}));
    cmd->callback([&action, name, rev, sets, cache, timeout, format] {
      action = [name, rev, sets, cache, timeout, format](Engine& engine) {
        RunRequest req;
        req.tool = *name;
        req.revision = parse_rev_flag(*rev);
        req.overrides = parse_sets(*sets);
        req.wall_limit_s = *timeout;
        req.input_base = fs::current_path();
        if (*cache == "bypass")
          req.cache = CachePolicy::bypass_both;
        else if (*cache == "bypass-read")
          req.cache = CachePolicy::bypass_read;
        else if (*cache == "bypass-write")
          req.cache = CachePolicy::bypass_write;

        RunOutcome out = engine.run(req);
        for (const std::string& w : out.warnings) std::cerr << "warning: " << w << "\n";

        if (*format == "jsonl") {
          json obj = {{"id", out.record.id},
                      {"tool", out.record.tool},
                      {"revision", out.record.revision.str()},
                      {"status", out.record.status},
                      {"cache_hit", out.cache_hit},
                      {"cache_key", out.record.cache_key}};
          json outputs = json::object();
          for (const auto& [n, tv] : out.outputs) outputs[n] = to_run_json(tv);
          obj["outputs"] = outputs;
          if (!out.run_dir.empty()) obj["run_dir"] = out.run_dir.string();
          std::cout << canonical_json(obj) << "\n";
          return 0;
        }

        if (out.cache_hit) std::cout << "cache hit\n";
        std::cout << "record " << out.record.id << " " << out.record.status << "\n";
        ResolvedTool t =
            engine.registry().search_tool(out.record.tool, out.record.revision);
        for (const auto& [n, spec] : t.manifest.outputs) {
          auto it = out.outputs.find(n);
          if (it == out.outputs.end()) continue;
          std::cout << "  " << n << " = " << render_output_value(it->second, spec)
                    << "\n";
        }
        return 0;
      };
    });
  }

  // ---- publish -------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("publish",
                                   "Publish a bundle directory as the next revision");
    auto dir = std::make_shared<std::string>();
    auto authors = std::make_shared<std::string>();
    auto references = std::make_shared<std::string>();
    cmd->add_option("dir", *dir, "bundle directory containing tool.yaml")->required();
    cmd->add_option("--authors", *authors, "author list recorded with the revision");
    cmd->add_option("--references", *references, "citations recorded with the revision");
    cmd->callback([&action, dir, authors, references] {
      action = [dir, authors, references](Engine& engine) {
        auto [rev, doi] = engine.registry().publish(*dir, *authors, *references);
        std::cout << "published " << rev.str() << " doi " << doi << "\n";
        return 0;
      };
    });
  }

  // ---- query ---------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("query", "Query run records with a predicate");
    auto tool = std::make_shared<std::string>();
    auto where = std::make_shared<std::string>();
    auto format = std::make_shared<std::string>("table");
    auto limit = std::make_shared<long long>(-1);
    cmd->add_option("--tool", *tool, "restrict to one tool (enables input./output. fields)");
    cmd->add_option("--where", *where,
                    "predicate: field OP literal [AND ...]; OP in = != < <= > >= in");
    cmd->add_option("--limit", *limit, "return at most N newest records");
    cmd->add_option("--format", *format, "csv|jsonl|table")
        ->check(CLI::IsMember({"csv", "jsonl", "table"}));
    cmd->callback([&action, tool, where, format, limit] {
      action = [tool, where, format, limit](Engine& engine) {
        QueryPredicate pred =
            where->empty() ? QueryPredicate{} : parse_predicate(*where);
        if (!tool->empty()) {
          PredAtom atom;
          atom.field = "tool";
          atom.op = PredOp::eq;
          atom.operand = json(*tool);
          pred.atoms.insert(pred.atoms.begin(), atom);
        }
        ToolManifest manifest;
        const ToolManifest* mp = nullptr;
        if (auto ct = pred.constrained_tool()) {
          manifest = engine.registry().search_tool(*ct, std::nullopt).manifest;
          mp = &manifest;
        }
        std::optional<size_t> lim;
        if (*limit >= 0) lim = static_cast<size_t>(*limit);
        std::vector<RunRecord> records = engine.db().query(pred, mp, lim);
        if (*format == "jsonl") {
          for (const RunRecord& r : records)
            std::cout << canonical_json(r.to_json()) << "\n";
          return 0;
        }
        print_table(records_table(records), *format);
        return 0;
      };
    });
  }

  // ---- summary -------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("summary",
                                   "Tabulate all runs of a tool (scalar columns)");
    auto name = std::make_shared<std::string>();
    auto rev = std::make_shared<std::string>();
    auto format = std::make_shared<std::string>("table");
    cmd->add_option("name", *name, "tool name")->required();
    cmd->add_option("--rev", *rev, "restrict to one revision (rN or dev)");
    cmd->add_option("--format", *format, "csv|jsonl|table")
        ->check(CLI::IsMember({"csv", "jsonl", "table"}));
    cmd->callback([&action, name, rev, format] {
      action = [name, rev, format](Engine& engine) {
        ResolvedTool t = engine.registry().search_tool(*name, std::nullopt);
        Table table = engine.db().summarize(t.manifest, parse_rev_flag(*rev));
        print_table(table, *format);
        return 0;
      };
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;  // flag/usage problems are user errors
  }

  try {
    Engine engine(resolve_home(home_flag));
    return action(engine);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return error_exit_class(e.code());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}
