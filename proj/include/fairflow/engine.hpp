#pragma once

// Engine: the one entry point that ties registry, validation, cache, runner
// and results database together for a single `run` call.
//
// Home layout: <home>/registry, <home>/cache, <home>/results, <home>/runs.
//
// Run flow: resolve tool -> validate inputs -> derive cache key -> consult
// cache (policy permitting; dev revisions are never cached) -> on a hit,
// reconstruct outputs from the entry and append a cache_hit record; on a
// miss, prepare a run directory, execute steps fail-fast, collect outputs,
// append the record, and (policy permitting) store the cache entry. Failed
// runs are recorded with status failed:<ErrorClass> and never cached.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fairflow/cache.hpp"
#include "fairflow/canonical.hpp"
#include "fairflow/errors.hpp"
#include "fairflow/manifest.hpp"
#include "fairflow/registry.hpp"
#include "fairflow/resultsdb.hpp"
#include "fairflow/runner.hpp"
#include "fairflow/values.hpp"

namespace fairflow {

namespace fs = std::filesystem;

struct RunOutcome {
  RunRecord record;
  std::map<std::string, TypedValue> outputs;
  bool cache_hit = false;
  fs::path run_dir;  // empty on a cache hit
  std::vector<std::string> warnings;
};

namespace engine_detail {

// Rebuilds a TypedValue from its canonical form. Everything except Image
// round-trips through the ordinary input validators; an Image canonical form
// is its digest, so the bytes come from the entry's artifacts.
inline TypedValue output_from_canonical(const std::string& name, const OutputSpec& spec,
                                        const json& canonical,
                                        const std::map<std::string, fs::path>& artifacts) {
  if (spec.kind == Kind::Image) {
    if (!canonical.is_string() || canonical.get<std::string>().rfind("sha256:", 0) != 0)
      throw Error(Errc::corrupt_entry, "cached image output " + name + " has no digest");
    std::string want = canonical.get<std::string>().substr(7);
    for (const auto& [rel, path] : artifacts) {
      if (rel.rfind(name + ".", 0) != 0) continue;
      InputSpec synth;
      synth.kind = Kind::Image;
      TypedValue tv =
          validate_value(synth, json({{"file", path.filename().string()}}), path.parent_path());
      if (tv.as_image().digest != want)
        throw Error(Errc::corrupt_entry, "cached image artifact for " + name +
                                             " does not match its recorded digest");
      return tv;
    }
    throw Error(Errc::corrupt_entry, "cache entry lacks the artifact for image output " + name);
  }
  InputSpec synth;
  synth.kind = spec.kind;
  synth.units = spec.units;
  return validate_value(synth, canonical);
}

inline std::string error_class_of(Errc code) {
  switch (code) {
    case Errc::step_failed: return "StepFailed";
    case Errc::output_missing: return "OutputMissing";
    case Errc::output_invalid: return "OutputInvalid";
    case Errc::timeout: return "Timeout";
    default: return std::string(errc_name(code));
  }
}

}  // namespace engine_detail

class Engine {
 public:
  explicit Engine(fs::path home)
      : home_(std::move(home)),
        registry_(home_ / "registry"),
        cache_(home_ / "cache"),
        db_(home_ / "results") {}

  Registry& registry() { return registry_; }
  const Registry& registry() const { return registry_; }
  CacheStore& cache() { return cache_; }
  ResultsDb& db() { return db_; }
  const ResultsDb& db() const { return db_; }
  const fs::path& home() const { return home_; }

  // Validates overrides against the resolved manifest without running.
  InputSet validate(const std::string& tool, std::optional<RevisionTag> rev,
                    const std::map<std::string, json>& overrides,
                    const fs::path& input_base = ".") const {
    ResolvedTool t = registry_.search_tool(tool, rev);
    return build_input_set(t.manifest, overrides, input_base);
  }

  RunOutcome run(const RunRequest& req) {
    if (!(req.wall_limit_s > 0))
      throw Error(Errc::schema_error, "wall-time limit must be positive");

    ResolvedTool tool = registry_.search_tool(req.tool, req.revision);
    const ToolManifest& m = tool.manifest;
    InputSet inputs = build_input_set(m, req.overrides, req.input_base);
    std::string inputs_canonical = canonical_json(input_set_to_canonical_json(inputs));
    std::string key = canonical_key(m.name, m.revision, inputs_canonical);

    bool cacheable = !m.revision.is_dev();
    if (cacheable && cache_read_allowed(req.cache)) {
      if (auto entry = cache_.lookup(m.name, m.revision, key))
        return replay_from_cache(m, inputs, key, *entry);
    }

    RunRecord record;
    record.id = new_ulid();
    record.tool = m.name;
    record.revision = m.revision;
    record.cache_key = key;
    record.started = now_iso8601();
    for (const auto& [name, tv] : inputs) record.inputs[name] = stored_form(tv);

    fs::path run_dir = prepare_run_dir(m, inputs, tool.bundle_dir, home_ / "runs");
    ExecOutcome exec = execute_steps(m, run_dir, req.wall_limit_s);
    record.steps = exec.steps;
    if (!exec.ok()) {
      record.ended = now_iso8601();
      record.status = "failed:" + engine_detail::error_class_of(exec.error->code());
      db_.save_record(record);
      throw *exec.error;
    }

    CollectedOutputs collected;
    try {
      collected = collect_outputs(m, run_dir);
    } catch (const Error& e) {
      record.ended = now_iso8601();
      record.status = "failed:" + engine_detail::error_class_of(e.code());
      db_.save_record(record);
      throw;
    }

    record.ended = now_iso8601();
    record.status = "completed";
    for (const auto& [name, tv] : collected.values) record.outputs[name] = stored_form(tv);
    db_.save_record(record);

    if (cacheable && cache_write_allowed(req.cache))
      store_cache_entry(m, run_dir, key, inputs_canonical, record, collected.values);

    RunOutcome outcome;
    outcome.record = record;
    outcome.outputs = std::move(collected.values);
    outcome.cache_hit = false;
    outcome.run_dir = run_dir;
    outcome.warnings = std::move(collected.warnings);
    return outcome;
  }

 private:
  fs::path home_;
  Registry registry_;
  CacheStore cache_;
  ResultsDb db_;

  RunOutcome replay_from_cache(const ToolManifest& m, const InputSet& inputs,
                               const std::string& key, const CacheEntry& entry) {
    json outputs_canonical = json::parse(entry.outputs_json);
    std::map<std::string, TypedValue> outputs;
    for (const auto& [name, spec] : m.outputs) {
      if (!outputs_canonical.contains(name))
        throw Error(Errc::corrupt_entry,
                    "cache entry " + key + " lacks declared output " + name);
      outputs[name] = engine_detail::output_from_canonical(name, spec, outputs_canonical[name],
                                                           entry.artifacts);
    }

    RunRecord record;
    record.id = new_ulid();
    record.tool = m.name;
    record.revision = m.revision;
    record.cache_key = key;
    record.status = "completed";
    record.started = now_iso8601();
    record.ended = record.started;
    record.cache_hit = true;
    for (const auto& [name, tv] : inputs) record.inputs[name] = stored_form(tv);
    for (const auto& [name, tv] : outputs) record.outputs[name] = stored_form(tv);
    db_.save_record(record);

    RunOutcome outcome;
    outcome.record = record;
    outcome.outputs = std::move(outputs);
    outcome.cache_hit = true;
    return outcome;
  }

  void store_cache_entry(const ToolManifest& m, const fs::path& run_dir, const std::string& key,
                         const std::string& inputs_canonical, const RunRecord& record,
                         const std::map<std::string, TypedValue>& outputs) {
    CacheEntry entry;
    entry.key = key;
    entry.inputs_json = inputs_canonical;
    json outputs_canonical = json::object();
    for (const auto& [name, tv] : outputs) {
      outputs_canonical[name] = to_canonical_json(tv);
      if (tv.kind == Kind::Image) {
        const ImageValue& img = tv.as_image();
        entry.artifacts[name + "." + runner_detail::image_extension(img.format)] = img.file;
      }
    }
    entry.outputs_json = canonical_json(outputs_canonical);
    entry.created = record.ended;
    entry.record_id = record.id;

    std::error_code ec;
    for (const auto& e : fs::directory_iterator(run_dir / "_logs", ec)) {
      if (e.is_regular_file())
        entry.artifacts["logs/" + e.path().filename().string()] = e.path();
    }
    cache_.store(m.name, m.revision, entry);
  }
};

}  // namespace fairflow
