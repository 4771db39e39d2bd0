#pragma once

// Run-directory lifecycle: materialize an isolated directory for one run,
// execute the manifest's steps sequentially, and collect declared outputs.
//
// Run protocol (bit-exact):
//   inputs.json   JSON object, keys = input names, values = canonical raw
//                 forms ({"units": "<declared>", "value": v} for unit-bearing
//                 kinds, bare JSON otherwise; Image inputs appear as
//                 {"file": "<relative path>"} with the bytes materialized
//                 under _inputs/).
//   _outputs/     one envelope per declared output, <name>.json =
//                 {"type": "<Kind>", "value": v, "units": "<optional>"} or
//                 {"type": "Image", "file": "<relative path>"}.
//   _logs/        <step>.out / <step>.err capture stdout/stderr per step.
//   environment   FAIRFLOW_RUN_DIR = absolute run directory path.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fairflow/canonical.hpp"
#include "fairflow/errors.hpp"
#include "fairflow/manifest.hpp"
#include "fairflow/process.hpp"
#include "fairflow/resultsdb.hpp"
#include "fairflow/sha256.hpp"
#include "fairflow/util.hpp"
#include "fairflow/values.hpp"

namespace fairflow {

namespace fs = std::filesystem;

enum class CachePolicy { use, bypass_read, bypass_write, bypass_both };

inline bool cache_read_allowed(CachePolicy p) {
  return p == CachePolicy::use || p == CachePolicy::bypass_write;
}
inline bool cache_write_allowed(CachePolicy p) {
  return p == CachePolicy::use || p == CachePolicy::bypass_read;
}

struct RunRequest {
  std::string tool;
  std::optional<RevisionTag> revision;
  std::map<std::string, json> overrides;  // raw values, validated at run time
  CachePolicy cache = CachePolicy::use;
  double wall_limit_s = 3600.0;
  fs::path input_base = ".";  // base directory for {"file": ...} references
};

namespace runner_detail {

inline std::string image_extension(const std::string& format) {
  if (format == "PNG") return "png";
  if (format == "JPEG") return "jpg";
  if (format == "GIF") return "gif";
  if (format == "TIFF") return "tif";
  if (format == "BMP") return "bmp";
  if (format == "PPM") return "ppm";
  return "bin";
}

inline fs::path current_exe_dir() {
  std::error_code ec;
  fs::path exe = fs::read_symlink("/proc/self/exe", ec);
  if (ec) return fs::current_path();
  return exe.parent_path();
}

inline std::string tail_of_file(const fs::path& p, size_t max_bytes = 1024) {
  std::error_code ec;
  if (!fs::exists(p, ec)) return "";
  std::string all = read_file(p);
  if (all.size() <= max_bytes) return all;
  return all.substr(all.size() - max_bytes);
}

}  // namespace runner_detail

// Creates a fresh run directory under `base`: bundle files copied to their
// relative paths, Image inputs materialized under _inputs/, canonical
// inputs.json written, empty _outputs/ and _logs/ created.
inline fs::path prepare_run_dir(const ToolManifest& m, const InputSet& inputs,
                                const fs::path& bundle_dir, const fs::path& base) {
  std::error_code ec;
  fs::create_directories(base, ec);
  if (ec) throw Error(Errc::io_error, "cannot create run base " + base.string());
  fs::path dir = base / new_ulid();
  if (!fs::create_directory(dir))
    throw Error(Errc::io_error, "cannot create run directory " + dir.string());

  for (const auto& rel : m.files) {
    fs::path dst = dir / fs::path(rel);
    fs::create_directories(dst.parent_path(), ec);
    if (ec) throw Error(Errc::io_error, "cannot create " + dst.parent_path().string());
    fs::copy_file(bundle_dir / rel, dst, ec);
    if (ec)
      throw Error(Errc::io_error,
                  "cannot copy bundle file " + rel + " into " + dir.string());
  }

  fs::create_directory(dir / "_outputs");
  fs::create_directory(dir / "_logs");
  fs::create_directory(dir / "_inputs");

  json run_inputs = json::object();
  for (const auto& [name, tv] : inputs) {
    if (tv.kind == Kind::Image) {
      const ImageValue& img = tv.as_image();
      std::string rel = "_inputs/" + name + "." + runner_detail::image_extension(img.format);
      fs::copy_file(img.file, dir / fs::path(rel), ec);
      if (ec)
        throw Error(Errc::io_error, "cannot materialize image input " + name + " from " +
                                        img.file.string());
      run_inputs[name] = to_run_json(tv, rel);
    } else {
      run_inputs[name] = to_run_json(tv);
    }
  }
  write_file(dir / "inputs.json", canonical_json(run_inputs));
  return dir;
}

struct ExecOutcome {
  std::vector<StepResult> steps;  // results for every step that started
  std::optional<Error> error;     // StepFailed or Timeout; absent on success

  bool ok() const { return !error.has_value(); }
};

// Runs the manifest's steps sequentially in `dir`, fail-fast, with cumulative
// wall time bounded by `limit_s` and per-step timeouts honored. Failures are
// reported in the outcome (so callers can record partial step results), not
// thrown.
inline ExecOutcome execute_steps(const ToolManifest& m, const fs::path& dir, double limit_s) {
  ExecOutcome outcome;
  fs::path abs_dir = fs::absolute(dir);
  std::string path_env = "PATH=" + runner_detail::current_exe_dir().string() + ":" +
                         env_or("PATH", "/usr/bin:/bin");
  std::vector<std::string> extra_env = {"FAIRFLOW_RUN_DIR=" + abs_dir.string(), path_env};

  double elapsed = 0.0;
  for (const auto& step : m.steps) {
    double remaining = limit_s - elapsed;
    if (remaining <= 0) {
      outcome.error = Error(Errc::timeout, "wall-time limit of " + shortest_double(limit_s) +
                                               " s exhausted before step " + step.name);
      return outcome;
    }
    double step_limit = remaining;
    if (step.timeout_seconds && static_cast<double>(*step.timeout_seconds) < step_limit)
      step_limit = static_cast<double>(*step.timeout_seconds);

    fs::path out_log = dir / "_logs" / (step.name + ".out");
    fs::path err_log = dir / "_logs" / (step.name + ".err");
    SpawnResult spawned = run_process(step.command, abs_dir, extra_env, out_log, err_log,
                                      step_limit);
    elapsed += spawned.duration_s;

    StepResult sr;
    sr.name = step.name;
    sr.exit_code = spawned.exit_code;
    sr.duration_s = spawned.duration_s;
    std::error_code ec;
    sr.stdout_bytes = fs::exists(out_log, ec) ? fs::file_size(out_log, ec) : 0;
    sr.stderr_bytes = fs::exists(err_log, ec) ? fs::file_size(err_log, ec) : 0;
    sr.stdout_sha256 = fs::exists(out_log, ec) ? sha256_file_hex(out_log) : "";
    sr.stderr_sha256 = fs::exists(err_log, ec) ? sha256_file_hex(err_log) : "";
    outcome.steps.push_back(sr);

    if (spawned.timed_out) {
      outcome.error =
          Error(Errc::timeout, "step " + step.name + " exceeded its time limit of " +
                                   shortest_double(step_limit) + " s and was terminated");
      return outcome;
    }
    if (spawned.exit_code != 0) {
      std::string tail = runner_detail::tail_of_file(err_log);
      std::string msg = "step " + step.name + " failed with exit code " +
                        std::to_string(spawned.exit_code);
      if (!tail.empty()) msg += "; stderr tail:\n" + tail;
      outcome.error = Error(Errc::step_failed, msg);
      return outcome;
    }
  }
  return outcome;
}

struct CollectedOutputs {
  std::map<std::string, TypedValue> values;
  std::vector<std::string> warnings;  // stray files in _outputs/
};

// Reads and validates _outputs/<name>.json for every declared output.
// All missing outputs are reported in one error; invalid envelopes are
// wrapped as OutputInvalid naming the output. Stray files produce warnings.
inline CollectedOutputs collect_outputs(const ToolManifest& m, const fs::path& dir) {
  CollectedOutputs out;
  fs::path outputs_dir = dir / "_outputs";

  std::vector<std::string> missing;
  std::vector<std::string> referenced;  // files named inside envelopes
  for (const auto& [name, spec] : m.outputs) {
    fs::path envelope_path = outputs_dir / (name + ".json");
    if (!fs::exists(envelope_path)) {
      missing.push_back(name);
      continue;
    }
    json envelope = json::parse(read_file(envelope_path), nullptr, false);
    if (envelope.is_discarded())
      throw Error(Errc::output_invalid,
                  "output " + name + ": envelope is not valid JSON");
    if (envelope.is_object() && envelope.contains("file") && envelope["file"].is_string())
      referenced.push_back(envelope["file"].get<std::string>());
    try {
      out.values[name] = validate_output(spec, envelope, outputs_dir);
    } catch (const Error& e) {
      if (e.code() == Errc::output_invalid) throw;
      throw Error(Errc::output_invalid, "output " + name + ": " + e.raw_message());
    }
  }
  if (!missing.empty()) {
    std::string names;
    for (size_t i = 0; i < missing.size(); ++i) {
      if (i) names += ", ";
      names += missing[i];
    }
    throw Error(Errc::output_missing,
                (missing.size() == 1 ? "declared output not produced: "
                                     : "declared outputs not produced: ") +
                    names);
  }

  std::error_code ec;
  for (const auto& e : fs::directory_iterator(outputs_dir, ec)) {
    std::string fname = e.path().filename().string();
    bool declared = false;
    for (const auto& [name, spec] : m.outputs)
      if (fname == name + ".json") declared = true;
    bool is_referenced =
        std::find(referenced.begin(), referenced.end(), fname) != referenced.end();
    if (!declared && !is_referenced)
      out.warnings.push_back("ignoring undeclared file in _outputs/: " + fname);
  }
  return out;
}

}  // namespace fairflow
