#pragma once

// Content-addressed run cache.
//
// A cache key identifies one (tool, revision, inputs) triple. The key material
// is the exact byte string
//
//   "tool\n" + name + "\n" + "rev\n" + revision + "\n" + canonical-inputs-JSON
//
// and the key is its SHA-256 in lowercase hex. Entries live at
//
//   <root>/<tool>/<revision>/<key[0:2]>/<key>/
//       inputs.json    canonical inputs (exactly the key material's JSON part)
//       outputs.json   canonical outputs
//       meta.json      {"created": ..., "record_id": ...}
//       artifacts/     opaque files (images, logs) referenced by outputs
//
// Writers stage a sibling temp directory and publish it with one rename, so a
// reader never observes a partial entry and the first writer wins races.
// Development revisions are never cached.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <system_error>

#include "fairflow/canonical.hpp"
#include "fairflow/errors.hpp"
#include "fairflow/manifest.hpp"
#include "fairflow/sha256.hpp"
#include "fairflow/util.hpp"

namespace fairflow {

namespace fs = std::filesystem;

inline std::string canonical_key_material(const std::string& tool, const RevisionTag& rev,
                                          const std::string& canonical_inputs_json) {
  return "tool\n" + tool + "\nrev\n" + rev.str() + "\n" + canonical_inputs_json;
}

inline std::string canonical_key(const std::string& tool, const RevisionTag& rev,
                                 const std::string& canonical_inputs_json) {
  return sha256_hex(canonical_key_material(tool, rev, canonical_inputs_json));
}

struct CacheEntry {
  std::string key;
  std::string inputs_json;   // canonical JSON text
  std::string outputs_json;  // canonical JSON text
  // Relative name inside artifacts/ -> file path. On store() the path is the
  // source to copy from; on lookup() it is the file inside the entry.
  std::map<std::string, fs::path> artifacts;
  std::string created;    // ISO-8601, UTC
  std::string record_id;  // originating run record
};

class CacheStore {
 public:
  explicit CacheStore(fs::path root) : root_(std::move(root)) {
    std::error_code ec;
    fs::create_directories(root_, ec);
    if (ec) throw Error(Errc::io_error, "cannot create cache root " + root_.string());
  }

  const fs::path& root() const { return root_; }

  fs::path entry_dir(const std::string& tool, const RevisionTag& rev,
                     const std::string& key) const {
    return root_ / tool / rev.str() / key.substr(0, 2) / key;
  }

  // Returns the entry if present and intact. A present entry whose stored
  // inputs no longer reproduce the key is reported as corruption, not a miss.
  std::optional<CacheEntry> lookup(const std::string& tool, const RevisionTag& rev,
                                   const std::string& key) const {
    fs::path dir = entry_dir(tool, rev, key);
    if (!fs::exists(dir / "outputs.json")) return std::nullopt;

    CacheEntry entry;
    entry.key = key;
    entry.inputs_json = read_file(dir / "inputs.json");
    entry.outputs_json = read_file(dir / "outputs.json");
    if (canonical_key(tool, rev, entry.inputs_json) != key) {
      throw Error(Errc::corrupt_entry,
                  "cache entry " + key + " for " + tool + "/" + rev.str() +
                      " does not match its stored inputs");
    }
    if (fs::exists(dir / "meta.json")) {
      json meta = json::parse(read_file(dir / "meta.json"), nullptr, false);
      if (!meta.is_discarded()) {
        if (meta.contains("created") && meta["created"].is_string())
          entry.created = meta["created"].get<std::string>();
        if (meta.contains("record_id") && meta["record_id"].is_string())
          entry.record_id = meta["record_id"].get<std::string>();
      }
    }
    fs::path art_dir = dir / "artifacts";
    if (fs::exists(art_dir)) {
      for (const auto& e : fs::recursive_directory_iterator(art_dir)) {
        if (!e.is_regular_file()) continue;
        entry.artifacts[fs::relative(e.path(), art_dir).generic_string()] = e.path();
      }
    }
    return entry;
  }

  // Stores a finished run. Returns true if this call published the entry,
  // false if the revision is not cacheable or the entry already exists
  // (including losing a race to a concurrent writer).
  bool store(const std::string& tool, const RevisionTag& rev, const CacheEntry& entry) {
    if (rev.is_dev()) return false;
    if (canonical_key(tool, rev, entry.inputs_json) != entry.key) {
      throw Error(Errc::corrupt_entry,
                  "refusing to store cache entry " + entry.key +
                      ": inputs do not derive the key");
    }
    fs::path dir = entry_dir(tool, rev, entry.key);
    if (fs::exists(dir)) return false;

    fs::path parent = dir.parent_path();
    std::error_code ec;
    fs::create_directories(parent, ec);
    if (ec) throw Error(Errc::io_error, "cannot create " + parent.string());

    fs::path staging = parent / (".tmp-" + entry.key.substr(0, 8) + "-" + new_ulid());
    fs::create_directories(staging / "artifacts", ec);
    if (ec) throw Error(Errc::io_error, "cannot create " + staging.string());

    try {
      write_file(staging / "inputs.json", entry.inputs_json);
      write_file(staging / "outputs.json", entry.outputs_json);
      json meta = json::object();
      meta["created"] = entry.created.empty() ? now_iso8601() : entry.created;
      meta["record_id"] = entry.record_id;
      write_file(staging / "meta.json", canonical_json(meta));
      for (const auto& [rel, src] : entry.artifacts) {
        fs::path dst = staging / "artifacts" / fs::path(rel);
        fs::create_directories(dst.parent_path(), ec);
        if (ec) throw Error(Errc::io_error, "cannot create " + dst.parent_path().string());
        fs::copy_file(src, dst, fs::copy_options::overwrite_existing, ec);
        if (ec)
          throw Error(Errc::io_error,
                      "cannot copy artifact " + src.string() + " -> " + dst.string());
      }
    } catch (...) {
      fs::remove_all(staging, ec);
      throw;
    }

    fs::rename(staging, dir, ec);
    if (ec) {
      // Lost the publish race (or the entry appeared through another path):
      // keep the winner, discard our staging copy.
      fs::remove_all(staging, ec);
      return false;
    }
    return true;
  }

 private:
  fs::path root_;
};

}  // namespace fairflow
