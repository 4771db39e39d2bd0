#pragma once

// Tool registry: discovery, dev-copy installation, and immutable publication.
//
// Layout: <root>/index.json plus one snapshot directory per published
// revision at <root>/<tool>/r<N>/ containing tool.yaml and the bundle's
// declared files. index.json maps each tool to its optional dev working-copy
// path and its published revisions (revision tag, manifest digest, pseudo-DOI,
// timestamp, authors, references). Revision numbers are contiguous from 1.
//
// The manifest digest is the SHA-256 of tool.yaml exactly as published, so a
// byte-identical republish yields a new revision whose DOI differs only in
// the r<N> component. Published manifests are digest-checked on every read.
//
// Publication is serialized by an advisory lock; discovery reads never lock.

#include <algorithm>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fairflow/canonical.hpp"
#include "fairflow/errors.hpp"
#include "fairflow/manifest.hpp"
#include "fairflow/sha256.hpp"
#include "fairflow/util.hpp"

namespace fairflow {

namespace fs = std::filesystem;

struct PublishedRevision {
  RevisionTag revision;
  std::string digest;  // sha256 of tool.yaml as published
  std::string doi;     // local:<name>/r<N>/<digest[0:8]>
  std::string published;
  std::string authors;
  std::string references;
};

struct ToolListing {
  std::string name;
  RevisionTag latest;  // dev when never published
  std::string description;
};

struct ResolvedTool {
  std::string name;
  RevisionTag revision;
  ToolManifest manifest;  // manifest.revision == resolved revision
  fs::path bundle_dir;
  std::string doi;  // empty for dev
};

class Registry {
 public:
  explicit Registry(fs::path root) : root_(std::move(root)) {
    std::error_code ec;
    fs::create_directories(root_, ec);
    if (ec) throw Error(Errc::io_error, "cannot create registry root " + root_.string());
  }

  const fs::path& root() const { return root_; }

  // Registers (or updates) the dev working copy of a tool. The bundle is
  // validated but not copied; runs against `dev` read it in place.
  std::string install_dev(const fs::path& bundle_dir) {
    Bundle b = load_bundle(bundle_dir);
    FileLock lock(root_ / "index.lock");
    json index = read_index();
    index["tools"][b.manifest.name]["dev_path"] = fs::absolute(bundle_dir).string();
    if (!index["tools"][b.manifest.name].contains("revisions"))
      index["tools"][b.manifest.name]["revisions"] = json::array();
    write_file_atomic(index_path(), canonical_json(index));
    return b.manifest.name;
  }

  // Publishes the bundle as the tool's next revision. Requires at least one
  // declared input and one declared output.
  std::pair<RevisionTag, std::string> publish(const fs::path& bundle_dir,
                                              const std::string& authors = "",
                                              const std::string& references = "") {
    Bundle b = load_bundle(bundle_dir);
    if (b.manifest.inputs.empty())
      throw Error(Errc::schema_error,
                  "tool " + b.manifest.name + " declares no inputs; publication requires at "
                  "least one");
    if (b.manifest.outputs.empty())
      throw Error(Errc::schema_error,
                  "tool " + b.manifest.name + " declares no outputs; publication requires at "
                  "least one");

    std::string manifest_bytes = read_file(bundle_dir / "tool.yaml");
    std::string digest = sha256_hex(manifest_bytes);

    FileLock lock(root_ / "index.lock");
    json index = read_index();
    json& entry = index["tools"][b.manifest.name];
    if (!entry.contains("revisions")) entry["revisions"] = json::array();
    int next = static_cast<int>(entry["revisions"].size()) + 1;
    RevisionTag rev = RevisionTag::published(next);
    std::string doi = "local:" + b.manifest.name + "/" + rev.str() + "/" + digest.substr(0, 8);

    // Snapshot tool.yaml plus declared files, then commit with one rename.
    fs::path final_dir = root_ / b.manifest.name / rev.str();
    fs::path staging = root_ / b.manifest.name / (".tmp-" + new_ulid());
    std::error_code ec;
    fs::create_directories(staging, ec);
    if (ec) throw Error(Errc::io_error, "cannot create " + staging.string());
    try {
      write_file(staging / "tool.yaml", manifest_bytes);
      for (const auto& rel : b.manifest.files) {
        fs::path dst = staging / fs::path(rel);
        fs::create_directories(dst.parent_path(), ec);
        if (ec) throw Error(Errc::io_error, "cannot create " + dst.parent_path().string());
        fs::copy_file(bundle_dir / rel, dst, fs::copy_options::overwrite_existing, ec);
        if (ec) throw Error(Errc::io_error, "cannot copy bundle file " + rel);
      }
    } catch (...) {
      fs::remove_all(staging, ec);
      throw;
    }
    fs::rename(staging, final_dir, ec);
    if (ec) {
      fs::remove_all(staging, ec);
      throw Error(Errc::io_error, "cannot commit snapshot " + final_dir.string());
    }

    json rec = json::object();
    rec["revision"] = rev.str();
    rec["digest"] = digest;
    rec["doi"] = doi;
    rec["published"] = now_iso8601();
    rec["authors"] = authors;
    rec["references"] = references;
    entry["revisions"].push_back(std::move(rec));
    write_file_atomic(index_path(), canonical_json(index));
    return {rev, doi};
  }

  // One row per known tool; `filter` matches case-insensitively against name
  // and description.
  std::vector<ToolListing> find_tools(const std::string& filter = "") const {
    json index = read_index();
    std::vector<ToolListing> out;
    if (!index.contains("tools")) return out;
    for (const auto& [name, entry] : index["tools"].items()) {
      ToolListing row;
      row.name = name;
      try {
        ResolvedTool t = resolve(name, std::nullopt, index);
        row.latest = t.revision;
        row.description = t.manifest.description;
      } catch (const Error&) {
        continue;  // dev path gone and nothing published: not listable
      }
      if (!filter.empty() && !icontains(row.name, filter) &&
          !icontains(row.description, filter))
        continue;
      out.push_back(std::move(row));
    }
    std::sort(out.begin(), out.end(),
              [](const ToolListing& a, const ToolListing& b) { return a.name < b.name; });
    return out;
  }

  // Resolves a tool: no revision requirement -> latest published, falling
  // back to the dev copy if never published; explicit revision -> exactly it.
  ResolvedTool search_tool(const std::string& name,
                           std::optional<RevisionTag> rev = std::nullopt) const {
    return resolve(name, rev, read_index());
  }

  std::vector<std::pair<std::string, InputSpec>> get_inputs(
      const std::string& name, std::optional<RevisionTag> rev = std::nullopt) const {
    return search_tool(name, rev).manifest.inputs;
  }

  std::vector<std::pair<std::string, OutputSpec>> get_outputs(
      const std::string& name, std::optional<RevisionTag> rev = std::nullopt) const {
    return search_tool(name, rev).manifest.outputs;
  }

  // Published metadata, oldest first. Empty when never published.
  std::vector<PublishedRevision> revisions(const std::string& name) const {
    json index = read_index();
    std::vector<PublishedRevision> out;
    if (!index.contains("tools") || !index["tools"].contains(name)) return out;
    for (const auto& rec : index["tools"][name]["revisions"]) {
      PublishedRevision pr;
      pr.revision = RevisionTag::parse(rec.at("revision").get<std::string>());
      pr.digest = rec.at("digest").get<std::string>();
      pr.doi = rec.at("doi").get<std::string>();
      pr.published = rec.value("published", std::string());
      pr.authors = rec.value("authors", std::string());
      pr.references = rec.value("references", std::string());
      out.push_back(std::move(pr));
    }
    return out;
  }

 private:
  fs::path root_;

  fs::path index_path() const { return root_ / "index.json"; }

  json read_index() const {
    if (!fs::exists(index_path())) return json{{"tools", json::object()}};
    json index = json::parse(read_file(index_path()), nullptr, false);
    if (index.is_discarded() || !index.is_object() || !index.contains("tools"))
      throw Error(Errc::corrupt_entry, "registry index is not valid JSON: " +
                                           index_path().string());
    return index;
  }

  ResolvedTool resolve(const std::string& name, std::optional<RevisionTag> rev,
                       const json& index) const {
    if (!index.contains("tools") || !index["tools"].contains(name))
      throw Error(Errc::tool_not_found, "no tool named " + name + " is installed or published");
    const json& entry = index["tools"][name];
    const json& revs = entry.contains("revisions") ? entry["revisions"] : json::array();

    auto resolve_dev = [&]() -> ResolvedTool {
      if (!entry.contains("dev_path"))
        throw Error(Errc::revision_not_found,
                    "tool " + name + " has no dev working copy installed");
      fs::path dir = entry["dev_path"].get<std::string>();
      Bundle b = load_bundle(dir);
      ResolvedTool t;
      t.name = name;
      t.revision = RevisionTag::dev();
      t.manifest = std::move(b.manifest);
      t.manifest.revision = RevisionTag::dev();
      t.bundle_dir = dir;
      return t;
    };

    auto resolve_published = [&](int n) -> ResolvedTool {
      if (n < 1 || n > static_cast<int>(revs.size()))
        throw Error(Errc::revision_not_found,
                    "tool " + name + " has no published revision r" + std::to_string(n) +
                        " (" + std::to_string(revs.size()) + " published)");
      const json& rec = revs[static_cast<size_t>(n - 1)];
      RevisionTag tag = RevisionTag::published(n);
      fs::path dir = root_ / name / tag.str();
      std::string bytes = read_file(dir / "tool.yaml");
      if (sha256_hex(bytes) != rec.at("digest").get<std::string>())
        throw Error(Errc::corrupt_entry, "published manifest for " + name + "/" + tag.str() +
                                             " does not match its recorded digest");
      ResolvedTool t;
      t.name = name;
      t.revision = tag;
      t.manifest = parse_manifest(bytes);
      t.manifest.revision = tag;
      t.bundle_dir = dir;
      t.doi = rec.at("doi").get<std::string>();
      // snapshot integrity: declared files must still be present
      for (const auto& rel : t.manifest.files)
        if (!fs::exists(dir / rel))
          throw Error(Errc::corrupt_entry,
                      "published snapshot " + name + "/" + tag.str() + " lost file " + rel);
      return t;
    };

    if (rev) {
      if (rev->is_dev()) return resolve_dev();
      return resolve_published(rev->number);
    }
    if (!revs.empty()) return resolve_published(static_cast<int>(revs.size()));
    return resolve_dev();
  }
};

}  // namespace fairflow
