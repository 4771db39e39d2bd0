#include <catch2/catch_amalgamated.hpp>

#include <atomic>
#include <random>
#include <set>
#include <thread>

#include "fairflow/cache.hpp"
#include "fairflow/values.hpp"
#include "helpers.hpp"
#include "tmpdir.hpp"

using namespace fairflow;

namespace {

const char* kManifestYaml =
    "name: probe\nrevision: r1\ndescription: cache probe\n"
    "inputs:\n"
    "  length:\n    type: Number\n    units: angstrom\n    value: 3\n"
    "  temp:\n    type: Number\n    units: K\n    value: 300\n"
    "  steps:\n    type: Integer\n    value: 100\n"
    "  fast:\n    type: Boolean\n    value: false\n"
    "  tag:\n    type: Text\n    value: base\n"
    "outputs:\n  y:\n    type: Number\nfiles: []\nsteps:\n  - name: s\n    command: [true]\n";

std::string key_for(const ToolManifest& m, const std::map<std::string, json>& overrides) {
  InputSet set = build_input_set(m, overrides);
  return canonical_key(m.name, m.revision, canonical_json(input_set_to_canonical_json(set)));
}

CacheEntry make_entry(const ToolManifest& m, const std::map<std::string, json>& overrides) {
  InputSet set = build_input_set(m, overrides);
  CacheEntry e;
  e.inputs_json = canonical_json(input_set_to_canonical_json(set));
  e.key = canonical_key(m.name, m.revision, e.inputs_json);
  e.outputs_json = canonical_json(json{{"y", 42.0}});
  e.record_id = new_ulid();
  return e;
}

}  // namespace

TEST_CASE("key is invariant under input order and unit spelling", "[cache]") {
  ToolManifest m = parse_manifest(kManifestYaml);

  // equivalent override maps: permuted entries, respelled units, object forms
  const std::vector<std::map<std::string, json>> equivalent = {
      {{"length", json("0.5 nm")}, {"temp", json(300)}},
      {{"temp", json("300 K")}, {"length", json("5 angstrom")}},
      {{"length", json({{"value", 500}, {"units", "pm"}})}, {"temp", json("0.3 kK")}},
      {{"temp", json({{"value", 300.0}, {"units", "K"}})}, {"length", json(5.0)}},
  };
  std::set<std::string> keys;
  for (const auto& o : equivalent) keys.insert(key_for(m, o));
  CHECK(keys.size() == 1);

  // ...and differs from the defaults-only key
  CHECK(*keys.begin() != key_for(m, {}));
}

TEST_CASE("any single change to any input changes the key", "[cache]") {
  ToolManifest m = parse_manifest(kManifestYaml);
  const std::string base = key_for(m, {});

  const std::vector<std::map<std::string, json>> variants = {
      {{"length", json(3.0000000001)}}, {{"temp", json(299)}}, {{"steps", json(101)}},
      {{"fast", json(true)}},           {{"tag", json("other")}},
  };
  std::set<std::string> keys{base};
  for (const auto& o : variants) keys.insert(key_for(m, o));
  CHECK(keys.size() == variants.size() + 1);  // all distinct
}

TEST_CASE("key distinguishes tool name and revision", "[cache]") {
  ToolManifest m = parse_manifest(kManifestYaml);
  InputSet set = build_input_set(m, {});
  std::string inputs = canonical_json(input_set_to_canonical_json(set));

  std::string k1 = canonical_key("probe", RevisionTag::published(1), inputs);
  std::string k2 = canonical_key("probe", RevisionTag::published(2), inputs);
  std::string k3 = canonical_key("probf", RevisionTag::published(1), inputs);
  std::string kd = canonical_key("probe", RevisionTag::dev(), inputs);
  CHECK(std::set<std::string>{k1, k2, k3, kd}.size() == 4);
  CHECK(k1.size() == 64);
}

TEST_CASE("randomized determinism sweep", "[cache]") {
  ToolManifest m = parse_manifest(kManifestYaml);
  std::mt19937_64 rng(20260819);

  for (int iter = 0; iter < 200; ++iter) {
    double len_ang = std::uniform_real_distribution<double>(1.0, 9.0)(rng);
    int temp_k = std::uniform_int_distribution<int>(100, 999)(rng);

    // spell the same physical inputs three different ways
    std::map<std::string, json> a{{"length", json(len_ang)}, {"temp", json((double)temp_k)}};
    std::map<std::string, json> b{
        {"temp", json(std::to_string(temp_k) + " K")},
        {"length", json({{"value", len_ang}, {"units", "angstrom"}})}};
    std::map<std::string, json> c{
        {"length", json(shortest_double(len_ang) + " angstrom")},
        {"temp", json({{"value", (double)temp_k}, {"units", "K"}})}};

    std::string ka = key_for(m, a), kb = key_for(m, b), kc = key_for(m, c);
    INFO("iter " << iter << " len " << len_ang << " temp " << temp_k);
    CHECK(ka == kb);
    CHECK(ka == kc);
  }
}

TEST_CASE("store and lookup round-trip, artifacts included", "[cache]") {
  TempDir tmp;
  CacheStore store(tmp / "cache");
  ToolManifest m = parse_manifest(kManifestYaml);
  CacheEntry e = make_entry(m, {});

  write_file(tmp / "img.ppm", "P6\n1 1\n255\nxyz");
  e.artifacts["final.ppm"] = tmp / "img.ppm";
  e.artifacts["logs/s.out"] = tmp / "img.ppm";  // nested rel path

  CHECK(store.store(m.name, m.revision, e));
  auto got = store.lookup(m.name, m.revision, e.key);
  REQUIRE(got);
  CHECK(got->key == e.key);
  CHECK(got->inputs_json == e.inputs_json);
  CHECK(got->outputs_json == e.outputs_json);
  CHECK(got->record_id == e.record_id);
  CHECK_FALSE(got->created.empty());
  REQUIRE(got->artifacts.count("final.ppm"));
  REQUIRE(got->artifacts.count("logs/s.out"));
  CHECK(read_file(got->artifacts.at("final.ppm")) == "P6\n1 1\n255\nxyz");

  // second store of the same key is a no-op
  CHECK_FALSE(store.store(m.name, m.revision, e));

  // lookup of an absent key is a miss, not an error
  CHECK_FALSE(store.lookup(m.name, m.revision, std::string(64, 'f')).has_value());
}

TEST_CASE("development revisions are never stored", "[cache]") {
  TempDir tmp;
  CacheStore store(tmp / "cache");
  ToolManifest m = parse_manifest(kManifestYaml);
  m.revision = RevisionTag::dev();
  CacheEntry e = make_entry(m, {});

  CHECK_FALSE(store.store(m.name, m.revision, e));
  CHECK_FALSE(store.lookup(m.name, m.revision, e.key).has_value());
  CHECK_FALSE(fs::exists(store.root() / "probe" / "dev"));
}

TEST_CASE("tampered entries are detected, not served", "[cache]") {
  TempDir tmp;
  CacheStore store(tmp / "cache");
  ToolManifest m = parse_manifest(kManifestYaml);
  CacheEntry e = make_entry(m, {});
  REQUIRE(store.store(m.name, m.revision, e));

  fs::path dir = store.entry_dir(m.name, m.revision, e.key);
  write_file(dir / "inputs.json", canonical_json(json{{"length", 999}}));
  CHECK_THROWS_WITH_CODE(store.lookup(m.name, m.revision, e.key), Errc::corrupt_entry);

  // storing an entry whose inputs don't derive its key is refused up front
  CacheEntry bogus = make_entry(m, {{"temp", json(400)}});
  bogus.key = std::string(64, 'a');
  CHECK_THROWS_WITH_CODE(store.store(m.name, m.revision, bogus), Errc::corrupt_entry);
}

TEST_CASE("concurrent writers: first wins, entry stays intact", "[cache]") {
  TempDir tmp;
  CacheStore store(tmp / "cache");
  ToolManifest m = parse_manifest(kManifestYaml);

  for (int round = 0; round < 5; ++round) {
    CacheEntry e = make_entry(m, {{"steps", json(1000 + round)}});
    std::atomic<int> published{0};
    std::vector<std::thread> threads;
    for (int t = 0; t < 8; ++t) {
      threads.emplace_back([&] {
        CacheEntry mine = e;
        mine.record_id = new_ulid();  // each writer claims its own record
        if (store.store(m.name, m.revision, mine)) published.fetch_add(1);
      });
    }
    for (auto& th : threads) th.join();
    CHECK(published.load() == 1);
    auto got = store.lookup(m.name, m.revision, e.key);
    REQUIRE(got);
    CHECK(got->outputs_json == e.outputs_json);
    // no stray staging directories survive
    int extras = 0;
    for (const auto& p : fs::recursive_directory_iterator(store.root()))
      if (p.is_directory() && p.path().filename().string().rfind(".tmp-", 0) == 0) ++extras;
    CHECK(extras == 0);
  }
}
