#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <string>

#include "fairflow/manifest.hpp"
#include "helpers.hpp"
#include "tmpdir.hpp"

using namespace fairflow;

namespace {

const char* kMeltLike = R"(
name: melt_demo
revision: dev
description: two-phase melting point estimate
inputs:
  material:
    type: Choice
    description: which metal
    value: Cu
    options: [Cu, Al, Ni]
  mass:
    type: Element
    description: atomic mass of the sample species
    value: Cu
    property: atomic_mass
  lattice_constant:
    type: Number
    description: conventional cell parameter
    value: 3.615
    units: angstrom
    min: 2
    max: 10
  run_time:
    type: Number
    description: total simulated time
    value: 50000
    units: fs
outputs:
  melting_temperature:
    type: Number
    description: mean temperature of the tail
    units: K
  coexistence:
    type: Boolean
    description: solid and liquid both persist
  final_snapshot:
    type: Image
    description: rendered final configuration
files: [helper.txt]
steps:
  - name: simulate
    command: [melt_step]
    timeout_seconds: 600
)";

ToolManifest parse_ok(const std::string& text) { return parse_manifest(text); }

}  // namespace

TEST_CASE("manifest parses a realistic document", "[manifest]") {
  ToolManifest m = parse_ok(kMeltLike);
  CHECK(m.name == "melt_demo");
  CHECK(m.revision.is_dev());
  CHECK(m.description == "two-phase melting point estimate");
  REQUIRE(m.inputs.size() == 4);
  CHECK(m.inputs[0].first == "material");  // declaration order preserved
  CHECK(m.inputs[2].first == "lattice_constant");

  const InputSpec* lat = m.find_input("lattice_constant");
  REQUIRE(lat);
  CHECK(lat->kind == Kind::Number);
  CHECK(lat->min == 2.0);
  CHECK(lat->max == 10.0);
  REQUIRE(lat->units);
  CHECK(*lat->units == parse_unit("angstrom"));
  CHECK(*lat->default_value == json(3.615));

  const InputSpec* mat = m.find_input("material");
  REQUIRE(mat);
  CHECK(mat->options == std::vector<std::string>{"Cu", "Al", "Ni"});

  REQUIRE(m.outputs.size() == 3);
  CHECK(m.find_output("coexistence")->kind == Kind::Boolean);
  CHECK(m.files == std::vector<std::string>{"helper.txt"});
  REQUIRE(m.steps.size() == 1);
  CHECK(m.steps[0].command == std::vector<std::string>{"melt_step"});
  CHECK(m.steps[0].timeout_seconds == 600);
}

TEST_CASE("manifest round-trip identity and deterministic serialization", "[manifest]") {
  ToolManifest m = parse_ok(kMeltLike);
  std::string one = serialize_manifest(m);
  std::string two = serialize_manifest(m);
  CHECK(one == two);

  ToolManifest back = parse_manifest(one);
  CHECK(back == m);
  CHECK(serialize_manifest(back) == one);
}

TEST_CASE("kind x attribute legality matrix", "[manifest]") {
  const std::vector<std::pair<std::string, std::string>> attributes = {
      {"units", "units: m"},
      {"min", "min: 1"},
      {"max", "max: 2"},
      {"options", "options: [a, b]"},
      {"property", "property: atomic_mass"},
  };
  const std::map<std::string, std::set<std::string>> legal = {
      {"Boolean", {}},
      {"Integer", {"min", "max"}},
      {"Number", {"units", "min", "max"}},
      {"Array", {"units"}},
      {"Text", {}},
      {"Choice", {"options"}},
      {"List", {}},
      {"Dictionary", {}},
      {"Image", {}},
      {"Element", {"property"}},
  };
  for (const auto& [kind, allowed] : legal) {
    for (const auto& [attr, yaml_line] : attributes) {
      std::string doc = "name: probe\nrevision: dev\ndescription: x\ninputs:\n  x:\n    type: " +
                        kind + "\n    " + yaml_line + "\n";
      if (kind == "Choice" && attr != "options") doc += "    options: [a, b]\n";
      doc += "outputs:\n  y:\n    type: Text\nfiles: []\nsteps:\n  - name: s\n    command: [true]\n";
      INFO("kind=" << kind << " attr=" << attr);
      if (allowed.count(attr)) {
        CHECK_NOTHROW(parse_manifest(doc));
      } else {
        CHECK_THROWS_WITH_CODE(parse_manifest(doc), Errc::schema_error);
      }
    }
  }
}

TEST_CASE("manifest rejection cases", "[manifest]") {
  auto doc = [](const std::string& inputs_block) {
    return "name: probe\nrevision: dev\ndescription: x\ninputs:\n" + inputs_block +
           "outputs:\n  y:\n    type: Text\nfiles: []\nsteps:\n  - name: s\n    command: [true]\n";
  };

  // inverted bounds
  CHECK_THROWS_WITH_CODE(
      parse_manifest(doc("  x:\n    type: Number\n    min: 10\n    max: 2\n")),
      Errc::schema_error);
  // empty option set is vacuous
  CHECK_THROWS_WITH_CODE(parse_manifest(doc("  x:\n    type: Choice\n    options: []\n")),
                         Errc::schema_error);
  // Choice without options at all
  CHECK_THROWS_WITH_CODE(parse_manifest(doc("  x:\n    type: Choice\n")), Errc::schema_error);
  // default not in options
  CHECK_THROWS_WITH_CODE(
      parse_manifest(doc("  x:\n    type: Choice\n    value: c\n    options: [a, b]\n")),
      Errc::schema_error);
  // default out of range
  CHECK_THROWS_WITH_CODE(
      parse_manifest(doc("  x:\n    type: Number\n    value: 11\n    min: 2\n    max: 10\n")),
      Errc::schema_error);
  // quantity-string default is converted before the bounds check
  CHECK_THROWS_WITH_CODE(
      parse_manifest(doc(
          "  x:\n    type: Number\n    value: \"5 nm\"\n    units: angstrom\n    min: 2\n    max: 10\n")),
      Errc::schema_error);
  // ... and an in-range quantity-string default is fine
  CHECK_NOTHROW(parse_manifest(doc(
      "  x:\n    type: Number\n    value: \"0.5 nm\"\n    units: angstrom\n    min: 2\n    max: 10\n")));
  // unknown kind
  CHECK_THROWS_WITH_CODE(parse_manifest(doc("  x:\n    type: Numbr\n")), Errc::schema_error);
  // unknown per-input key (silent-typo guard)
  CHECK_THROWS_WITH_CODE(
      parse_manifest(doc("  x:\n    type: Number\n    mim: 2\n")), Errc::schema_error);
  // bad input name
  CHECK_THROWS_WITH_CODE(parse_manifest(doc("  9x:\n    type: Number\n")), Errc::schema_error);

  // unknown top-level key
  CHECK_THROWS_WITH_CODE(
      parse_manifest("name: probe\nrevision: dev\ndescription: x\nextra: 1\ninputs: {}\n"
                     "outputs: {}\nfiles: []\nsteps:\n  - name: s\n    command: [true]\n"),
      Errc::schema_error);
  // bad tool names
  for (const char* bad : {"Melt", "9melt", "melt demo", ""}) {
    CHECK_THROWS_WITH_CODE(
        parse_manifest("name: \"" + std::string(bad) +
                       "\"\nrevision: dev\ndescription: x\ninputs: {}\noutputs: {}\nfiles: []\n"
                       "steps:\n  - name: s\n    command: [true]\n"),
        Errc::schema_error);
  }
  // bad revisions
  for (const char* bad : {"r0", "v1", "r01", "release", "r-3"}) {
    CHECK_THROWS_WITH_CODE(
        parse_manifest("name: probe\nrevision: \"" + std::string(bad) +
                       "\"\ndescription: x\ninputs: {}\noutputs: {}\nfiles: []\n"
                       "steps:\n  - name: s\n    command: [true]\n"),
        Errc::schema_error);
  }
  CHECK(RevisionTag::parse("r12").number == 12);
  CHECK(RevisionTag::parse("r12").str() == "r12");
  CHECK(RevisionTag::parse("dev").is_dev());

  // steps must be a non-empty list of non-empty argument vectors
  CHECK_THROWS_WITH_CODE(
      parse_manifest("name: probe\nrevision: dev\ndescription: x\ninputs: {}\noutputs: {}\n"
                     "files: []\nsteps: []\n"),
      Errc::schema_error);
  CHECK_THROWS_WITH_CODE(
      parse_manifest("name: probe\nrevision: dev\ndescription: x\ninputs: {}\noutputs: {}\n"
                     "files: []\nsteps:\n  - name: s\n    command: []\n"),
      Errc::schema_error);
  CHECK_THROWS_WITH_CODE(
      parse_manifest("name: probe\nrevision: dev\ndescription: x\ninputs: {}\noutputs: {}\n"
                     "files: []\nsteps:\n  - name: s\n    command: [true]\n    timeout_seconds: 0\n"),
      Errc::schema_error);
  // duplicate step names
  CHECK_THROWS_WITH_CODE(
      parse_manifest("name: probe\nrevision: dev\ndescription: x\ninputs: {}\noutputs: {}\n"
                     "files: []\nsteps:\n  - name: s\n    command: [true]\n"
                     "  - name: s\n    command: [true]\n"),
      Errc::schema_error);

  // file path hygiene
  for (const char* bad : {"../escape.txt", "a/../../b", "/etc/passwd"}) {
    CHECK_THROWS_WITH_CODE(
        parse_manifest("name: probe\nrevision: dev\ndescription: x\ninputs: {}\noutputs: {}\n"
                       "files: [\"" + std::string(bad) +
                       "\"]\nsteps:\n  - name: s\n    command: [true]\n"),
        Errc::schema_error);
  }

  // malformed YAML is a syntax error, not a schema error
  CHECK_THROWS_WITH_CODE(parse_manifest("name: [unclosed\n"), Errc::syntax_error);

  // outputs reject input-only attributes
  CHECK_THROWS_WITH_CODE(
      parse_manifest("name: probe\nrevision: dev\ndescription: x\ninputs: {}\n"
                     "outputs:\n  y:\n    type: Number\n    min: 1\nfiles: []\n"
                     "steps:\n  - name: s\n    command: [true]\n"),
      Errc::schema_error);
}

TEST_CASE("describe summarizes variables one per line", "[manifest]") {
  ToolManifest m = parse_ok(kMeltLike);
  std::string text = describe(m);
  CHECK(text.find("melt_demo (dev)") != std::string::npos);
  CHECK(text.find("lattice_constant Number [2, 10] angstrom") != std::string::npos);
  CHECK(text.find("material Choice {Cu, Al, Ni}") != std::string::npos);
  CHECK(text.find("mass Element (atomic_mass)") != std::string::npos);
  CHECK(text.find("melting_temperature Number K") != std::string::npos);

  // choice options listed for a semiconductor-style manifest
  ToolManifest pn = parse_manifest(
      "name: pn_demo\nrevision: dev\ndescription: diode\ninputs:\n  material:\n    type: Choice\n"
      "    options: [Si, Ge, GaAs, InP]\noutputs:\n  y:\n    type: Text\nfiles: []\n"
      "steps:\n  - name: s\n    command: [true]\n");
  CHECK(describe(pn).find("Si, Ge, GaAs, InP") != std::string::npos);

  // no inputs -> empty section, still present
  ToolManifest none = parse_manifest(
      "name: bare\nrevision: dev\ndescription: x\ninputs: {}\noutputs: {}\nfiles: []\n"
      "steps:\n  - name: s\n    command: [true]\n");
  CHECK(describe(none).find("inputs:") != std::string::npos);
}

TEST_CASE("generated manifests satisfy invariants after parse", "[manifest]") {
  // property-style sweep: programmatically generated manifests across kinds
  // with random legal attributes re-parse and round-trip
  const std::vector<std::string> kinds = {"Boolean", "Integer", "Number",     "Array", "Text",
                                          "Choice",  "List",    "Dictionary", "Image", "Element"};
  for (size_t n = 1; n <= kinds.size(); ++n) {
    std::string doc = "name: gen_tool\nrevision: r" + std::to_string(n) +
                      "\ndescription: generated\ninputs:\n";
    for (size_t i = 0; i < n; ++i) {
      doc += "  in_" + std::to_string(i) + ":\n    type: " + kinds[i] + "\n";
      if (kinds[i] == "Choice") doc += "    options: [p, q]\n";
      if (kinds[i] == "Number") doc += "    units: K\n    min: 0\n    max: 100\n    value: 50\n";
      if (kinds[i] == "Element") doc += "    property: density\n";
    }
    doc += "outputs:\n  out_a:\n    type: Number\n    units: eV\nfiles: []\n"
           "steps:\n  - name: s\n    command: [prog, --flag, \"1\"]\n";
    ToolManifest m = parse_manifest(doc);
    CHECK(m.inputs.size() == n);
    CHECK(m.revision.number == static_cast<int>(n));
    ToolManifest back = parse_manifest(serialize_manifest(m));
    CHECK(back == m);
  }
}

TEST_CASE("load_bundle verifies listed files exist", "[manifest]") {
  TempDir tmp;
  write_file(tmp / "tool.yaml",
             "name: probe\nrevision: dev\ndescription: x\ninputs: {}\noutputs: {}\n"
             "files: [data.txt]\nsteps:\n  - name: s\n    command: [true]\n");
  CHECK_THROWS_WITH_CODE(load_bundle(tmp.path), Errc::schema_error);

  write_file(tmp / "data.txt", "payload");
  Bundle b = load_bundle(tmp.path);
  CHECK(b.manifest.name == "probe");
  CHECK(b.dir == tmp.path);

  CHECK_THROWS_WITH_CODE(load_bundle(tmp.path / "nope"), Errc::tool_not_found);
}
