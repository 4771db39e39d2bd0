// Workflow step for the melting-point surrogate bundle. Reads the canonical
// inputs.json from $FAIRFLOW_RUN_DIR, synthesizes the relaxation trace, runs
// the published analysis rules, and writes every declared output envelope
// into _outputs/.

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "fairflow/canonical.hpp"
#include "fairflow/errors.hpp"
#include "fairflow/exemplars/melt.hpp"
#include "fairflow/util.hpp"

namespace fs = std::filesystem;
using fairflow::json;

namespace {

double number_of(const json& v) {
  if (v.is_number()) return v.get<double>();
  return v.at("value").get<double>();
}

void write_envelope(const fs::path& outputs, const std::string& name, json envelope) {
  fairflow::write_file(outputs / (name + ".json"), fairflow::canonical_json(envelope));
}

}  // namespace

int main() {
  try {
    fs::path run_dir = fairflow::env_or("FAIRFLOW_RUN_DIR", fs::current_path().string());
    std::string inputs_bytes = fairflow::read_file(run_dir / "inputs.json");
    json inputs = json::parse(inputs_bytes);
    json materials_file = json::parse(fairflow::read_file(run_dir / "data" / "materials.json"));

    std::string material = inputs.at("material").get<std::string>();
    const json& mat = materials_file.at("materials").at(material);

    fairflow::melt::MeltConditions cond;
    cond.melt_point_k = mat.at("melt_k").get<double>();
    cond.t_solid_k = number_of(inputs.at("T_solid"));
    cond.t_liquid_k = number_of(inputs.at("T_liquid"));
    cond.run_time_fs = number_of(inputs.at("run_time"));
    cond.noise_k = materials_file.at("noise_k").get<double>();

    uint64_t seed = fairflow::melt::seed_from_bytes(inputs_bytes);
    fairflow::melt::Trace trace = fairflow::melt::synth_trace(cond, seed);
    fairflow::melt::TraceAnalysis analysis = fairflow::melt::analyze_trace(trace);
    fairflow::melt::PhaseFractions fractions =
        fairflow::melt::phase_fractions(analysis.melting_temperature_k, cond);

    fs::path outputs = run_dir / "_outputs";
    write_envelope(outputs, "melting_temperature",
                   {{"type", "Number"},
                    {"units", "K"},
                    {"value", analysis.melting_temperature_k}});
    write_envelope(outputs, "confidence_95",
                   {{"type", "Number"}, {"units", "K"}, {"value", analysis.confidence_95_k}});
    write_envelope(outputs, "coexistence",
                   {{"type", "Boolean"},
                    {"value", fairflow::melt::coexistence_rule(fractions.solid,
                                                               fractions.liquid)}});
    write_envelope(outputs, "steady_state",
                   {{"type", "Boolean"}, {"value", analysis.steady_state}});
    write_envelope(outputs, "phase_fractions",
                   {{"type", "Dictionary"},
                    {"value",
                     {{"solid", fractions.solid},
                      {"liquid", fractions.liquid},
                      {"other", fractions.other}}}});
    fairflow::write_file(outputs / "final_snapshot.png",
                         fairflow::melt::render_snapshot(trace, fractions));
    write_envelope(outputs, "final_snapshot",
                   {{"type", "Image"}, {"file", "final_snapshot.png"}});
    return 0;
  } catch (const fairflow::Error& e) {
    std::cerr << e.what() << "\n";
    return fairflow::error_exit_class(e.code());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}
