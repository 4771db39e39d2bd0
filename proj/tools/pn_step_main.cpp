// Workflow step for the p-n junction surrogate bundle. Reads the canonical
// inputs.json from $FAIRFLOW_RUN_DIR, solves the depletion-approximation
// electrostatics and the ideal-diode IV sweep, and writes every declared
// output envelope into _outputs/.

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "fairflow/canonical.hpp"
#include "fairflow/errors.hpp"
#include "fairflow/exemplars/pn.hpp"
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

json rows_to_json(const std::vector<std::vector<double>>& rows) {
  json out = json::array();
  for (const auto& row : rows) {
    json r = json::array();
    for (double v : row) r.push_back(v);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

int main() {
  try {
    fs::path run_dir = fairflow::env_or("FAIRFLOW_RUN_DIR", fs::current_path().string());
    json inputs = json::parse(fairflow::read_file(run_dir / "inputs.json"));
    json table = json::parse(fairflow::read_file(run_dir / "data" / "semiconductors.json"));

    std::string name = inputs.at("material").get<std::string>();
    const json& mat = table.at("materials").at(name);

    fairflow::pn::DeviceRequest req;
    req.material.name = name;
    req.material.n_i_cm3 = mat.at("n_i_cm3").get<double>();
    req.material.eps_r = mat.at("eps_r").get<double>();
    req.material.eg_ev = mat.at("eg_ev").get<double>();
    req.material.i_s_a = mat.at("i_s_a").get<double>();
    req.p_length_um = number_of(inputs.at("p_length"));
    req.n_length_um = number_of(inputs.at("n_length"));
    req.p_points = static_cast<int>(number_of(inputs.at("p_mesh")));
    req.n_points = static_cast<int>(number_of(inputs.at("n_mesh")));
    req.na_cm3 = number_of(inputs.at("N_a"));
    req.nd_cm3 = number_of(inputs.at("N_d"));
    req.temperature_k = number_of(inputs.at("temperature"));
    req.v_start = number_of(inputs.at("v_start"));
    req.v_stop = number_of(inputs.at("v_stop"));
    req.v_step = number_of(inputs.at("v_step"));

    fairflow::pn::DeviceSolution sol = fairflow::pn::solve_device(req);

    fs::path outputs = run_dir / "_outputs";
    write_envelope(outputs, "iv_characteristic",
                   {{"type", "Array"}, {"value", rows_to_json(sol.iv)}});
    write_envelope(outputs, "band_edges",
                   {{"type", "Array"}, {"value", rows_to_json(sol.band_edges)}});
    write_envelope(outputs, "charge_density",
                   {{"type", "Array"}, {"value", rows_to_json(sol.charge_density)}});
    write_envelope(outputs, "depletion_width",
                   {{"type", "Number"}, {"units", "um"}, {"value", sol.w_um}});
    return 0;
  } catch (const fairflow::Error& e) {
    std::cerr << e.what() << "\n";
    return fairflow::error_exit_class(e.code());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}
