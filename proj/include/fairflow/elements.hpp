#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "fairflow/elements_data.hpp"
#include "fairflow/errors.hpp"
#include "fairflow/util.hpp"

namespace fairflow {

struct ElementRecord {
  std::string symbol;
  std::string name;
  int atomic_number = 0;
  double atomic_mass_u = 0.0;
  double covalent_radius_pm = 0.0;
  double density_g_cm3 = 0.0;  // 0.0 where no measured bulk density exists
};

namespace element_detail {

inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  size_t pos = 0;
  while (true) {
    size_t comma = line.find(',', pos);
    out.emplace_back(line.substr(pos, comma == std::string_view::npos ? comma : comma - pos));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace element_detail

inline std::vector<ElementRecord> parse_elements_csv(std::string_view csv) {
  std::vector<ElementRecord> out;
  size_t pos = 0;
  bool header = true;
  while (pos < csv.size()) {
    size_t nl = csv.find('\n', pos);
    std::string_view line = csv.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
    pos = nl == std::string_view::npos ? csv.size() : nl + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (header) {
      if (line != "symbol,name,atomic_number,atomic_mass_u,covalent_radius_pm,density_g_cm3")
        throw Error(Errc::schema_error, "unexpected element table header: " + std::string(line));
      header = false;
      continue;
    }
    auto fields = element_detail::split_csv_line(line);
    if (fields.size() != 6)
      throw Error(Errc::schema_error, "malformed element table row: " + std::string(line));
    ElementRecord rec;
    rec.symbol = fields[0];
    rec.name = fields[1];
    rec.atomic_number = std::stoi(fields[2]);
    rec.atomic_mass_u = std::stod(fields[3]);
    rec.covalent_radius_pm = std::stod(fields[4]);
    rec.density_g_cm3 = std::stod(fields[5]);
    out.push_back(std::move(rec));
  }
  return out;
}

inline const std::vector<ElementRecord>& element_table() {
  static const std::vector<ElementRecord> table = parse_elements_csv(kElementsCsv);
  return table;
}

// Lookup by symbol (exact, then case-insensitive) or by English name
// (case-insensitive). Throws UnknownElement otherwise.
inline const ElementRecord& lookup_element(std::string_view key) {
  const auto& table = element_table();
  for (const auto& rec : table)
    if (rec.symbol == key) return rec;
  std::string lower = to_lower(std::string(key));
  for (const auto& rec : table)
    if (to_lower(rec.symbol) == lower) return rec;
  for (const auto& rec : table)
    if (to_lower(rec.name) == lower) return rec;
  throw Error(Errc::unknown_element, "unknown element '" + std::string(key) + "'");
}

inline bool is_element_key(std::string_view key) {
  const auto& table = element_table();
  std::string lower = to_lower(std::string(key));
  for (const auto& rec : table)
    if (rec.symbol == key || to_lower(rec.symbol) == lower || to_lower(rec.name) == lower)
      return true;
  return false;
}

inline bool is_element_property(std::string_view name) {
  return name == "atomic_number" || name == "atomic_mass" || name == "covalent_radius" ||
         name == "density";
}

// Property values are numeric; units are fixed by the property itself
// (u, pm, g/cm^3) and are not subject to conversion here.
inline double element_property(const ElementRecord& rec, std::string_view property) {
  if (property == "atomic_number") return static_cast<double>(rec.atomic_number);
  if (property == "atomic_mass") return rec.atomic_mass_u;
  if (property == "covalent_radius") return rec.covalent_radius_pm;
  if (property == "density") return rec.density_g_cm3;
  throw Error(Errc::schema_error, "unknown element property '" + std::string(property) + "'");
}

}  // namespace fairflow
