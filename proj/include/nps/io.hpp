#pragma once

// Text serialization: legacy VTK structured points, flat x,y,value CSV,
// diagnostics CSV streams and JSON checkpoints that restart bit-identically.

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>

#include <json.hpp>

#include "nps/diagnostics.hpp"
#include "nps/state.hpp"

namespace nps {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

void write_vtk(std::ostream& os, const State& state, const std::string& title = "nps snapshot");
void write_vtk(const std::filesystem::path& path, const State& state, const std::string& title = "nps snapshot");

/// Rows "x,y,value" at cell centers.
void write_field_csv(std::ostream& os, const ScalarField& f);
void write_field_csv(const std::filesystem::path& path, const ScalarField& f);

/// Header t,e_energy,l2_c1,l2_c2,l2_u,linf_c1,linf_c2,min_c,div_u,mass_c1,mass_c2.
void write_diagnostics_header(std::ostream& os);
void write_diagnostics_row(std::ostream& os, const DiagnosticsRecord& r);
void write_diagnostics_csv(const std::filesystem::path& path, std::span<const DiagnosticsRecord> history);

/// Header t,e_energy,e_energy_squared_velocity.
void write_energy_variants_csv(const std::filesystem::path& path, std::span<const DiagnosticsRecord> history);

nlohmann::json state_to_json(const State& state);
/// Throws ParseError on missing or mis-shaped members.
State state_from_json(const nlohmann::json& j);

void save_checkpoint(const std::filesystem::path& path, const State& state);
State load_checkpoint(const std::filesystem::path& path);

nlohmann::json to_json(const BoundaryClassification& c);
nlohmann::json to_json(const DiagnosticsRecord& r);

/// Writes j with two-space indentation and a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace nps
