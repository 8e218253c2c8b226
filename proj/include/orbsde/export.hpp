#pragma once

#include <json.hpp>
#include <string>

#include "orbsde/convergence.hpp"
#include "orbsde/scheme.hpp"
#include "orbsde/switching.hpp"
#include "orbsde/validation.hpp"

namespace orbsde {

// 17-significant-digit scientific form used everywhere in CSV output
std::string format_float17(double v);

// doubles with integral values export as JSON integers; everything else
// round-trips through nlohmann's shortest representation
nlohmann::json json_number(double v);
nlohmann::json json_array(const std::vector<double>& v);

nlohmann::json to_json(const ValidationReport& report);
nlohmann::json to_json(const SnellReport& report);
nlohmann::json to_json(const SchemeSolution& solution);
nlohmann::json to_json(const ConvergenceTable& table);
nlohmann::json to_json(const std::vector<RefinementRow>& rows);
nlohmann::json to_json(const std::vector<PerturbationRow>& rows);

void write_text(const std::string& path, const std::string& text);

std::string csv_of(const ConvergenceTable& table);
std::string csv_of(const SchemeSolution& solution);  // per-time aggregates
std::string csv_of(const std::vector<RefinementRow>& rows);
std::string csv_of(const std::vector<PerturbationRow>& rows);
std::string csv_of(const Strategy& strategy);  // time,node,mode,decision (1-based modes)

struct SolutionSummary {
    std::vector<double> y0, ytilde0, z0;
};
SolutionSummary read_solution_summary(const std::string& path);

}  // namespace orbsde
