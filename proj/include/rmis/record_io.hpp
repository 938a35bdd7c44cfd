#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "rmis/engine.hpp"

namespace rmis {

// One run per JSON object. Outputs are "0", "1", "bot" or null; utilities are
// numbers or the string "-inf".
nlohmann::json record_to_json(const RunRecord& rec);
RunRecord record_from_json(const nlohmann::json& j);
void write_json_line(std::ostream& os, const RunRecord& rec);

// Flat per-run CSV. Columns:
//   seed, protocol, terminated, rounds_used, iterations_used, ones, zeros,
//   bots, undecided, neg_inf, cheated, deviator, deviator_output,
//   deviator_utility, fired, detected
std::string run_csv_header();
void write_csv_row(std::ostream& os, const RunRecord& rec);

}  // namespace rmis
