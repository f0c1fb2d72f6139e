#pragma once

// Document format:
//   {"dim": N,
//    "states": [{"prior": xi, "density": {"re": [[...]], "im": [[...]]}}, ...]}
// The density is the unit-trace sigma_m (not rho_m). POVMs use
//   {"dim": N, "elements": [{"inconclusive": false, "operator": {"re": ..., "im": ...}}, ...]}
// where only the last element may be marked inconclusive. Numbers are written
// as decimal text with 17 significant digits, which round-trips doubles exactly.

#include <filesystem>
#include <string>
#include <string_view>

#include "qsd/state_model.hpp"

namespace qsd {

std::string to_json(const StateSet& set);
std::string to_json(const Povm& povm);

// Throw SchemaError with the path of the offending field.
StateSet state_set_from_json(std::string_view text);
Povm povm_from_json(std::string_view text);

StateSet read_state_set(const std::filesystem::path& path);
void write_state_set(const std::filesystem::path& path, const StateSet& set);

// Shared number formatting ("%.17g").
std::string format_double(double v);

}  // namespace qsd
