#pragma once

#include "fha/models.hpp"

#include <filesystem>
#include <string>

namespace fha {

/// Parses a model document:
///
///   { "family": "one_tank", "parameters": {...}, "inputs": [...],
///     "outputs": [...], "states": [{"name", "invariant_inputs"}],
///     "transitions": [{"name", "head", "tail", "priority", "guard"}],
///     "initial": {"state", "x0", "free_outputs"} }
///
/// Guard atoms are {"type": "input", "input", "value"} or
/// {"type": "output", "output", "relation", "value"}.  States, inputs and
/// outputs may be referenced by name or by index.  Throws ModelError whose
/// message starts with the offending field path.
[[nodiscard]] ModelDefinition load_model(const std::string& document);
[[nodiscard]] ModelDefinition load_model_file(const std::filesystem::path& path);

/// Inverse of load_model; key order and number formatting are stable.
[[nodiscard]] std::string save_model(const ModelDefinition& m);

}  // namespace fha
