#pragma once

#include "fha/planner.hpp"

#include <string>

namespace fha {

/// JSON document: header (model, d0, x0, eps, degree, initial inputs) and
/// one entry per phase with state, timing, coefficients and event record.
[[nodiscard]] std::string plan_to_json(const ModelDefinition& model, const Plan& plan);

/// Reads a document written by plan_to_json.  Names are resolved against
/// `model`; throws PlanError on malformed input or a family mismatch.
[[nodiscard]] Plan plan_from_json(const ModelDefinition& model, const std::string& document);

/// Flat CSV: key,value header rows, then one row per phase.  Polynomial
/// coefficients are ';'-separated per component, components '|'-separated.
[[nodiscard]] std::string plan_to_csv(const ModelDefinition& model, const Plan& plan);

}  // namespace fha
