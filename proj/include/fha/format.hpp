#pragma once

#include <span>
#include <string>

namespace fha {

/// Shortest round-trip decimal form of a double ("inf"/"-inf"/"nan" for
/// non-finite values).  Output is locale independent.
[[nodiscard]] std::string format_double(double value);

/// Joins values with `sep` using format_double.
[[nodiscard]] std::string join_doubles(std::span<const double> values, char sep);

}  // namespace fha
