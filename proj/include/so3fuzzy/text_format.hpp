#pragma once

// Round-trippable number formatting and tolerant number-list parsing shared
// by the config, params-record and CSV writers.

#include <string>
#include <string_view>
#include <vector>

namespace so3fuzzy {

/// Shortest decimal form that parses back to the identical double.
std::string format_double(double v);

/// Joins values with ", " using format_double.
std::string format_list(const std::vector<double>& values);

/// Parses a list of numbers separated by commas and/or whitespace.
/// Throws std::invalid_argument naming the offending token.
std::vector<double> parse_number_list(std::string_view text);

/// Parses exactly one number. Throws std::invalid_argument otherwise.
double parse_number(std::string_view text);

std::string_view trim(std::string_view s);

}  // namespace so3fuzzy
