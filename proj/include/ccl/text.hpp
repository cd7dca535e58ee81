#pragma once

#include <string>
#include <vector>

namespace ccl::text {

/// Shortest round-trip decimal form; integral values keep a trailing ".0"
/// so schedule rows read as fractions.
std::string format_double(double value);

std::string trim(const std::string& s);
std::vector<std::string> split(const std::string& s, char sep);

/// Comma-joined format_double values.
std::string join_csv(const std::vector<double>& values);

}  // namespace ccl::text
