#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "compclass/linalg.hpp"

namespace compclass {

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);
double parse_double(std::string_view text);

std::string format_values(const Matrix& values);  // row-major, space separated
std::vector<double> parse_values(std::string_view text);

std::string trim(std::string_view text);

/// Reads `key = value` lines; blank lines and lines starting with '#' are
/// skipped. Duplicate keys are an error.
std::map<std::string, std::string> read_key_values(std::istream& in);

const std::string& require_key(const std::map<std::string, std::string>& kv, const std::string& key);

}  // namespace compclass
