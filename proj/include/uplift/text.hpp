#pragma once

#include <string>

namespace uplift {

// Shortest representation that parses back to the identical double.
std::string format_double(double value);

// Locale-free strict parse of a full token; throws std::runtime_error.
double parse_double(const std::string& token);

std::string read_file(const std::string& path);

// Writes to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace uplift
