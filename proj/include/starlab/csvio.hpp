#pragma once

#include <string>

namespace starlab {

// Shortest representation that round-trips to the same double.
std::string format_double(double v);

// Writes via a temporary in the same directory and renames into place.
void write_file_atomic(const std::string& path, const std::string& contents);

std::string read_file(const std::string& path);

} // namespace starlab
