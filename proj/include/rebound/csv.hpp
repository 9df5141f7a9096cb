#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace rebound::csv {

// Splits one CSV line on commas; trims surrounding whitespace and a trailing
// '\r'. No quoting support: none of the pipeline formats need it.
std::vector<std::string> split_line(std::string_view line);

// Locale-independent double parse of a full field. Throws ParseError.
double parse_double(std::string_view field, const std::string& context);

// Shortest-exact decimal rendering (17 significant digits), used everywhere a
// double is written to disk so that reruns are byte-identical and round-trips
// are lossless.
std::string format_double(double v);

// Reads a whole text file; throws IoError if unreadable.
std::string read_file(const std::string& path);

// Writes content to path atomically enough for our purposes (truncate+write).
void write_file(const std::string& path, const std::string& content);

bool file_exists(const std::string& path);

} // namespace rebound::csv
