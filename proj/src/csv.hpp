#pragma once

// Minimal CSV helpers shared by the landmark, thickness and correlation readers.
// Fields are comma separated without quoting; names must not contain commas.

#include <string>
#include <string_view>
#include <vector>

namespace cortexa::csv {

std::string trim(std::string_view s);
std::vector<std::string> split_line(std::string_view line);
/// Non-empty, non-comment (#) lines with CR stripped.
std::vector<std::string> data_lines(const std::string& text);
std::string read_file(const std::string& path);
double parse_double(const std::string& field, std::string_view what);
/// Column position in a header row, or -1.
int column(const std::vector<std::string>& header, std::string_view name);

}  // namespace cortexa::csv
