#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace bugcast {

/// Reads a whole file; throws ErrorKind::Io.
std::string read_file(const std::filesystem::path& path);

/// Writes `contents` to a sibling temporary file, then renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// Splits on '\n', dropping a trailing '\r' from each line and a final empty line.
std::vector<std::string_view> split_lines(std::string_view text);
std::vector<std::string_view> split_fields(std::string_view line, char sep = ',');

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);
double parse_double(std::string_view text);

}  // namespace bugcast
