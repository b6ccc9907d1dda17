#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace cfkg {

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);

/// Shortest decimal that round-trips to the same double.
std::string format_number(double value);

/// Quotes the field when it contains a comma, quote or line break.
std::string csv_field(std::string_view value);

/// RFC 4180 style: quoted fields, doubled quotes, CRLF or LF line ends.
/// Blank lines are skipped.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

double parse_number(std::string_view text);

} // namespace cfkg
