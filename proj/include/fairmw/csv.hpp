#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace fairmw {

using CsvRecord = std::vector<std::string>;

/// RFC 4180 records: comma separator, optional double-quoted fields with ""
/// escapes, LF or CRLF line ends. A trailing line break does not produce an
/// empty record; blank lines are skipped. Throws FormatError on an
/// unterminated quote.
std::vector<CsvRecord> parse_csv(std::string_view text);

/// Quotes the field when it contains a comma, quote or line break.
std::string csv_escape(std::string_view field);

/// Whole file as bytes. Throws IoError.
std::string read_file(const std::filesystem::path& path);
/// Throws IoError.
void write_file(const std::filesystem::path& path, std::string_view contents);

/// Shortest decimal that round-trips to the same double.
std::string format_double(double value);

}  // namespace fairmw
