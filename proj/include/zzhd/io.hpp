#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace zzhd {

/// Seconds since the Unix epoch, UTC.
using Timestamp = std::int64_t;

/// Parses ISO-8601 date-times of the form `YYYY-MM-DD[T| ]HH:MM[:SS[.fff]][Z|+HH:MM|-HH:MM]`.
/// A missing zone designator is read as UTC. Fractional seconds are truncated.
std::optional<Timestamp> parse_iso8601(std::string_view text);

/// `YYYY-MM-DDTHH:MM:SSZ`
std::string format_iso8601(Timestamp t);

/// Shortest decimal text that reads back to the same double.
std::string format_real(double v);

/// Splits one CSV record. Handles double-quoted fields with `""` escapes.
std::vector<std::string> split_csv_line(std::string_view line);

/// Quotes a field if it contains a comma, quote or newline.
std::string escape_csv_field(std::string_view field);

std::string_view trim(std::string_view s);

/// Reads a whole file; throws DataError if it cannot be opened.
std::string read_text_file(const std::filesystem::path& path);

/// Writes a whole file, creating parent directories; throws DataError on failure.
void write_text_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace zzhd
