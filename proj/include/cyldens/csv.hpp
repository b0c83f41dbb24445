#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cyldens {

//! Shortest round-trip decimal form of a double (locale independent).
std::string format_double(double value);

//! Locale-independent parse; returns nullopt on malformed input.
std::optional<double> parse_double(const std::string& field);
std::optional<std::int64_t> parse_int(const std::string& field);

//! Split one CSV line on commas (no quoting; the formats here never need it)
//! and trim surrounding whitespace from each field.
std::vector<std::string> split_csv_line(const std::string& line);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers; // 1-based input line of each row

  //! Index of a header column, or nullopt.
  std::optional<std::size_t> column(const std::string& name) const;
};

//! Read a whole CSV file with a header line. Throws DataError when the file
//! cannot be opened or has no header.
CsvTable read_csv(const std::string& path);

//! Parse an ISO-8601 timestamp (YYYY-MM-DD[T ]HH:MM[:SS][Z]) as UTC epoch
//! seconds; returns nullopt on malformed input.
std::optional<std::int64_t> parse_iso8601(const std::string& text);
std::string format_iso8601(std::int64_t epoch_seconds);

} // namespace cyldens
