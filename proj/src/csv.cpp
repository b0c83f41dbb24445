#include "cyldens/csv.hpp"

#include <charconv>
#include <cstdio>
#include <ctime>
#include <fstream>

#include "cyldens/errors.hpp"

namespace cyldens {

std::string format_double(double value) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

namespace {
std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}
} // namespace

std::optional<double> parse_double(const std::string& field) {
  const std::string t = trim(field);
  if (t.empty()) return std::nullopt;
  double value = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), value);
  if (res.ec != std::errc{} || res.ptr != t.data() + t.size()) return std::nullopt;
  return value;
}

std::optional<std::int64_t> parse_int(const std::string& field) {
  const std::string t = trim(field);
  if (t.empty()) return std::nullopt;
  std::int64_t value = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), value);
  if (res.ec != std::errc{} || res.ptr != t.data() + t.size()) return std::nullopt;
  return value;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return fields;
}

std::optional<std::size_t> CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  return std::nullopt;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (table.header.empty()) {
      table.header = split_csv_line(line);
      continue;
    }
    table.rows.push_back(split_csv_line(line));
    table.line_numbers.push_back(line_no);
  }
  if (table.header.empty()) throw DataError(path + ": missing header line");
  return table;
}

std::optional<std::int64_t> parse_iso8601(const std::string& text) {
  const std::string t = trim(text);
  std::tm tm = {};
  int year = 0, month = 0, day = 0, hour = 0, minute = 0, second = 0;
  char sep = 'T';
  int consumed = -1;
  std::sscanf(t.c_str(), "%d-%d-%d%c%d:%d:%d%n", &year, &month, &day, &sep, &hour,
              &minute, &second, &consumed);
  if (consumed < 0) {
    second = 0;
    std::sscanf(t.c_str(), "%d-%d-%d%c%d:%d%n", &year, &month, &day, &sep, &hour,
                &minute, &consumed);
  }
  if (consumed < 0 || (sep != 'T' && sep != ' ')) return std::nullopt;
  const std::string rest = trim(t.substr(static_cast<std::size_t>(consumed)));
  if (!rest.empty() && rest != "Z") return std::nullopt;
  if (month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 || minute > 59 ||
      second > 60) {
    return std::nullopt;
  }
  tm.tm_year = year - 1900;
  tm.tm_mon = month - 1;
  tm.tm_mday = day;
  tm.tm_hour = hour;
  tm.tm_min = minute;
  tm.tm_sec = second;
  const time_t epoch = timegm(&tm);
  if (epoch == static_cast<time_t>(-1)) return std::nullopt;
  return static_cast<std::int64_t>(epoch);
}

std::string format_iso8601(std::int64_t epoch_seconds) {
  const time_t t = static_cast<time_t>(epoch_seconds);
  std::tm tm = {};
  gmtime_r(&t, &tm);
  char buf[80];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
  return buf;
}

} // namespace cyldens
