#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace noisycal::csv {

struct Row {
  std::size_t line = 0;  // 1-based line number in the source
  std::vector<std::string> fields;
};

// Splits comma-separated lines, trimming whitespace around fields and
// skipping blank lines. No quoting: none of the formats here need it.
std::vector<Row> read_rows(std::istream& in);
std::vector<Row> read_file(const std::string& path);

// Strict numeric parsing; throws ParseError naming the line.
double parse_double(std::string_view field, std::size_t line);
long parse_long(std::string_view field, std::size_t line);

// Shortest text that round-trips the double exactly.
std::string format_double(double value);

}  // namespace noisycal::csv
