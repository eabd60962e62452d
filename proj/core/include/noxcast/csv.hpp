#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace noxcast::csv {

/// Splits one CSV record on commas. Double-quoted fields may contain commas
/// and doubled quotes; surrounding whitespace is kept as-is.
std::vector<std::string> split_line(std::string_view line);

/// Strips a trailing '\r' and a leading UTF-8 byte-order mark if present.
std::string_view clean_line(std::string_view line, bool first_line);

/// Parses a whole cell as a finite double; leading/trailing blanks allowed.
std::optional<double> parse_number(std::string_view cell);

/// Shortest decimal text that round-trips to the same double.
std::string format_number(double value);

/// Writes a row of already formatted cells, quoting where needed.
void write_row(std::ostream& out, const std::vector<std::string>& cells);

}  // namespace noxcast::csv
