#pragma once

#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kgr::tsv {

/// Splits on '\t'. A trailing '\r' is stripped first so CRLF files read like LF.
std::vector<std::string_view> split(std::string_view line);

/// Shortest decimal form that parses back to exactly the same double.
std::string format_double(double value);

std::optional<double> parse_double(std::string_view text);
std::optional<long long> parse_int(std::string_view text);

/// Reads the next line, tracking the 1-based line number. Returns false at EOF.
bool next_line(std::istream& in, std::string& line, std::size_t& line_no);

std::string_view trim(std::string_view s);

}  // namespace kgr::tsv
