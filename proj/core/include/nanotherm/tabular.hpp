#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace nanotherm::tabular {

/// Comma-separated text with `#` comment lines and one header line.
struct CsvDocument {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;  // rows[i] is data row i+1
    std::vector<std::size_t> line_numbers;       // source line of each row
};

/// Reads the header and all data rows. Blank and `#` lines are skipped.
/// Throws ParseError (row 0) when no header is present.
CsvDocument read_csv(std::istream& in);

std::vector<std::string> split_fields(std::string_view line);

/// Strict decimal parse; throws ParseError naming the row and column.
double parse_number(std::string_view field, std::size_t row, std::string_view column);

/// Throws ParseError unless `header` begins with `expected` (extra trailing columns allowed
/// only when listed in `optional`).
void require_header(const std::vector<std::string>& header, const std::vector<std::string>& expected,
                    const std::vector<std::string>& optional = {});

}  // namespace nanotherm::tabular
