#include "nanotherm/tabular.hpp"

#include <charconv>
#include <cmath>
#include <istream>

#include "nanotherm/errors.hpp"

namespace nanotherm::tabular {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

}  // namespace

std::vector<std::string> split_fields(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        const auto piece = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        out.emplace_back(trim(piece));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

CsvDocument read_csv(std::istream& in) {
    CsvDocument doc;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        const auto t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        if (!have_header) {
            doc.header = split_fields(t);
            have_header = true;
            continue;
        }
        doc.rows.push_back(split_fields(t));
        doc.line_numbers.push_back(line_no);
    }
    if (!have_header) throw ParseError("missing header line", 0);
    return doc;
}

double parse_number(std::string_view field, std::size_t row, std::string_view column) {
    double value = 0.0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    if (!field.empty() && *begin == '+') ++begin;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (field.empty() || ec != std::errc() || ptr != end || !std::isfinite(value))
        throw ParseError("row " + std::to_string(row) + ": column '" + std::string(column) +
                             "' is not a finite number: '" + std::string(field) + "'",
                         row);
    return value;
}

void require_header(const std::vector<std::string>& header, const std::vector<std::string>& expected,
                    const std::vector<std::string>& optional) {
    auto joined = [](const std::vector<std::string>& cols) {
        std::string s;
        for (std::size_t i = 0; i < cols.size(); ++i) s += (i ? "," : "") + cols[i];
        return s;
    };
    bool ok = header.size() >= expected.size() && header.size() <= expected.size() + optional.size();
    for (std::size_t i = 0; ok && i < header.size(); ++i) {
        const std::string& want = i < expected.size() ? expected[i] : optional[i - expected.size()];
        ok = header[i] == want;
    }
    if (!ok) throw ParseError("unexpected header '" + joined(header) + "', expected '" + joined(expected) + "'", 0);
}

}  // namespace nanotherm::tabular
