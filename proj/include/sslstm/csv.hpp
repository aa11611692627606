#pragma once

#include <charconv>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "sslstm/errors.hpp"
#include "sslstm/series.hpp"

namespace sslstm {

/// Comma-separated numeric table with an optional single header row.
/// Parsing is locale-independent: '.' decimal point, UTF-8 text.
struct CsvTable {
    std::vector<std::string> header;              ///< empty when the file has no header
    std::vector<std::vector<double>> rows;
    bool has_header = false;

    std::size_t column_count() const {
        if (!header.empty()) return header.size();
        return rows.empty() ? 0 : rows.front().size();
    }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string::size_type start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        std::string field = line.substr(start, comma == std::string::npos ? comma : comma - start);
        // trim surrounding whitespace and a trailing carriage return
        const auto first = field.find_first_not_of(" \t\r");
        const auto last = field.find_last_not_of(" \t\r");
        fields.push_back(first == std::string::npos ? "" : field.substr(first, last - first + 1));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return fields;
}

inline bool parse_double(const std::string& text, double& out) {
    const char* begin = text.data();
    const char* end = begin + text.size();
    const auto result = std::from_chars(begin, end, out);
    return result.ec == std::errc{} && result.ptr == end && !text.empty();
}

}  // namespace detail

/// Reads a CSV document. A header is detected when any field of the first
/// non-empty line does not parse as a number.
inline CsvTable read_csv(std::istream& is) {
    CsvTable table;
    std::string line;
    long line_number = 0;
    bool first_content_line = true;
    while (std::getline(is, line)) {
        ++line_number;
        if (line.empty() || line == "\r") continue;
        std::vector<std::string> fields = detail::split_csv_line(line);
        std::vector<double> row(fields.size());
        bool all_numeric = true;
        for (std::size_t c = 0; c < fields.size(); ++c)
            all_numeric = all_numeric && detail::parse_double(fields[c], row[c]);
        if (first_content_line && !all_numeric) {
            table.header = std::move(fields);
            table.has_header = true;
        } else if (!all_numeric) {
            for (std::size_t c = 0; c < fields.size(); ++c)
                if (!detail::parse_double(fields[c], row[c]))
                    throw ParseError("line " + std::to_string(line_number) +
                                     ": field '" + fields[c] + "' is not a number");
        } else {
            if (!table.rows.empty() && row.size() != table.rows.front().size())
                throw ParseError("line " + std::to_string(line_number) + ": expected " +
                                 std::to_string(table.rows.front().size()) + " fields, got " +
                                 std::to_string(row.size()));
            table.rows.push_back(std::move(row));
        }
        first_content_line = false;
    }
    if (table.rows.empty()) throw ParseError("line 1: no data rows");
    return table;
}

/// Resolves a column selector, either a zero-based index or a header name.
inline std::size_t resolve_column(const CsvTable& table, const std::string& selector) {
    double numeric = 0.0;
    if (detail::parse_double(selector, numeric)) {
        const long idx = static_cast<long>(numeric);
        if (idx < 0 || idx >= static_cast<long>(table.column_count()))
            throw ParseError("column index " + selector + " out of range [0, " +
                             std::to_string(table.column_count()) + ")");
        return static_cast<std::size_t>(idx);
    }
    for (std::size_t c = 0; c < table.header.size(); ++c)
        if (table.header[c] == selector) return c;
    std::string available;
    for (std::size_t c = 0; c < table.header.size(); ++c)
        available += (c ? ", " : "") + table.header[c];
    throw ParseError("no column named '" + selector + "'; available columns: " +
                     (available.empty() ? "(no header)" : available));
}

/// Extracts one column as a time series; at least 8 finite values required.
inline TimeSeries read_series_column(const CsvTable& table, const std::string& selector,
                                     double dt = 1.0) {
    const std::size_t col = resolve_column(table, selector);
    TimeSeries series;
    series.dt = dt;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        if (col >= table.rows[r].size())
            throw ParseError("row " + std::to_string(r + 1) + " has no column " +
                             std::to_string(col));
        series.values.push_back(table.rows[r][col]);
    }
    if (series.values.size() < 8) throw ParseError("need at least 8 data rows");
    validate_series(series);
    return series;
}

/// 17 significant digits: enough to round-trip any double exactly.
inline std::string format_value(double v) {
    char buffer[64];
    const auto result = std::to_chars(buffer, buffer + sizeof(buffer), v,
                                      std::chars_format::general, 17);
    return std::string(buffer, result.ptr);
}

/// Writes columns of equal length with a header row.
inline void write_csv(std::ostream& os, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& columns) {
    if (columns.empty() || header.size() != columns.size())
        throw ShapeMismatch("write_csv needs one header entry per column");
    for (std::size_t c = 0; c < header.size(); ++c) os << (c ? "," : "") << header[c];
    os << '\n';
    const std::size_t n = columns.front().size();
    for (const auto& col : columns)
        if (col.size() != n) throw ShapeMismatch("write_csv columns differ in length");
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < columns.size(); ++c)
            os << (c ? "," : "") << format_value(columns[c][r]);
        os << '\n';
    }
}

}  // namespace sslstm
