#pragma once

// Minimal numeric CSV reader and double formatting helpers. Input files are
// a single header row of unique column names followed by rows of finite
// decimal numbers. Parse failures carry 1-based line and column positions.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <armadillo>

namespace ivbma {

class CsvError : public std::runtime_error {
public:
    CsvError(const std::string& msg, std::size_t line, std::size_t column)
        : std::runtime_error(format(msg, line, column)),
          line_(line),
          column_(column) {}

    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

private:
    static std::string format(const std::string& msg, std::size_t line,
                              std::size_t column) {
        std::ostringstream os;
        os << msg << " (line " << line << ", column " << column << ")";
        return os.str();
    }

    std::size_t line_;
    std::size_t column_;
};

struct CsvTable {
    std::vector<std::string> columns;
    arma::mat values;  // one row per data line, one column per header name

    bool has_column(const std::string& name) const {
        for (const std::string& c : columns)
            if (c == name) return true;
        return false;
    }

    arma::uword column_index(const std::string& name) const {
        for (std::size_t j = 0; j < columns.size(); ++j)
            if (columns[j] == name) return arma::uword(j);
        throw std::invalid_argument("csv: no column named '" + name + "'");
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t')) --e;
    return s.substr(b, e - b);
}

inline std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            out.push_back(trim(line.substr(start, i - start)));
            start = i + 1;
        }
    }
    return out;
}

inline double parse_field(const std::string& field, std::size_t line,
                          std::size_t column) {
    if (field.empty()) throw CsvError("csv: empty field", line, column);
    double value = 0.0;
    const char* first = field.data();
    const char* last = first + field.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last)
        throw CsvError("csv: not a number: '" + field + "'", line, column);
    if (!std::isfinite(value))
        throw CsvError("csv: non-finite value: '" + field + "'", line, column);
    return value;
}

}  // namespace detail

inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CsvError("csv: cannot open '" + path + "'", 0, 0);

    std::string line;
    std::vector<std::string> rows;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        rows.push_back(line);
    }
    while (!rows.empty() && detail::trim(rows.back()).empty()) rows.pop_back();
    if (rows.empty()) throw CsvError("csv: no header row", 1, 1);

    CsvTable table;
    table.columns = detail::split_fields(rows[0]);
    for (std::size_t j = 0; j < table.columns.size(); ++j) {
        if (table.columns[j].empty())
            throw CsvError("csv: empty column name", 1, j + 1);
        for (std::size_t k = 0; k < j; ++k)
            if (table.columns[k] == table.columns[j])
                throw CsvError("csv: duplicate column name '" + table.columns[j] + "'",
                               1, j + 1);
    }

    const std::size_t ncol = table.columns.size();
    table.values.set_size(rows.size() - 1, ncol);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const std::vector<std::string> fields = detail::split_fields(rows[r]);
        if (fields.size() != ncol)
            throw CsvError("csv: expected " + std::to_string(ncol) + " fields, got " +
                               std::to_string(fields.size()),
                           r + 1, fields.size());
        for (std::size_t j = 0; j < ncol; ++j)
            table.values(r - 1, j) = detail::parse_field(fields[j], r + 1, j + 1);
    }
    return table;
}

// Shortest representation at the requested significant precision. 17
// significant digits round-trips a double exactly.
inline std::string format_double(double x, int significant) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", significant, x);
    return std::string(buf);
}

}  // namespace ivbma
