#include "unitroot/csv.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <sstream>

namespace unitroot {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(field);
            field.clear();
        } else if (c != '\r') {
            field.push_back(c);
        }
    }
    fields.push_back(field);
    return fields;
}

namespace {

std::string trimmed(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

bool is_missing_token(const std::string& s) {
    return s.empty() || s == "NA" || s == "NaN" || s == "nan";
}

bool parse_value(const std::string& raw, double* out) {
    const std::string s = trimmed(raw);
    if (is_missing_token(s)) {
        *out = kNaN;
        return true;
    }
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) return false;
        *out = v;
        return true;
    } catch (const std::exception&) {
        return false;
    }
}

}  // namespace

Series read_series_csv(std::istream& in, const std::string& column,
                       std::optional<bool> has_header) {
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (trimmed(line).empty()) continue;
        rows.push_back(split_csv_line(line));
    }
    if (rows.empty()) throw input_error("empty CSV input");

    std::size_t col = 0;
    bool header;
    if (!column.empty()) {
        // A named column requires a header row.
        const auto& first = rows.front();
        const auto it = std::find_if(first.begin(), first.end(),
                                     [&](const std::string& f) {
                                         return trimmed(f) == column;
                                     });
        if (it == first.end()) {
            throw input_error("column '" + column + "' not found in CSV header");
        }
        col = static_cast<std::size_t>(it - first.begin());
        header = true;
    } else {
        double ignored;
        header = has_header.value_or(
            rows.front().size() > col &&
            !parse_value(rows.front()[col], &ignored));
        if (has_header.has_value()) header = *has_header;
    }

    std::vector<double> values;
    for (std::size_t i = header ? 1 : 0; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (col >= row.size()) {
            throw input_error("row " + std::to_string(i + 1) +
                              " has too few fields");
        }
        double v;
        if (!parse_value(row[col], &v)) {
            throw input_error("row " + std::to_string(i + 1) +
                              ": cannot parse '" + row[col] + "' as a number");
        }
        values.push_back(v);
    }
    if (values.size() < 2) throw input_error("need at least two rows of data");
    return Series(std::move(values));
}

Series read_series_csv_file(const std::string& path, const std::string& column,
                            std::optional<bool> has_header) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open " + path);
    return read_series_csv(in, column, has_header);
}

}  // namespace unitroot
