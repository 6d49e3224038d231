#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "unitroot/core.hpp"

namespace unitroot {

// Reads a univariate series from a CSV stream.  Empty fields, "NA", "NaN"
// and "nan" denote missing values.  With `column` empty the first column is
// used; otherwise the header row must contain the named column.  A header is
// detected automatically (first row non-numeric in the selected column)
// unless `has_header` forces it.
Series read_series_csv(std::istream& in, const std::string& column = "",
                       std::optional<bool> has_header = std::nullopt);

Series read_series_csv_file(const std::string& path, const std::string& column = "",
                            std::optional<bool> has_header = std::nullopt);

// Splits one CSV record, honoring double quotes.
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace unitroot
