#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace toothsim::detail {

struct CsvRow {
    std::size_t line = 0;  // 1-based source line
    std::vector<std::string> fields;
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<CsvRow> rows;

    /// Column index by exact header name.
    std::optional<std::size_t> column(std::string_view name) const;
};

/// Comma-separated text with an optional double-quoted field syntax. Blank lines are
/// skipped. The first non-blank line is the header.
CsvTable parseCsv(std::string_view text);

/// Quotes a field when it contains a comma, quote or newline.
std::string csvField(std::string_view value);

/// Strict number parse of a whole field; nullopt on anything else.
std::optional<double> parseNumber(std::string_view text);

} // namespace toothsim::detail
