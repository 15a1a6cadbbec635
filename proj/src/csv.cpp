#include "csv.hpp"

#include "toothsim/geometry.hpp"

#include <charconv>

namespace toothsim::detail {

namespace {

std::vector<std::string> splitRecord(std::string_view line, std::size_t lineNo) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"' && field.empty()) {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(field));
            field.clear();
        } else {
            field += c;
        }
    }
    if (quoted) {
        throw Error("csv line " + std::to_string(lineNo) + ": unterminated quote");
    }
    out.push_back(std::move(field));
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

} // namespace

std::optional<std::size_t> CsvTable::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    return std::nullopt;
}

CsvTable parseCsv(std::string_view text) {
    CsvTable table;
    std::size_t lineNo = 0;
    bool haveHeader = false;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++lineNo;
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        auto fields = splitRecord(line, lineNo);
        for (auto& f : fields) f = std::string(trim(f));
        if (!haveHeader) {
            table.header = std::move(fields);
            haveHeader = true;
        } else {
            table.rows.push_back({lineNo, std::move(fields)});
        }
    }
    if (!haveHeader) {
        throw Error("csv: no header line");
    }
    return table;
}

std::string csvField(std::string_view value) {
    if (value.find_first_of(",\"\n") == std::string_view::npos) {
        return std::string(value);
    }
    std::string out = "\"";
    for (char c : value) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::optional<double> parseNumber(std::string_view text) {
    text = trim(text);
    if (text.empty()) return std::nullopt;
    if (text.front() == '+') text.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
    return v;
}

} // namespace toothsim::detail
