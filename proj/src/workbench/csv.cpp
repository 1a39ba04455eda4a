#include "csv.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>

#include "levdyn/errors.hpp"

namespace levdyn::csv {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

[[noreturn]] void bad_value(std::string_view text, long line, std::string_view column, const char* what) {
    throw ParseError("line " + std::to_string(line) + ": column '" + std::string(column) + "': " + what +
                     " '" + std::string(text) + "'");
}

}  // namespace

void split(std::string_view line, long line_no, std::vector<std::string>& out) {
    out.clear();
    std::string field;
    bool quoted = false;
    bool was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += ch;
            }
        } else if (ch == '"' && trim(field).empty()) {
            quoted = was_quoted = true;
            field.clear();
        } else if (ch == ',') {
            out.emplace_back(was_quoted ? field : std::string(trim(field)));
            field.clear();
            was_quoted = false;
        } else {
            field += ch;
        }
    }
    if (quoted) throw ParseError("line " + std::to_string(line_no) + ": unterminated quoted field");
    out.emplace_back(was_quoted ? field : std::string(trim(field)));
}

bool Reader::next(std::vector<std::string>& fields) {
    std::string raw;
    while (std::getline(in_, raw)) {
        ++line_;
        std::string_view view(raw);
        if (line_ == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
        if (trim(view).empty()) continue;
        split(view, line_, fields);
        return true;
    }
    return false;
}

int column(const std::vector<std::string>& header, std::string_view name) {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

int require_column(const std::vector<std::string>& header, std::string_view name) {
    const int c = column(header, name);
    if (c < 0) throw SchemaError("missing column '" + std::string(name) + "'");
    return c;
}

double to_double(std::string_view text, long line, std::string_view column) {
    const std::string_view t = trim(text);
    if (t.empty()) bad_value(text, line, column, "empty value");
    const char* first = t.data();
    if (*first == '+') ++first;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), v);
    // overflow and underflow become +-inf / 0 rather than a parse error
    if (ec == std::errc::result_out_of_range && ptr == t.data() + t.size())
        return std::strtod(std::string(t).c_str(), nullptr);
    if (ec != std::errc() || ptr != t.data() + t.size()) bad_value(text, line, column, "not a number");
    return v;
}

long to_long(std::string_view text, long line, std::string_view column) {
    const std::string_view t = trim(text);
    long v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) bad_value(text, line, column, "not an integer");
    return v;
}

std::uint64_t to_u64(std::string_view text, long line, std::string_view column) {
    const std::string_view t = trim(text);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
        bad_value(text, line, column, "not an unsigned integer");
    return v;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace levdyn::csv
