#pragma once

#include <cstdint>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace levdyn::csv {

/// Line-oriented reader for the comma dialect used by every workbench file.
/// Blank lines are skipped; quoted fields may hold commas but not newlines.
class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    /// False at end of input. Throws ParseError on an unbalanced quote.
    bool next(std::vector<std::string>& fields);
    long line() const { return line_; }

private:
    std::istream& in_;
    long line_ = 0;
};

void split(std::string_view line, long line_no, std::vector<std::string>& out);

/// Index of `name` in the header, or -1.
int column(const std::vector<std::string>& header, std::string_view name);
/// As column() but SchemaError when absent.
int require_column(const std::vector<std::string>& header, std::string_view name);

/// Accepts nan / inf spellings; ParseError naming the line and column otherwise.
double to_double(std::string_view text, long line, std::string_view column);
long to_long(std::string_view text, long line, std::string_view column);
std::uint64_t to_u64(std::string_view text, long line, std::string_view column);

/// %.17g
std::string format_double(double v);

}  // namespace levdyn::csv
