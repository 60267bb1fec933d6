#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace wheatsim::csv {

/// Split one line on commas. No quoting support: none of the project's
/// formats carry commas inside fields.
std::vector<std::string> split(std::string_view line);

/// Reads a whole file into rows. Blank lines and a trailing '\r' are dropped;
/// each row keeps its 1-based source line number.
struct Row {
    std::size_t line = 0;
    std::vector<std::string> fields;
};
std::vector<Row> read_file(const std::filesystem::path& path);

/// Strict numeric parse of a whole field; throws Error(parse) naming the
/// line and column on failure.
double parse_double(const std::string& field, std::size_t line, std::string_view column);

/// Shortest round-trip decimal representation. Locale independent and stable,
/// so exports are byte-identical across runs.
std::string format(double value);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace wheatsim::csv
