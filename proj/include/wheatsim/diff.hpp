#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace wheatsim::diff {

/// seasons.csv loaded as a numeric table (the text "flags" column is dropped).
/// Seasons must run 0, 1, 2, ... in order.
struct SeasonTable {
    std::vector<std::string> columns;  // without the leading "season"
    std::vector<std::vector<double>> rows;
};

SeasonTable load_seasons(const std::filesystem::path& seasons_csv);

struct ColumnDelta {
    std::string column;
    double baseline = 0.0;
    double scenario = 0.0;
    double delta = 0.0;
    double percent = 0.0;  // NaN when the baseline is zero
};

struct SeasonDelta {
    std::size_t season = 0;
    std::vector<ColumnDelta> columns;
};

/// Season-aligned deltas of every column both tables have, in baseline
/// order. Columns only one side has (scheme adoption counts) are skipped.
/// Throws when the season counts differ or nothing is shared.
std::vector<SeasonDelta> compare(const SeasonTable& baseline, const SeasonTable& scenario);

/// Compares <baseline>/seasons.csv with <scenario>/seasons.csv, writes
/// <scenario>/diff.csv and returns the deltas.
std::vector<SeasonDelta> diff_directories(const std::filesystem::path& baseline, const std::filesystem::path& scenario);

}  // namespace wheatsim::diff
