#include "wheatsim/diff.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "wheatsim/csv.hpp"
#include "wheatsim/error.hpp"

namespace wheatsim::diff {

namespace {

constexpr std::string_view kTextColumn = "flags";

}  // namespace

SeasonTable load_seasons(const std::filesystem::path& path) {
    const auto rows = csv::read_file(path);
    if (rows.empty() || rows.front().fields.empty() || rows.front().fields.front() != "season") {
        throw Error(ErrorCode::parse, path.string() + ": expected a seasons.csv header starting with 'season'");
    }
    const auto& header = rows.front().fields;
    std::vector<std::size_t> numeric;  // field indices of numeric columns
    SeasonTable t;
    for (std::size_t c = 1; c < header.size(); ++c) {
        if (header[c] == kTextColumn) continue;
        numeric.push_back(c);
        t.columns.push_back(header[c]);
    }
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.fields.size() != header.size()) {
            throw Error(ErrorCode::parse, path.string() + ":" + std::to_string(row.line) + ": wrong field count");
        }
        const double season = csv::parse_double(row.fields[0], row.line, "season");
        if (season != static_cast<double>(r - 1)) {
            throw Error(ErrorCode::validation, path.string() + ":" + std::to_string(row.line) +
                                                   ": seasons must be listed in order starting at 0");
        }
        std::vector<double> values;
        for (std::size_t c : numeric) values.push_back(csv::parse_double(row.fields[c], row.line, header[c]));
        t.rows.push_back(std::move(values));
    }
    return t;
}

std::vector<SeasonDelta> compare(const SeasonTable& baseline, const SeasonTable& scenario) {
    if (baseline.rows.size() != scenario.rows.size()) {
        throw Error(ErrorCode::validation, "season counts differ: baseline " + std::to_string(baseline.rows.size()) +
                                               ", scenario " + std::to_string(scenario.rows.size()));
    }
    // Pairs (baseline index, scenario index) of shared columns, in baseline order.
    std::vector<std::pair<std::size_t, std::size_t>> shared;
    for (std::size_t c = 0; c < baseline.columns.size(); ++c) {
        const auto it = std::find(scenario.columns.begin(), scenario.columns.end(), baseline.columns[c]);
        if (it != scenario.columns.end()) shared.emplace_back(c, static_cast<std::size_t>(it - scenario.columns.begin()));
    }
    if (shared.empty()) throw Error(ErrorCode::validation, "seasons.csv files share no columns");
    std::vector<SeasonDelta> out;
    for (std::size_t s = 0; s < baseline.rows.size(); ++s) {
        SeasonDelta d;
        d.season = s;
        for (const auto& [bc, sc] : shared) {
            ColumnDelta cd;
            cd.column = baseline.columns[bc];
            cd.baseline = baseline.rows[s][bc];
            cd.scenario = scenario.rows[s][sc];
            cd.delta = cd.scenario - cd.baseline;
            cd.percent = cd.baseline != 0.0 ? 100.0 * cd.delta / std::abs(cd.baseline)
                                            : std::numeric_limits<double>::quiet_NaN();
            d.columns.push_back(std::move(cd));
        }
        out.push_back(std::move(d));
    }
    return out;
}

std::vector<SeasonDelta> diff_directories(const std::filesystem::path& baseline, const std::filesystem::path& scenario) {
    const auto deltas = compare(load_seasons(baseline / "seasons.csv"), load_seasons(scenario / "seasons.csv"));
    const auto path = scenario / "diff.csv";
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io, "cannot write '" + path.string() + "'");
    csv::write_row(out, {"season", "column", "baseline", "scenario", "delta", "percent"});
    for (const auto& d : deltas) {
        for (const auto& c : d.columns) {
            csv::write_row(out, {std::to_string(d.season), c.column, csv::format(c.baseline), csv::format(c.scenario),
                                 csv::format(c.delta), std::isnan(c.percent) ? "" : csv::format(c.percent)});
        }
    }
    if (!out) throw Error(ErrorCode::io, "write failed for '" + path.string() + "'");
    return deltas;
}

}  // namespace wheatsim::diff
