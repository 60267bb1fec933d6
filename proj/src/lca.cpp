#include "wheatsim/lca.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "wheatsim/csv.hpp"
#include "wheatsim/error.hpp"

namespace wheatsim::lca {

namespace {

struct Table {
    std::vector<std::string> columns;
    std::vector<std::string> rows;
    std::vector<std::vector<double>> values;
    std::string metadata;
};

Table read_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io, "cannot open characterization file '" + path.string() + "'");
    Table t;
    std::string line;
    std::size_t number = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        if (line.front() == '#') {
            const auto text = line.find_first_not_of("# ");
            if (!t.metadata.empty()) t.metadata += '\n';
            if (text != std::string::npos) t.metadata += line.substr(text);
            continue;
        }
        auto fields = csv::split(line);
        if (!header) {
            t.columns.assign(fields.begin() + 1, fields.end());
            header = true;
            continue;
        }
        if (fields.size() != t.columns.size() + 1) {
            throw Error(ErrorCode::parse, path.string() + ":" + std::to_string(number) + ": expected " +
                                              std::to_string(t.columns.size() + 1) + " fields");
        }
        t.rows.push_back(fields[0]);
        std::vector<double> v;
        for (std::size_t i = 1; i < fields.size(); ++i) {
            try {
                v.push_back(csv::parse_double(fields[i], number, t.columns[i - 1]));
            } catch (const Error& e) {
                throw Error(ErrorCode::parse, path.string() + ": " + e.what());
            }
        }
        t.values.push_back(std::move(v));
    }
    if (!header) throw Error(ErrorCode::parse, path.string() + ": missing header");
    return t;
}

}  // namespace

CharacterizationMatrix::CharacterizationMatrix(std::vector<std::string> flow_names, std::vector<std::string> categories,
                                               std::vector<double> midpoint, std::vector<double> endpoint,
                                               std::string metadata)
    : flow_names_(std::move(flow_names)),
      categories_(std::move(categories)),
      midpoint_(std::move(midpoint)),
      endpoint_(std::move(endpoint)),
      metadata_(std::move(metadata)) {
    if (midpoint_.size() != flow_names_.size() * categories_.size() ||
        endpoint_.size() != categories_.size() * kEndpointCount) {
        throw Error(ErrorCode::validation, "characterization matrix dimensions are inconsistent");
    }
    for (double v : midpoint_) {
        if (!std::isfinite(v)) throw Error(ErrorCode::validation, "characterization factor is not finite");
    }
    for (double v : endpoint_) {
        if (!std::isfinite(v)) throw Error(ErrorCode::validation, "endpoint factor is not finite");
    }
}

CharacterizationMatrix CharacterizationMatrix::load(const std::filesystem::path& midpoint_csv,
                                                    const std::filesystem::path& endpoint_csv) {
    const auto mid = read_table(midpoint_csv);
    const auto end = read_table(endpoint_csv);

    // Rows are re-ordered into kFlowNames order; every flow must be present.
    std::vector<double> midpoint(kFlowCount * mid.columns.size(), 0.0);
    std::vector<bool> seen(kFlowCount, false);
    for (std::size_t r = 0; r < mid.rows.size(); ++r) {
        const auto it = std::find(kFlowNames.begin(), kFlowNames.end(), mid.rows[r]);
        if (it == kFlowNames.end()) {
            throw Error(ErrorCode::validation, midpoint_csv.string() + ": unknown flow name '" + mid.rows[r] + "'");
        }
        const auto f = static_cast<std::size_t>(it - kFlowNames.begin());
        if (seen[f]) throw Error(ErrorCode::validation, midpoint_csv.string() + ": duplicate flow '" + mid.rows[r] + "'");
        seen[f] = true;
        std::copy(mid.values[r].begin(), mid.values[r].end(), midpoint.begin() + static_cast<std::ptrdiff_t>(f * mid.columns.size()));
    }
    for (std::size_t f = 0; f < kFlowCount; ++f) {
        if (!seen[f]) {
            throw Error(ErrorCode::validation, midpoint_csv.string() + ": missing flow '" + std::string(kFlowNames[f]) + "'");
        }
    }

    if (end.columns.size() != kEndpointCount ||
        !std::equal(end.columns.begin(), end.columns.end(), kEndpointNames.begin())) {
        throw Error(ErrorCode::validation, endpoint_csv.string() + ": columns must be DALY,species_yr,cost");
    }
    std::vector<double> endpoint(mid.columns.size() * kEndpointCount, 0.0);
    std::vector<bool> cat_seen(mid.columns.size(), false);
    for (std::size_t r = 0; r < end.rows.size(); ++r) {
        const auto it = std::find(mid.columns.begin(), mid.columns.end(), end.rows[r]);
        if (it == mid.columns.end()) {
            throw Error(ErrorCode::validation, endpoint_csv.string() + ": unknown midpoint category '" + end.rows[r] + "'");
        }
        const auto c = static_cast<std::size_t>(it - mid.columns.begin());
        cat_seen[c] = true;
        std::copy(end.values[r].begin(), end.values[r].end(), endpoint.begin() + static_cast<std::ptrdiff_t>(c * kEndpointCount));
    }
    for (std::size_t c = 0; c < cat_seen.size(); ++c) {
        if (!cat_seen[c]) {
            throw Error(ErrorCode::validation, endpoint_csv.string() + ": missing midpoint category '" + mid.columns[c] + "'");
        }
    }

    return CharacterizationMatrix({kFlowNames.begin(), kFlowNames.end()}, mid.columns, std::move(midpoint),
                                  std::move(endpoint), mid.metadata);
}

std::size_t CharacterizationMatrix::category_index(std::string_view name) const {
    const auto it = std::find(categories_.begin(), categories_.end(), name);
    if (it == categories_.end()) throw Error(ErrorCode::invalid_argument, "unknown midpoint category '" + std::string(name) + "'");
    return static_cast<std::size_t>(it - categories_.begin());
}

Inventory build_inventory(const agronomy::Farm& farm, const agronomy::Decision& decision,
                          const agronomy::Outcome& outcome, const InventoryCoefficients& coefficients,
                          FunctionalUnit unit) {
    using agronomy::StressKind;
    Inventory inv;
    inv.farm_id = farm.id;
    inv.unit = unit;
    auto& fl = inv.flows;
    for (std::size_t i = 0; i < farm.stress_factors.size() && i < decision.inputs.size(); ++i) {
        const double x = decision.inputs[i];
        switch (farm.stress_factors[i].kind) {
            case StressKind::nutrition:
                fl[static_cast<std::size_t>(Flow::fert_n)] += x * farm.npk_split[0];
                fl[static_cast<std::size_t>(Flow::fert_p)] += x * farm.npk_split[1];
                fl[static_cast<std::size_t>(Flow::fert_k)] += x * farm.npk_split[2];
                break;
            case StressKind::weeds: fl[static_cast<std::size_t>(Flow::herbicide)] += x; break;
            case StressKind::pests: fl[static_cast<std::size_t>(Flow::insecticide)] += x; break;
            case StressKind::fungi: fl[static_cast<std::size_t>(Flow::fungicide)] += x; break;
        }
    }
    fl[static_cast<std::size_t>(Flow::machinery)] = farm.machinery_hours;
    fl[static_cast<std::size_t>(Flow::diesel)] = farm.machinery_hours * coefficients.diesel_l_per_hour;

    if (unit == FunctionalUnit::per_tonne) {
        if (!(outcome.actual_yield > 0.0)) {
            throw Error(ErrorCode::invalid_argument, "farm " + std::to_string(farm.id) + ": per-tonne inventory needs a positive yield");
        }
        for (auto& v : fl) v /= outcome.actual_yield;
    }
    for (double v : fl) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw Error(ErrorCode::numerical, "farm " + std::to_string(farm.id) + ": invalid inventory flow");
        }
    }
    return inv;
}

ImpactResult characterize(std::span<const double> flows, const CharacterizationMatrix& matrix, std::uint64_t farm_id) {
    if (flows.size() != matrix.flow_count()) {
        throw Error(ErrorCode::invalid_argument, "characterize: inventory has " + std::to_string(flows.size()) +
                                                     " flows, matrix expects " + std::to_string(matrix.flow_count()));
    }
    ImpactResult r;
    r.farm_id = farm_id;
    r.midpoints.assign(matrix.category_count(), 0.0);
    for (std::size_t f = 0; f < flows.size(); ++f) {
        for (std::size_t c = 0; c < matrix.category_count(); ++c) r.midpoints[c] += flows[f] * matrix.midpoint_factor(f, c);
    }
    for (std::size_t c = 0; c < matrix.category_count(); ++c) {
        for (std::size_t e = 0; e < kEndpointCount; ++e) r.endpoints[e] += r.midpoints[c] * matrix.endpoint_factor(c, e);
    }
    return r;
}

ImpactResult characterize(const Inventory& inventory, const CharacterizationMatrix& matrix) {
    return characterize(inventory.flows, matrix, inventory.farm_id);
}

NationalImpact aggregate_national(std::span<const ImpactResult> per_hectare, std::span<const agronomy::Farm> farms,
                                  std::span<const double> production, std::span<const Inventory> inventories) {
    if (per_hectare.size() != farms.size() || production.size() != farms.size() ||
        (!inventories.empty() && inventories.size() != farms.size())) {
        throw Error(ErrorCode::invalid_argument, "aggregate_national: expected one result per farm");
    }
    NationalImpact n;
    const std::size_t cats = per_hectare.empty() ? 0 : per_hectare.front().midpoints.size();
    n.totals.midpoints.assign(cats, 0.0);
    for (std::size_t i = 0; i < farms.size(); ++i) {
        const double area = farms[i].area;
        const auto& r = per_hectare[i];
        for (std::size_t c = 0; c < cats; ++c) n.totals.midpoints[c] += r.midpoints[c] * area;
        for (std::size_t e = 0; e < kEndpointCount; ++e) n.totals.endpoints[e] += r.endpoints[e] * area;
        if (!inventories.empty()) {
            for (std::size_t f = 0; f < kFlowCount; ++f) n.flow_totals[f] += inventories[i].flows[f] * area;
        }
        n.production += production[i];
        n.area += area;
    }
    n.per_tonne.midpoints.assign(cats, 0.0);
    if (n.production > 0.0) {
        for (std::size_t c = 0; c < cats; ++c) n.per_tonne.midpoints[c] = n.totals.midpoints[c] / n.production;
        for (std::size_t e = 0; e < kEndpointCount; ++e) n.per_tonne.endpoints[e] = n.totals.endpoints[e] / n.production;
    }
    return n;
}

std::vector<std::string> impact_header(const CharacterizationMatrix& matrix) {
    std::vector<std::string> h{"farm_id"};
    for (const char* suffix : {"_per_ha", "_per_t"}) {
        for (const auto& c : matrix.categories()) h.push_back(c + suffix);
        for (auto e : kEndpointNames) h.push_back(std::string(e) + suffix);
    }
    return h;
}

std::vector<std::string> impact_row(const ImpactResult& r, double actual_yield) {
    std::vector<std::string> row{std::to_string(r.farm_id)};
    for (double v : r.midpoints) row.push_back(csv::format(v));
    for (double v : r.endpoints) row.push_back(csv::format(v));
    for (double v : r.midpoints) row.push_back(actual_yield > 0.0 ? csv::format(v / actual_yield) : "");
    for (double v : r.endpoints) row.push_back(actual_yield > 0.0 ? csv::format(v / actual_yield) : "");
    return row;
}

}  // namespace wheatsim::lca
