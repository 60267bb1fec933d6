#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "wheatsim/agronomy.hpp"
#include "wheatsim/lca.hpp"
#include "wheatsim/market.hpp"
#include "wheatsim/rng.hpp"

namespace wheatsim::testing {

inline std::filesystem::path data_dir() { return WHEATSIM_DATA_DIR; }
inline std::filesystem::path scenario_dir() { return WHEATSIM_SCENARIO_DIR; }

inline double rel_err(double a, double b) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) / scale;
}

/// Fresh, empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("wheatsim_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

/// True when both directories hold the same file names with identical bytes.
inline bool same_tree(const std::filesystem::path& a, const std::filesystem::path& b, std::string* why = nullptr) {
    std::vector<std::string> na, nb;
    for (const auto& e : std::filesystem::directory_iterator(a)) na.push_back(e.path().filename().string());
    for (const auto& e : std::filesystem::directory_iterator(b)) nb.push_back(e.path().filename().string());
    std::sort(na.begin(), na.end());
    std::sort(nb.begin(), nb.end());
    if (na != nb) {
        if (why) *why = "file sets differ";
        return false;
    }
    for (const auto& n : na) {
        if (slurp(a / n) != slurp(b / n)) {
            if (why) *why = n + " differs";
            return false;
        }
    }
    return !na.empty();
}

inline agronomy::Farm make_farm(double ybar, std::vector<agronomy::StressFactor> factors,
                                agronomy::Behavior behavior = agronomy::Behavior::optimizer) {
    agronomy::Farm f;
    f.id = 1;
    f.area = 10.0;
    f.potential_yield = ybar;
    f.machinery_hours = 10.0;
    f.stress_factors = std::move(factors);
    f.behavior = behavior;
    f.last_inputs.assign(f.stress_factors.size(), 0.0);
    return f;
}

inline agronomy::StressFactor factor(double s, double lambda, double price,
                                     agronomy::StressKind kind = agronomy::StressKind::nutrition) {
    return {kind, s, lambda, price};
}

/// Mixed optimizer and rule-based farms with four stress factors and
/// parameters in the ranges the calibration produces.
inline std::vector<agronomy::Farm> random_farms(std::size_t n, std::uint64_t seed) {
    using agronomy::StressKind;
    KeyedRng rng(seed, {0xfa});
    std::vector<agronomy::Farm> farms;
    farms.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto f = make_farm(rng.uniform(3.0, 5.0),
                           {factor(0.40, rng.uniform(0.008, 0.03), 0.6, StressKind::nutrition),
                            factor(0.20, rng.uniform(0.8, 3.0), 25.0, StressKind::weeds),
                            factor(0.06, rng.uniform(3.0, 20.0), 30.0, StressKind::pests),
                            factor(0.10, rng.uniform(1.5, 6.0), 22.0, StressKind::fungi)},
                           rng.uniform() < 0.5 ? agronomy::Behavior::optimizer : agronomy::Behavior::rule_based);
        f.id = i + 1;
        f.cluster_id = static_cast<int>(i % 3);
        f.area = std::exp(rng.uniform(0.0, std::log(30.0)));
        f.machinery_hours = rng.uniform(5.0, 15.0);
        f.npk_split = {0.6, 0.3, 0.1};
        f.last_inputs = {rng.uniform(40, 160), rng.uniform(0.5, 2.0), rng.uniform(0.05, 0.4), rng.uniform(0.3, 1.2)};
        f.last_price = 280.0;
        farms.push_back(std::move(f));
    }
    return farms;
}

/// Region with linear curves anchored at the market's reference price.
inline market::Region region(std::string id, market::Role role, double supply, double supply_slope, double demand,
                             double demand_slope, std::size_t location = 0) {
    market::Region r;
    r.id = id;
    r.name = std::move(id);
    r.role = role;
    r.base_supply = supply;
    r.supply_slope = supply_slope;
    r.base_demand = demand;
    r.demand_slope = demand_slope;
    r.location = location;
    return r;
}

/// One market holding every region: producers are the sellers, buyers the rest.
inline market::WorldState single_market_world(std::vector<market::Region> regions, double reference_price,
                                              std::vector<std::vector<double>> transport = {{0.0}}) {
    market::WorldState w;
    w.regions = std::move(regions);
    market::Market m;
    m.id = "M";
    m.reference_price = reference_price;
    for (std::size_t i = 0; i < w.regions.size(); ++i) {
        if (w.regions[i].sells()) m.producers.push_back(i);
        if (w.regions[i].buys()) m.buyers.push_back(i);
    }
    w.markets.push_back(m);
    w.transport = std::move(transport);
    w.clearing_order = {0};
    w.italy_region = 0;
    w.italy_market = 0;
    w.price_cap = 1e4;
    w.italy_price_low = 0.0;
    w.italy_price_high = w.price_cap;
    return w;
}

}  // namespace wheatsim::testing
