#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "wheatsim/keyvalue.hpp"

namespace wheatsim::market {

enum class Role { producer, buyer, both };

/// A regional agent with linear supply and demand, anchored at the reference
/// price of whichever market it trades in.
struct Region {
    std::string id;
    std::string name;
    Role role = Role::both;
    double base_supply = 0.0;   // t at reference price
    double base_demand = 0.0;   // t at reference price
    double supply_slope = 0.0;  // t per currency unit, >= 0
    double demand_slope = 0.0;  // t per currency unit, <= 0
    std::size_t location = 0;

    bool sells() const { return role != Role::buyer; }
    bool buys() const { return role != Role::producer; }
};

struct Market {
    std::string id;
    std::vector<std::size_t> producers;  // region indices
    std::vector<std::size_t> buyers;
    double reference_price = 0.0;
};

struct WorldState {
    std::vector<Region> regions;
    std::vector<Market> markets;
    std::vector<std::vector<double>> transport;  // location x location, currency/t
    std::vector<std::size_t> clearing_order;     // market indices
    std::size_t italy_region = 0;
    std::size_t italy_market = 0;
    double price_cap = 0.0;
    double italy_price_low = 0.0;  // reference band for the Italy market price
    double italy_price_high = 0.0;

    std::size_t region_index(const std::string& id) const;
    std::size_t market_index(const std::string& id) const;
    /// Share of a region's curve offered in each market it sells in.
    double supply_share(std::size_t region) const;
    double demand_share(std::size_t region) const;
    /// Rate a buyer pays to ship from the market's producers: the mean of the
    /// pairwise transport costs.
    double transport_rate(const Market& market, std::size_t buyer) const;
    void validate() const;
};

WorldState build_world(const KeyValueFile& config);
WorldState load_world(const std::filesystem::path& path);

/// One member's linear curve inside a market: share * max(0, base + slope * (p + shift - anchor)).
struct CurveComponent {
    std::size_t region = 0;
    double base = 0.0;
    double slope = 0.0;
    double share = 1.0;
    double shift = 0.0;
    double anchor = 0.0;

    double at(double price) const;
};

struct AggregateCurve {
    std::vector<CurveComponent> parts;
    double operator()(double price) const;
};

struct MarketCurves {
    AggregateCurve supply;
    AggregateCurve demand;  // already shifted by each buyer's transport rate
};

MarketCurves aggregate_curves(const Market& market, const WorldState& world);

struct Deal {
    std::size_t producer = 0;
    std::size_t buyer = 0;
    double price = 0.0;
    double quantity = 0.0;
    double transport_rate = 0.0;
    double transport_cost = 0.0;  // paid by the buyer
};

enum class SessionStatus {
    cleared,
    excess_supply,  // supply exceeds demand even at price 0; buyers served in full
    no_demand,
    skipped,        // demand exceeds supply up to the price cap
};
const char* to_string(SessionStatus status);

struct SessionResult {
    std::size_t market = 0;
    SessionStatus status = SessionStatus::cleared;
    double price = 0.0;
    double quantity = 0.0;
    std::vector<Deal> deals;
};

inline constexpr double kPriceTolerance = 1e-6;

/// Intersects the aggregate curves by bisection on [0, price_cap] and splits
/// the traded quantity pro rata over active producers and buyers.
SessionResult clear_session(const Market& market, const WorldState& world, std::size_t market_index);

struct RoundResult {
    std::vector<SessionResult> sessions;  // indexed by market
    std::vector<double> sold;             // per region, t
    std::vector<double> bought;           // per region, t
    std::size_t italy_market = 0;

    double net_imports(std::size_t region) const { return bought[region] - sold[region]; }
};

/// Clears every market in the configured order, with Italy's base supply
/// replaced by `italian_production`.
RoundResult run_market_round(const WorldState& world, double italian_production);

struct ItalyPrice {
    double price = 0.0;
    bool fallback = false;
};

/// Clearing price of Italy's reference market, or `previous_price` (flagged)
/// when that market was skipped.
ItalyPrice italy_price(const RoundResult& round, double previous_price);

/// Market report: one `market` row per session followed by its `deal` rows.
void write_report(std::ostream& out, const RoundResult& round, const WorldState& world);

}  // namespace wheatsim::market
