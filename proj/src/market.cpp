#include "wheatsim/market.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "wheatsim/csv.hpp"
#include "wheatsim/error.hpp"

namespace wheatsim::market {

namespace {

Role parse_role(const std::string& s, const std::string& where) {
    if (s == "producer") return Role::producer;
    if (s == "buyer") return Role::buyer;
    if (s == "both") return Role::both;
    throw Error(ErrorCode::validation, where + ": unknown role '" + s + "'");
}

/// Neumaier-compensated running sum.
class Accumulator {
  public:
    void add(double v) {
        const double t = sum_ + v;
        comp_ += std::abs(sum_) >= std::abs(v) ? (sum_ - t) + v : (v - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

}  // namespace

const char* to_string(SessionStatus status) {
    switch (status) {
        case SessionStatus::cleared: return "cleared";
        case SessionStatus::excess_supply: return "excess_supply";
        case SessionStatus::no_demand: return "no_demand";
        case SessionStatus::skipped: return "skipped";
    }
    return "unknown";
}

std::size_t WorldState::region_index(const std::string& id) const {
    for (std::size_t i = 0; i < regions.size(); ++i) {
        if (regions[i].id == id) return i;
    }
    throw Error(ErrorCode::validation, "unknown region '" + id + "'");
}

std::size_t WorldState::market_index(const std::string& id) const {
    for (std::size_t i = 0; i < markets.size(); ++i) {
        if (markets[i].id == id) return i;
    }
    throw Error(ErrorCode::validation, "unknown market '" + id + "'");
}

double WorldState::supply_share(std::size_t region) const {
    std::size_t n = 0;
    for (const auto& m : markets) n += static_cast<std::size_t>(std::count(m.producers.begin(), m.producers.end(), region));
    return n ? 1.0 / static_cast<double>(n) : 0.0;
}

double WorldState::demand_share(std::size_t region) const {
    std::size_t n = 0;
    for (const auto& m : markets) n += static_cast<std::size_t>(std::count(m.buyers.begin(), m.buyers.end(), region));
    return n ? 1.0 / static_cast<double>(n) : 0.0;
}

double WorldState::transport_rate(const Market& market, std::size_t buyer) const {
    if (market.producers.empty()) return 0.0;
    double sum = 0.0;
    for (auto p : market.producers) sum += transport[regions[p].location][regions[buyer].location];
    return sum / static_cast<double>(market.producers.size());
}

void WorldState::validate() const {
    if (regions.empty() || markets.empty()) throw Error(ErrorCode::validation, "world has no regions or markets");
    for (const auto& r : regions) {
        const auto where = "region " + r.id;
        if (!(r.base_supply >= 0.0 && r.base_demand >= 0.0)) {
            throw Error(ErrorCode::validation, where + ": base quantities must be >= 0");
        }
        if (!(r.supply_slope >= 0.0)) throw Error(ErrorCode::validation, where + ": supply_slope must be >= 0");
        if (!(r.demand_slope <= 0.0)) throw Error(ErrorCode::validation, where + ": demand_slope must be <= 0");
        if (r.location >= transport.size()) throw Error(ErrorCode::validation, where + ": location outside transport matrix");
    }
    for (const auto& row : transport) {
        if (row.size() != transport.size()) throw Error(ErrorCode::validation, "transport matrix is not square");
        for (double t : row) {
            if (!(t >= 0.0) || !std::isfinite(t)) throw Error(ErrorCode::validation, "transport costs must be finite and >= 0");
        }
    }
    for (const auto& m : markets) {
        if (!(m.reference_price > 0.0)) throw Error(ErrorCode::validation, "market " + m.id + ": reference_price must be > 0");
        for (auto p : m.producers) {
            if (!regions.at(p).sells()) {
                throw Error(ErrorCode::validation, "market " + m.id + ": region " + regions[p].id + " is not a producer");
            }
        }
        for (auto b : m.buyers) {
            if (!regions.at(b).buys()) {
                throw Error(ErrorCode::validation, "market " + m.id + ": region " + regions[b].id + " is not a buyer");
            }
        }
    }
    for (std::size_t i = 0; i < regions.size(); ++i) {
        if (regions[i].sells() && supply_share(i) == 0.0) {
            throw Error(ErrorCode::validation, "producer " + regions[i].id + " participates in no market");
        }
        if (regions[i].buys() && demand_share(i) == 0.0) {
            throw Error(ErrorCode::validation, "buyer " + regions[i].id + " participates in no market");
        }
    }
    auto order = clearing_order;
    std::sort(order.begin(), order.end());
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (order[i] != i || order.size() != markets.size()) {
            throw Error(ErrorCode::validation, "clearing_order must list every market exactly once");
        }
    }
    if (italy_region >= regions.size() || italy_market >= markets.size()) {
        throw Error(ErrorCode::validation, "Italy region or market not set");
    }
    if (!(price_cap > 0.0)) throw Error(ErrorCode::validation, "price_cap must be > 0");
}

WorldState build_world(const KeyValueFile& config) {
    WorldState w;
    const auto& root = config.root();

    for (const auto* sec : config.with_prefix("region")) {
        Region r;
        r.id = sec->name.substr(std::string("region.").size());
        r.name = sec->get_or("name", r.id);
        r.role = parse_role(sec->get_or("role", "both"), "region " + r.id);
        r.base_supply = sec->number_or("base_supply", 0.0);
        r.base_demand = sec->number_or("base_demand", 0.0);
        r.supply_slope = sec->number_or("supply_slope", 0.0);
        r.demand_slope = sec->number_or("demand_slope", 0.0);
        const auto loc = sec->integer_or("location", 0);
        if (loc < 0) throw Error(ErrorCode::validation, "region " + r.id + ": negative location");
        r.location = static_cast<std::size_t>(loc);
        w.regions.push_back(std::move(r));
    }

    const double default_reference = root.number_or("reference_price", 250.0);
    for (const auto* sec : config.with_prefix("market")) {
        Market m;
        m.id = sec->name.substr(std::string("market.").size());
        m.reference_price = sec->number_or("reference_price", default_reference);
        for (const auto& id : sec->list("producers")) {
            try {
                m.producers.push_back(w.region_index(id));
            } catch (const Error&) {
                throw Error(ErrorCode::validation, "market " + m.id + " references unknown region '" + id + "'");
            }
        }
        if (sec->has("buyers")) {
            for (const auto& id : sec->list("buyers")) {
                try {
                    m.buyers.push_back(w.region_index(id));
                } catch (const Error&) {
                    throw Error(ErrorCode::validation, "market " + m.id + " references unknown region '" + id + "'");
                }
            }
        }
        w.markets.push_back(std::move(m));
    }

    if (const auto* tr = config.find("transport")) {
        const auto n = static_cast<std::size_t>(tr->integer("locations"));
        w.transport.assign(n, std::vector<double>(n, 0.0));
        for (std::size_t i = 0; i < n; ++i) {
            const auto key = "from." + std::to_string(i);
            if (!tr->has(key)) continue;
            const auto row = tr->list(key);
            if (row.size() != n) {
                throw Error(ErrorCode::validation, "transport row " + key + " must have " + std::to_string(n) + " entries");
            }
            for (std::size_t j = 0; j < n; ++j) w.transport[i][j] = csv::parse_double(row[j], tr->lines.at(key), key);
        }
    } else {
        w.transport.assign(1, std::vector<double>(1, 0.0));
    }

    if (root.has("clearing_order")) {
        for (const auto& id : root.list("clearing_order")) w.clearing_order.push_back(w.market_index(id));
    } else {
        for (std::size_t i = 0; i < w.markets.size(); ++i) w.clearing_order.push_back(i);
    }
    w.italy_region = w.region_index(root.get_or("italy_region", "ITA"));
    w.italy_market = w.market_index(root.get("italy_market"));
    w.price_cap = root.number_or("price_cap", 10000.0);
    if (root.has("italy_price_band")) {
        const auto band = root.list("italy_price_band");
        if (band.size() != 2) throw Error(ErrorCode::validation, "italy_price_band needs two values");
        w.italy_price_low = csv::parse_double(band[0], root.lines.at("italy_price_band"), "italy_price_band");
        w.italy_price_high = csv::parse_double(band[1], root.lines.at("italy_price_band"), "italy_price_band");
    } else {
        w.italy_price_low = 0.0;
        w.italy_price_high = w.price_cap;
    }

    if (root.has("expected_regions") && static_cast<long long>(w.regions.size()) != root.integer("expected_regions")) {
        throw Error(ErrorCode::validation, "world defines " + std::to_string(w.regions.size()) + " regions, expected " +
                                               root.get("expected_regions"));
    }
    if (root.has("expected_markets") && static_cast<long long>(w.markets.size()) != root.integer("expected_markets")) {
        throw Error(ErrorCode::validation, "world defines " + std::to_string(w.markets.size()) + " markets, expected " +
                                               root.get("expected_markets"));
    }
    w.validate();
    return w;
}

WorldState load_world(const std::filesystem::path& path) { return build_world(KeyValueFile::load(path)); }

double CurveComponent::at(double price) const {
    return share * std::max(0.0, base + slope * (price + shift - anchor));
}

double AggregateCurve::operator()(double price) const {
    double q = 0.0;
    for (const auto& p : parts) q += p.at(price);
    return q;
}

MarketCurves aggregate_curves(const Market& market, const WorldState& world) {
    MarketCurves c;
    for (auto p : market.producers) {
        const auto& r = world.regions[p];
        c.supply.parts.push_back({p, r.base_supply, r.supply_slope, world.supply_share(p), 0.0, market.reference_price});
    }
    for (auto b : market.buyers) {
        const auto& r = world.regions[b];
        c.demand.parts.push_back({b, r.base_demand, r.demand_slope, world.demand_share(b),
                                  world.transport_rate(market, b), market.reference_price});
    }
    return c;
}

SessionResult clear_session(const Market& market, const WorldState& world, std::size_t market_index) {
    const auto curves = aggregate_curves(market, world);
    SessionResult res;
    res.market = market_index;

    const double demand_at_zero = curves.demand(0.0);
    if (!(demand_at_zero > 0.0)) {
        res.status = SessionStatus::no_demand;
        return res;
    }
    auto excess = [&](double p) { return curves.demand(p) - curves.supply(p); };

    double price = 0.0;
    if (excess(0.0) <= 0.0) {
        res.status = SessionStatus::excess_supply;
    } else if (excess(world.price_cap) > 0.0) {
        res.status = SessionStatus::skipped;
        return res;
    } else {
        // Excess demand is non-increasing in price; keep excess(lo) > 0 >= excess(hi).
        double lo = 0.0;
        double hi = world.price_cap;
        for (int it = 0; it < 400 && hi - lo > 1e-13 * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            (excess(mid) > 0.0 ? lo : hi) = mid;
        }
        price = hi;
        res.status = SessionStatus::cleared;
    }

    const double supply = curves.supply(price);
    const double demand = curves.demand(price);
    res.price = price;
    res.quantity = std::min(supply, demand);
    if (!(res.quantity > 0.0)) return res;

    for (const auto& sp : curves.supply.parts) {
        const double s = sp.at(price);
        if (!(s > 0.0)) continue;
        for (const auto& dp : curves.demand.parts) {
            const double d = dp.at(price);
            if (!(d > 0.0)) continue;
            Deal deal;
            deal.producer = sp.region;
            deal.buyer = dp.region;
            deal.price = price;
            deal.quantity = res.quantity * (s / supply) * (d / demand);
            deal.transport_rate = dp.shift;
            deal.transport_cost = deal.transport_rate * deal.quantity;
            res.deals.push_back(deal);
        }
    }
    return res;
}

RoundResult run_market_round(const WorldState& world, double italian_production) {
    if (!(italian_production >= 0.0) || !std::isfinite(italian_production)) {
        throw Error(ErrorCode::invalid_argument, "italian production must be finite and >= 0");
    }
    WorldState season = world;
    season.regions[world.italy_region].base_supply = italian_production;

    RoundResult round;
    round.italy_market = world.italy_market;
    round.sessions.resize(world.markets.size());
    std::vector<Accumulator> sold(world.regions.size());
    std::vector<Accumulator> bought(world.regions.size());
    for (auto m : world.clearing_order) {
        round.sessions[m] = clear_session(season.markets[m], season, m);
        for (const auto& d : round.sessions[m].deals) {
            sold[d.producer].add(d.quantity);
            bought[d.buyer].add(d.quantity);
        }
    }
    for (std::size_t r = 0; r < world.regions.size(); ++r) {
        round.sold.push_back(sold[r].value());
        round.bought.push_back(bought[r].value());
    }
    return round;
}

ItalyPrice italy_price(const RoundResult& round, double previous_price) {
    const auto& s = round.sessions.at(round.italy_market);
    if (s.status == SessionStatus::skipped || s.status == SessionStatus::no_demand) return {previous_price, true};
    return {s.price, false};
}

void write_report(std::ostream& out, const RoundResult& round, const WorldState& world) {
    csv::write_row(out, {"record", "market", "status", "producer", "buyer", "price", "quantity", "transport_rate",
                         "transport_cost"});
    for (auto m : world.clearing_order) {
        const auto& s = round.sessions[m];
        const auto& id = world.markets[m].id;
        csv::write_row(out, {"market", id, to_string(s.status), "", "", csv::format(s.price), csv::format(s.quantity), "", ""});
        for (const auto& d : s.deals) {
            csv::write_row(out, {"deal", id, "", world.regions[d.producer].id, world.regions[d.buyer].id,
                                 csv::format(d.price), csv::format(d.quantity), csv::format(d.transport_rate),
                                 csv::format(d.transport_cost)});
        }
    }
}

}  // namespace wheatsim::market
