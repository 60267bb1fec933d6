#include "wheatsim/orchestrator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <thread>

#include "wheatsim/csv.hpp"
#include "wheatsim/error.hpp"

namespace wheatsim::orchestrator {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& value) {
    if (value.empty()) return {};
    std::filesystem::path p(value);
    return p.is_absolute() ? p : base / p;
}

std::set<std::size_t> parse_seasons(const std::string& text, const std::string& where) {
    std::set<std::size_t> out;
    if (text.empty() || text == "all") return out;
    for (const auto& item : csv::split(text)) {
        const auto dash = item.find('-');
        try {
            if (dash == std::string::npos) {
                out.insert(std::stoul(item));
            } else {
                const auto lo = std::stoul(item.substr(0, dash));
                const auto hi = std::stoul(item.substr(dash + 1));
                if (hi < lo) throw Error(ErrorCode::validation, where + ": empty season range '" + item + "'");
                for (auto s = lo; s <= hi; ++s) out.insert(s);
            }
        } catch (const std::logic_error&) {
            throw Error(ErrorCode::validation, where + ": bad season list '" + text + "'");
        }
    }
    return out;
}

template <std::size_t N>
std::array<double, N> number_array(const KeyValueFile::Section& sec, const std::string& key,
                                   const std::array<double, N>& fallback) {
    if (!sec.has(key)) return fallback;
    const auto items = sec.list(key);
    if (items.size() != N) {
        throw Error(ErrorCode::validation, sec.origin + ": '" + key + "' needs " + std::to_string(N) + " values");
    }
    std::array<double, N> out{};
    for (std::size_t i = 0; i < N; ++i) out[i] = csv::parse_double(items[i], sec.lines.at(key), key);
    return out;
}

std::size_t count_of(long long v, const std::string& what) {
    if (v < 0) throw Error(ErrorCode::validation, what + " must be >= 0");
    return static_cast<std::size_t>(v);
}

void require_file(const std::filesystem::path& p, const std::string& what) {
    if (p.empty()) throw Error(ErrorCode::validation, what + " is not set");
    if (!std::filesystem::is_regular_file(p)) throw Error(ErrorCode::io, what + " '" + p.string() + "' does not exist");
}

}  // namespace

ScenarioConfig ScenarioConfig::parse(const KeyValueFile& file, const std::filesystem::path& base_dir) {
    ScenarioConfig c;
    c.source = file.origin();
    const auto& root = file.root();
    c.schema_version = static_cast<int>(root.integer("schema_version"));
    if (c.schema_version != kSchemaVersion) {
        throw Error(ErrorCode::validation, file.origin() + ": unsupported schema_version " + std::to_string(c.schema_version));
    }

    const auto& sc = file.section("scenario");
    c.seed = static_cast<std::uint64_t>(sc.integer_or("seed", 1));
    c.seasons = count_of(sc.integer_or("seasons", 1), "seasons");
    c.workers = static_cast<unsigned>(count_of(sc.integer_or("workers", 1), "workers"));
    c.initial_price = sc.number_or("initial_price", 0.0);
    c.farm_sample_every = count_of(sc.integer_or("farm_sample_every", 1), "farm_sample_every");
    c.represented_farms = count_of(sc.integer_or("represented_farms", 0), "represented_farms");

    const auto& pop = file.section("population");
    c.population_file = resolve(base_dir, pop.get_or("file", ""));
    c.records_file = resolve(base_dir, pop.get_or("records", ""));
    c.clusters = count_of(pop.integer_or("clusters", 6), "clusters");
    c.population_size = count_of(pop.integer_or("size", 0), "population size");
    c.population_seed = static_cast<std::uint64_t>(pop.integer_or("seed", static_cast<long long>(c.seed)));
    c.outlier_z = pop.number_or("outlier_z", 4.0);

    c.world_file = resolve(base_dir, file.section("world").get("file"));

    const auto& lca = file.section("lca");
    c.midpoint_file = resolve(base_dir, lca.get("midpoint"));
    c.endpoint_file = resolve(base_dir, lca.get("endpoint"));
    c.inventory.diesel_l_per_hour = lca.number_or("diesel_l_per_hour", c.inventory.diesel_l_per_hour);

    if (const auto* ag = file.find("agronomy")) {
        auto& cal = c.calibration;
        cal.size_threshold_ha = ag->number_or("size_threshold_ha", cal.size_threshold_ha);
        cal.reference_wheat_price = ag->number_or("reference_wheat_price", 0.0);
        const auto yr = number_array<2>(*ag, "potential_yield", {cal.potential_yield_min, cal.potential_yield_max});
        cal.potential_yield_min = yr[0];
        cal.potential_yield_max = yr[1];
        for (std::size_t k = 0; ag->has("potential_yield." + std::to_string(k)); ++k) {
            cal.cluster_potential_yield.push_back(number_array<2>(*ag, "potential_yield." + std::to_string(k), {}));
        }
        cal.loss_share = number_array<agronomy::kStressKinds>(*ag, "loss_share", cal.loss_share);
        cal.input_price = number_array<agronomy::kStressKinds>(*ag, "input_price", cal.input_price);
        cal.min_response_rate = ag->number_or("min_response_rate", cal.min_response_rate);
        cal.max_response_rate = ag->number_or("max_response_rate", cal.max_response_rate);
        c.shock_sigma = ag->number_or("shock_sigma", c.shock_sigma);
    } else {
        c.calibration.reference_wheat_price = 0.0;
    }

    for (const auto* sec : file.with_prefix("policy")) {
        ScheduledScheme s;
        s.scheme.id = sec->name.substr(std::string("policy.").size());
        s.scheme.kind = policy::parse_scheme_kind(sec->get("kind"));
        if (sec->has("input")) s.scheme.input = agronomy::parse_stress_kind(sec->get("input"));
        s.scheme.rate = sec->number_or("rate", 0.0);
        s.scheme.cap = sec->number_or("cap", s.scheme.cap);
        s.scheme.payment = sec->number_or("payment", 0.0);
        const auto coupled = sec->get_or("coupled", "false");
        if (coupled != "true" && coupled != "false") {
            throw Error(ErrorCode::validation, sec->origin + ": policy " + s.scheme.id + ": coupled must be true or false");
        }
        s.scheme.coupled = coupled == "true";
        s.seasons = parse_seasons(sec->get_or("seasons", "all"), sec->origin + ": policy " + s.scheme.id);
        s.scheme.validate();
        c.policies.push_back(std::move(s));
    }
    for (const auto* sec : file.with_prefix("shock")) {
        SupplyShock s;
        s.season = count_of(sec->integer("season"), "shock season");
        s.region = sec->get("region");
        s.supply_factor = sec->number("supply_factor");
        c.shocks.push_back(std::move(s));
    }
    return c;
}

ScenarioConfig ScenarioConfig::load(const std::filesystem::path& path) {
    auto file = KeyValueFile::load(path);
    auto c = parse(file, path.parent_path());
    c.source = path;
    return c;
}

void ScenarioConfig::validate() const {
    if (schema_version != kSchemaVersion) {
        throw Error(ErrorCode::validation, "unsupported schema_version " + std::to_string(schema_version));
    }
    if (seasons < 1) throw Error(ErrorCode::validation, "seasons must be >= 1");
    if (workers < 1) throw Error(ErrorCode::validation, "workers must be >= 1");
    if (farm_sample_every < 1) throw Error(ErrorCode::validation, "farm_sample_every must be >= 1");
    if (population_file.empty() == records_file.empty()) {
        throw Error(ErrorCode::validation, "population needs exactly one of 'file' or 'records'");
    }
    if (!population_file.empty()) {
        require_file(population_file, "population file");
    } else {
        require_file(records_file, "farm records file");
        if (population_size < 1) throw Error(ErrorCode::validation, "population size must be >= 1");
        if (clusters < 1) throw Error(ErrorCode::validation, "clusters must be >= 1");
        if (!(outlier_z > 0.0)) throw Error(ErrorCode::validation, "outlier_z must be > 0");
    }
    require_file(world_file, "world config");
    require_file(midpoint_file, "midpoint characterization file");
    require_file(endpoint_file, "endpoint characterization file");
    if (!(shock_sigma >= 0.0) || !std::isfinite(shock_sigma)) throw Error(ErrorCode::validation, "shock_sigma must be >= 0");
    if (!(initial_price >= 0.0)) throw Error(ErrorCode::validation, "initial_price must be >= 0");
    const auto& cal = calibration;
    if (!(cal.potential_yield_min > 0.0 && cal.potential_yield_max >= cal.potential_yield_min)) {
        throw Error(ErrorCode::validation, "potential_yield range must be positive and ordered");
    }
    double loss = 0.0;
    for (std::size_t k = 0; k < agronomy::kStressKinds; ++k) {
        if (!(cal.loss_share[k] > 0.0 && cal.loss_share[k] < 1.0)) throw Error(ErrorCode::validation, "loss_share outside (0,1)");
        if (!(cal.input_price[k] > 0.0)) throw Error(ErrorCode::validation, "input_price must be > 0");
        loss += cal.loss_share[k];
    }
    if (!(loss < 1.0)) throw Error(ErrorCode::validation, "loss shares must sum to < 1");
    for (std::size_t i = 0; i < policies.size(); ++i) {
        policies[i].scheme.validate();
        for (std::size_t j = 0; j < i; ++j) {
            if (policies[j].scheme.id == policies[i].scheme.id) {
                throw Error(ErrorCode::validation, "duplicate policy id '" + policies[i].scheme.id + "'");
            }
        }
    }
    for (const auto& s : shocks) {
        if (!(s.supply_factor >= 0.0) || !std::isfinite(s.supply_factor)) {
            throw Error(ErrorCode::validation, "shock supply_factor must be finite and >= 0");
        }
    }
}

std::vector<agronomy::Farm> build_population_farms(const ScenarioConfig& config) {
    population::SyntheticPopulation pop;
    if (!config.population_file.empty()) {
        pop = population::load_population(config.population_file);
    } else {
        const auto records = population::load_farm_records(config.records_file);
        const auto kept = population::remove_outliers(records, config.outlier_z);
        const auto specs = population::cluster(kept, config.clusters, config.population_seed);
        pop = population::synthesize_population(specs, config.population_size, config.population_seed);
    }
    return agronomy::build_farms(pop, config.calibration, config.seed);
}

Simulation::Simulation(ScenarioConfig config) : config_(std::move(config)) {
    config_.validate();
    world_ = market::load_world(config_.world_file);
    matrix_ = lca::CharacterizationMatrix::load(config_.midpoint_file, config_.endpoint_file);
    const double italy_reference = world_.markets[world_.italy_market].reference_price;
    if (config_.calibration.reference_wheat_price <= 0.0) config_.calibration.reference_wheat_price = italy_reference;
    if (config_.initial_price <= 0.0) config_.initial_price = italy_reference;
    for (const auto& s : config_.shocks) {
        if (world_.region_index(s.region) == world_.italy_region) {
            throw Error(ErrorCode::validation, "supply shocks cannot target Italy; its supply comes from the farms");
        }
    }
    farms_ = build_population_farms(config_);
    price_ = config_.initial_price;
}

Simulation::Simulation(ScenarioConfig config, std::vector<agronomy::Farm> farms, market::WorldState world,
                       lca::CharacterizationMatrix matrix)
    : config_(std::move(config)), farms_(std::move(farms)), world_(std::move(world)), matrix_(std::move(matrix)) {
    if (config_.workers < 1) config_.workers = 1;
    if (config_.initial_price <= 0.0) config_.initial_price = world_.markets[world_.italy_market].reference_price;
    price_ = config_.initial_price;
}

template <class Fn>
void Simulation::for_each_partition(Fn&& fn) {
    const std::size_t n = farms_.size();
    const std::size_t w = std::max<std::size_t>(1, std::min<std::size_t>(config_.workers, std::max<std::size_t>(n, 1)));
    if (w == 1) {
        fn(std::size_t{0}, n);
        return;
    }
    std::vector<std::exception_ptr> errors(w);
    {
        std::vector<std::jthread> pool;
        pool.reserve(w);
        for (std::size_t p = 0; p < w; ++p) {
            const std::size_t begin = n * p / w;
            const std::size_t end = n * (p + 1) / w;
            pool.emplace_back([&, p, begin, end] {
                try {
                    fn(begin, end);
                } catch (...) {
                    errors[p] = std::current_exception();
                }
            });
        }
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

market::WorldState Simulation::world_for_season(std::size_t season) const {
    market::WorldState w = world_;
    for (const auto& s : config_.shocks) {
        if (s.season == season) w.regions[w.region_index(s.region)].base_supply *= s.supply_factor;
    }
    return w;
}

SeasonResult Simulation::run_season(std::size_t season) {
    SeasonResult res;
    res.season = season;
    res.decision_price = price_;

    // (1) coordinator broadcasts price and the schemes in force
    auto t0 = Clock::now();
    std::vector<policy::PolicyScheme> active;
    for (const auto& s : config_.policies) {
        if (s.active_in(season)) active.push_back(s.scheme);
    }
    std::vector<const policy::PolicyScheme*> voluntary;
    for (const auto& s : active) {
        if (s.voluntary()) voluntary.push_back(&s);
    }
    const double price = price_;
    const agronomy::ShockParams shock{config_.shock_sigma, config_.seed};
    season_.assign(farms_.size(), FarmSeason{});
    res.timing.distribute = seconds_since(t0);

    // (2) adoption, decision and realization per farm
    t0 = Clock::now();
    for_each_partition([&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            auto& farm = farms_[i];
            auto& out = season_[i];
            try {
                for (const auto* s : voluntary) {
                    if (policy::decide_adoption(farm, *s, active, price, out.adopted)) out.adopted.push_back(s->id);
                }
                const auto env = policy::apply_policy(farm, active, price, out.adopted);
                out.decision = agronomy::decide(farm, env);
                out.outcome = agronomy::realize_yield(out.decision, farm, env, shock, season);
                if (!std::isfinite(out.outcome.production) || !std::isfinite(out.decision.expected_profit)) {
                    throw Error(ErrorCode::numerical, "non-finite decision or outcome");
                }
                farm.last_inputs = out.decision.inputs;
                farm.last_price = price;
                farm.adopted_schemes = out.adopted;
            } catch (const Error& e) {
                throw Error(e.code(), "season " + std::to_string(season) + ", farm " + std::to_string(farm.id) + ": " + e.what());
            }
        }
    });
    res.timing.decide = seconds_since(t0);

    // (3) per-farm inventory and characterization
    t0 = Clock::now();
    for_each_partition([&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            auto& out = season_[i];
            try {
                out.inventory = lca::build_inventory(farms_[i], out.decision, out.outcome, config_.inventory);
                out.impacts = lca::characterize(out.inventory, matrix_);
            } catch (const Error& e) {
                throw Error(e.code(), "season " + std::to_string(season) + ", farm " + std::to_string(farms_[i].id) + ": " + e.what());
            }
        }
    });
    res.timing.lca = seconds_since(t0);

    // (4) deterministic reductions in farm-id order
    t0 = Clock::now();
    std::vector<lca::ImpactResult> impacts;
    std::vector<lca::Inventory> inventories;
    std::vector<double> production;
    impacts.reserve(farms_.size());
    inventories.reserve(farms_.size());
    production.reserve(farms_.size());
    double gap = 0.0;
    std::size_t unconverged = 0;
    std::vector<std::size_t> adoption(voluntary.size(), 0);
    for (std::size_t i = 0; i < farms_.size(); ++i) {
        const auto& out = season_[i];
        impacts.push_back(out.impacts);
        inventories.push_back(out.inventory);
        production.push_back(out.outcome.production);
        gap += out.outcome.yield_gap;
        if (farms_[i].behavior == agronomy::Behavior::optimizer) ++res.optimizer_farms;
        if (!out.decision.converged) ++unconverged;
        for (std::size_t v = 0; v < voluntary.size(); ++v) {
            if (std::find(out.adopted.begin(), out.adopted.end(), voluntary[v]->id) != out.adopted.end()) ++adoption[v];
        }
    }
    res.national = lca::aggregate_national(impacts, farms_, production, inventories);
    res.production = res.national.production;
    res.area = res.national.area;
    res.mean_yield_gap = farms_.empty() ? 0.0 : gap / static_cast<double>(farms_.size());
    for (const auto& s : config_.policies) {
        if (!s.scheme.voluntary()) continue;
        std::size_t count = 0;
        for (std::size_t v = 0; v < voluntary.size(); ++v) {
            if (voluntary[v]->id == s.scheme.id) count = adoption[v];
        }
        res.adoption_counts.emplace_back(s.scheme.id, count);
    }
    if (unconverged) res.flags.push_back(std::to_string(unconverged) + " optimizer decisions did not converge");
    res.timing.reduce = seconds_since(t0);

    // (5) market round with this season's national production
    t0 = Clock::now();
    const auto world = world_for_season(season);
    double market_supply = res.production;
    if (config_.represented_farms > 0 && config_.represented_farms != farms_.size()) {
        market_supply *= static_cast<double>(config_.represented_farms) / static_cast<double>(farms_.size());
    }
    round_ = market::run_market_round(world, market_supply);
    for (const auto& s : round_.sessions) {
        res.market_prices.push_back(s.price);
        if (s.status != market::SessionStatus::cleared) {
            res.flags.push_back("market " + world.markets[s.market].id + " " + market::to_string(s.status));
        }
    }
    const auto ip = market::italy_price(round_, price_);
    res.market_price = ip.price;
    res.price_fallback = ip.fallback;
    if (ip.fallback) res.flags.push_back("Italy market skipped; previous price carried over");
    if (ip.price < world_.italy_price_low || ip.price > world_.italy_price_high) {
        res.flags.push_back("Italy price outside reference band");
    }
    res.italy_net_imports = round_.net_imports(world_.italy_region);
    price_ = ip.price;
    res.timing.market = seconds_since(t0);
    return res;
}

std::vector<std::string> seasons_header(const Simulation& sim) {
    std::vector<std::string> h{"season",      "decision_price", "market_price",       "price_fallback",
                               "production_t", "area_ha",       "mean_yield_gap_t_ha", "italy_net_imports_t",
                               "optimizer_farms"};
    for (const auto& p : sim.config().policies) {
        if (p.scheme.voluntary()) h.push_back("adopt_" + p.scheme.id);
    }
    for (auto f : lca::kFlowNames) h.push_back("flow_" + std::string(f));
    for (const auto& c : sim.matrix().categories()) h.push_back("mid_" + c);
    for (auto e : lca::kEndpointNames) h.push_back("end_" + std::string(e));
    for (const auto& m : sim.world().markets) h.push_back("price_" + m.id);
    h.push_back("flags");
    return h;
}

std::vector<std::string> seasons_row(const Simulation&, const SeasonResult& r) {
    std::vector<std::string> row{std::to_string(r.season),
                                 csv::format(r.decision_price),
                                 csv::format(r.market_price),
                                 r.price_fallback ? "1" : "0",
                                 csv::format(r.production),
                                 csv::format(r.area),
                                 csv::format(r.mean_yield_gap),
                                 csv::format(r.italy_net_imports),
                                 std::to_string(r.optimizer_farms)};
    for (const auto& [id, n] : r.adoption_counts) row.push_back(std::to_string(n));
    for (double v : r.national.flow_totals) row.push_back(csv::format(v));
    for (double v : r.national.totals.midpoints) row.push_back(csv::format(v));
    for (double v : r.national.totals.endpoints) row.push_back(csv::format(v));
    for (double v : r.market_prices) row.push_back(csv::format(v));
    row.push_back(std::to_string(r.flags.size()));
    return row;
}

namespace {

std::ofstream open_export(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io, "cannot write '" + path.string() + "'");
    return out;
}

void write_farms(const std::filesystem::path& path, const Simulation& sim, std::size_t sample_every) {
    auto out = open_export(path);
    csv::write_row(out, {"farm_id", "cluster_id", "behavior", "area_ha", "potential_yield", "x_nutrition", "x_weeds",
                         "x_pests", "x_fungi", "target_yield", "expected_profit_per_ha", "actual_yield", "yield_gap",
                         "production_t", "realized_profit", "adopted"});
    const auto& farms = sim.farms();
    const auto& season = sim.last_season();
    std::vector<std::string> row;
    for (std::size_t i = 0; i < farms.size(); i += sample_every) {
        const auto& f = farms[i];
        const auto& s = season[i];
        row = {std::to_string(f.id), std::to_string(f.cluster_id),
               f.behavior == agronomy::Behavior::optimizer ? "optimizer" : "rule_based", csv::format(f.area),
               csv::format(f.potential_yield)};
        std::array<double, agronomy::kStressKinds> x{};
        for (std::size_t k = 0; k < f.stress_factors.size(); ++k) {
            x[static_cast<std::size_t>(f.stress_factors[k].kind)] = s.decision.inputs[k];
        }
        for (double v : x) row.push_back(csv::format(v));
        row.push_back(csv::format(s.decision.target_yield));
        row.push_back(csv::format(s.decision.expected_profit));
        row.push_back(csv::format(s.outcome.actual_yield));
        row.push_back(csv::format(s.outcome.yield_gap));
        row.push_back(csv::format(s.outcome.production));
        row.push_back(csv::format(s.outcome.realized_profit));
        std::string adopted;
        for (const auto& a : s.adopted) adopted += (adopted.empty() ? "" : ";") + a;
        row.push_back(adopted);
        csv::write_row(out, row);
    }
    if (!out) throw Error(ErrorCode::io, "write failed for '" + path.string() + "'");
}

void write_impacts(const std::filesystem::path& path, const Simulation& sim, std::size_t sample_every) {
    auto out = open_export(path);
    csv::write_row(out, lca::impact_header(sim.matrix()));
    const auto& season = sim.last_season();
    for (std::size_t i = 0; i < season.size(); i += sample_every) {
        csv::write_row(out, lca::impact_row(season[i].impacts, season[i].outcome.actual_yield));
    }
    if (!out) throw Error(ErrorCode::io, "write failed for '" + path.string() + "'");
}

}  // namespace

RunSummary run_scenario(const ScenarioConfig& config, const std::filesystem::path& out_dir,
                        const SeasonCallback& on_season) {
    const auto start = Clock::now();
    Simulation sim(config);
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw Error(ErrorCode::io, "cannot create output directory '" + out_dir.string() + "': " + ec.message());

    RunSummary summary;
    summary.farms = sim.farms().size();
    auto seasons_csv = open_export(out_dir / "seasons.csv");
    csv::write_row(seasons_csv, seasons_header(sim));
    for (std::size_t s = 0; s < sim.config().seasons; ++s) {
        auto result = sim.run_season(s);
        csv::write_row(seasons_csv, seasons_row(sim, result));
        const auto tag = std::to_string(s);
        write_farms(out_dir / ("farms_" + tag + ".csv"), sim, sim.config().farm_sample_every);
        write_impacts(out_dir / ("impacts_" + tag + ".csv"), sim, sim.config().farm_sample_every);
        {
            auto markets = open_export(out_dir / ("markets_" + tag + ".csv"));
            market::write_report(markets, sim.last_round(), sim.world());
        }
        if (on_season) on_season(result);
        summary.seasons.push_back(std::move(result));
    }
    seasons_csv.flush();
    if (!seasons_csv) throw Error(ErrorCode::io, "write failed for seasons.csv");
    summary.wall_seconds = seconds_since(start);
    return summary;
}

}  // namespace wheatsim::orchestrator
