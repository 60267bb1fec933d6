#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "wheatsim/agronomy.hpp"
#include "wheatsim/lca.hpp"
#include "wheatsim/market.hpp"
#include "wheatsim/policy.hpp"
#include "wheatsim/population.hpp"

namespace wheatsim::orchestrator {

inline constexpr int kSchemaVersion = 1;

struct ScheduledScheme {
    policy::PolicyScheme scheme;
    std::set<std::size_t> seasons;  // empty = every season
    bool active_in(std::size_t season) const { return seasons.empty() || seasons.count(season) != 0; }
};

/// Exogenous multiplier on a non-Italy region's base supply in one season.
struct SupplyShock {
    std::size_t season = 0;
    std::string region;
    double supply_factor = 1.0;
};

struct ScenarioConfig {
    std::filesystem::path source;  // the config file itself, for messages
    int schema_version = kSchemaVersion;
    std::uint64_t seed = 1;
    std::size_t seasons = 1;
    unsigned workers = 1;

    // Population: either a synthetic population export, or survey records to
    // cluster and scale.
    std::filesystem::path population_file;
    std::filesystem::path records_file;
    std::size_t clusters = 6;
    std::size_t population_size = 0;
    std::uint64_t population_seed = 1;
    double outlier_z = 4.0;

    std::filesystem::path world_file;
    std::filesystem::path midpoint_file;
    std::filesystem::path endpoint_file;

    agronomy::Calibration calibration;
    double shock_sigma = 0.10;
    lca::InventoryCoefficients inventory;
    double initial_price = 0.0;  // 0 = reference price of Italy's market

    std::vector<ScheduledScheme> policies;
    std::vector<SupplyShock> shocks;
    std::size_t farm_sample_every = 1;  // write every n-th farm to farms_/impacts_ exports
    // Farms the population stands for on the market; Italian supply is scaled
    // by represented_farms / farm count. 0 = the population itself.
    std::size_t represented_farms = 0;

    static ScenarioConfig load(const std::filesystem::path& path);
    static ScenarioConfig parse(const KeyValueFile& file, const std::filesystem::path& base_dir);
    /// Checks invariants and that every referenced file exists.
    void validate() const;
};

/// Per-farm state produced by one season.
struct FarmSeason {
    agronomy::Decision decision;
    agronomy::Outcome outcome;
    lca::Inventory inventory;
    lca::ImpactResult impacts;  // per hectare
    std::vector<std::string> adopted;
};

struct PhaseTiming {
    double distribute = 0.0;
    double decide = 0.0;
    double lca = 0.0;
    double reduce = 0.0;
    double market = 0.0;
    double total() const { return distribute + decide + lca + reduce + market; }
};

struct SeasonResult {
    std::size_t season = 0;
    double decision_price = 0.0;  // Italy price farms decided on
    double market_price = 0.0;    // Italy price after this season's clearing
    bool price_fallback = false;
    double production = 0.0;  // t
    double area = 0.0;        // ha
    double mean_yield_gap = 0.0;
    double italy_net_imports = 0.0;
    std::size_t optimizer_farms = 0;
    std::vector<std::pair<std::string, std::size_t>> adoption_counts;
    lca::NationalImpact national;
    std::vector<double> market_prices;
    std::vector<std::string> flags;
    PhaseTiming timing;  // never exported
};

/// Coordinator state of a scenario. Farms are partitioned into contiguous id
/// ranges, one per worker; per-farm work runs in parallel, every reduction
/// runs on the coordinator in farm-id order, so results do not depend on the
/// worker count.
class Simulation {
  public:
    explicit Simulation(ScenarioConfig config);

    /// Builds a simulation from in-memory parts (tests, embedding).
    Simulation(ScenarioConfig config, std::vector<agronomy::Farm> farms, market::WorldState world,
               lca::CharacterizationMatrix matrix);

    SeasonResult run_season(std::size_t season);

    const ScenarioConfig& config() const { return config_; }
    const std::vector<agronomy::Farm>& farms() const { return farms_; }
    const std::vector<FarmSeason>& last_season() const { return season_; }
    const market::WorldState& world() const { return world_; }
    const market::RoundResult& last_round() const { return round_; }
    const lca::CharacterizationMatrix& matrix() const { return matrix_; }
    double current_price() const { return price_; }
    void set_current_price(double price) { price_ = price; }
    void set_workers(unsigned workers) { config_.workers = workers; }

  private:
    template <class Fn>
    void for_each_partition(Fn&& fn);
    market::WorldState world_for_season(std::size_t season) const;

    ScenarioConfig config_;
    std::vector<agronomy::Farm> farms_;
    market::WorldState world_;
    lca::CharacterizationMatrix matrix_;
    std::vector<FarmSeason> season_;
    market::RoundResult round_;
    double price_ = 0.0;
};

std::vector<agronomy::Farm> build_population_farms(const ScenarioConfig& config);

struct RunSummary {
    std::vector<SeasonResult> seasons;
    double wall_seconds = 0.0;
    std::size_t farms = 0;
};

using SeasonCallback = std::function<void(const SeasonResult&)>;

/// Runs every season and writes seasons.csv plus farms_<s>.csv,
/// impacts_<s>.csv and markets_<s>.csv under `out_dir`.
RunSummary run_scenario(const ScenarioConfig& config, const std::filesystem::path& out_dir,
                        const SeasonCallback& on_season = {});

std::vector<std::string> seasons_header(const Simulation& sim);
std::vector<std::string> seasons_row(const Simulation& sim, const SeasonResult& result);

}  // namespace wheatsim::orchestrator
