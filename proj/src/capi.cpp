#include "wheatsim/wheatsim.h"

#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <map>
#include <new>
#include <optional>
#include <string>

#include "wheatsim/diff.hpp"
#include "wheatsim/error.hpp"
#include "wheatsim/orchestrator.hpp"
#include "wheatsim/population.hpp"

struct ws_population {
    wheatsim::population::SyntheticPopulation population;
    std::vector<wheatsim::population::ClusterSpec> specs;
    std::size_t records_used = 0;
};

struct ws_scenario {
    wheatsim::orchestrator::ScenarioConfig config;
    std::optional<wheatsim::orchestrator::RunSummary> last_run;
};

namespace {

thread_local std::string g_last_error;

ws_status fail(ws_status status, std::string message) {
    g_last_error = std::move(message);
    return status;
}

/// Runs `fn`, translating exceptions into status codes.
template <class Fn>
ws_status guarded(Fn&& fn) noexcept {
    try {
        g_last_error.clear();
        fn();
        return WS_OK;
    } catch (const wheatsim::Error& e) {
        return fail(static_cast<ws_status>(e.code()), e.what());
    } catch (const std::bad_alloc&) {
        return fail(WS_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(WS_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(WS_ERR_INTERNAL, "unknown error");
    }
}

void fill_summary(const wheatsim::orchestrator::SeasonResult& r, ws_season_summary* out) {
    out->season = r.season;
    out->decision_price = r.decision_price;
    out->market_price = r.market_price;
    out->production_t = r.production;
    out->mean_yield_gap = r.mean_yield_gap;
    out->italy_net_imports_t = r.italy_net_imports;
    for (std::size_t e = 0; e < 3; ++e) out->endpoints[e] = r.national.totals.endpoints[e];
    out->flag_count = r.flags.size();
    out->seconds = r.timing.total();
    out->phase_seconds[0] = r.timing.distribute;
    out->phase_seconds[1] = r.timing.decide;
    out->phase_seconds[2] = r.timing.lca;
    out->phase_seconds[3] = r.timing.reduce;
    out->phase_seconds[4] = r.timing.market;
}

}  // namespace

extern "C" {

const char* ws_version(void) { return WHEATSIM_VERSION; }

const char* ws_last_error(void) { return g_last_error.c_str(); }

const char* ws_status_name(ws_status status) {
    switch (status) {
        case WS_OK: return "ok";
        case WS_ERR_INVALID_ARGUMENT: return "invalid argument";
        case WS_ERR_IO: return "i/o error";
        case WS_ERR_PARSE: return "parse error";
        case WS_ERR_VALIDATION: return "validation error";
        case WS_ERR_NUMERICAL: return "numerical error";
        case WS_ERR_MARKET: return "market error";
        case WS_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

ws_status ws_population_generate(const char* records_csv, size_t clusters, size_t size, uint64_t seed,
                                 double outlier_z, ws_population** out) {
    if (!records_csv || !out) return fail(WS_ERR_INVALID_ARGUMENT, "null argument");
    *out = nullptr;
    if (size == 0) return fail(WS_ERR_INVALID_ARGUMENT, "population size must be >= 1");
    return guarded([&] {
        namespace pop = wheatsim::population;
        auto handle = std::make_unique<ws_population>();
        const auto records = pop::load_farm_records(records_csv);
        const auto kept = pop::remove_outliers(records, outlier_z);
        handle->records_used = kept.size();
        handle->specs = pop::cluster(kept, clusters, seed);
        handle->population = pop::synthesize_population(handle->specs, size, seed);
        *out = handle.release();
    });
}

ws_status ws_population_load(const char* population_csv, ws_population** out) {
    if (!population_csv || !out) return fail(WS_ERR_INVALID_ARGUMENT, "null argument");
    *out = nullptr;
    return guarded([&] {
        auto handle = std::make_unique<ws_population>();
        handle->population = wheatsim::population::load_population(population_csv);
        *out = handle.release();
    });
}

ws_status ws_population_save(const ws_population* population, const char* path) {
    if (!population || !path) return fail(WS_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] { wheatsim::population::save_population(path, population->population); });
}

size_t ws_population_size(const ws_population* population) {
    return population ? population->population.farms.size() : 0;
}

size_t ws_population_records_used(const ws_population* population) { return population ? population->records_used : 0; }

size_t ws_population_cluster_count(const ws_population* population) {
    if (!population) return 0;
    if (!population->specs.empty()) return population->specs.size();
    std::map<int, int> ids;
    for (const auto& f : population->population.farms) ids[f.cluster_id] = 1;
    return ids.size();
}

ws_status ws_population_cluster(const ws_population* population, size_t index, ws_cluster_summary* out) {
    if (!population || !out) return fail(WS_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        namespace pop = wheatsim::population;
        const auto& farms = population->population.farms;
        std::map<int, std::size_t> counts;
        std::map<int, pop::Values> sums;
        for (const auto& f : farms) {
            ++counts[f.cluster_id];
            for (std::size_t j = 0; j < pop::kVariableCount; ++j) sums[f.cluster_id][j] += f.values[j];
        }
        ws_cluster_summary s{};
        if (!population->specs.empty()) {
            if (index >= population->specs.size()) throw wheatsim::Error(wheatsim::ErrorCode::invalid_argument, "cluster index out of range");
            const auto& spec = population->specs[index];
            s.cluster_id = spec.cluster_id;
            s.weight = spec.weight;
            s.survey_members = spec.members;
            s.synthetic_count = counts.count(spec.cluster_id) ? counts[spec.cluster_id] : 0;
            for (std::size_t j = 0; j < pop::kVariableCount; ++j) {
                s.centroid[j] = spec.centroid[j];
                s.mean[j] = spec.distributions[j].mean();
            }
        } else {
            if (index >= counts.size()) throw wheatsim::Error(wheatsim::ErrorCode::invalid_argument, "cluster index out of range");
            auto it = std::next(counts.begin(), static_cast<std::ptrdiff_t>(index));
            s.cluster_id = it->first;
            s.synthetic_count = it->second;
            s.weight = static_cast<double>(it->second) / static_cast<double>(farms.size());
            for (std::size_t j = 0; j < pop::kVariableCount; ++j) {
                s.centroid[j] = std::numeric_limits<double>::quiet_NaN();
                s.mean[j] = sums[it->first][j] / static_cast<double>(it->second);
            }
        }
        *out = s;
    });
}

const char* ws_population_variable_name(size_t index) {
    if (index >= wheatsim::population::kVariableCount) return nullptr;
    return wheatsim::population::kVariableNames[index].data();
}

void ws_population_free(ws_population* population) { delete population; }

ws_status ws_scenario_load(const char* config_path, ws_scenario** out) {
    if (!config_path || !out) return fail(WS_ERR_INVALID_ARGUMENT, "null argument");
    *out = nullptr;
    return guarded([&] {
        auto handle = std::make_unique<ws_scenario>();
        handle->config = wheatsim::orchestrator::ScenarioConfig::load(config_path);
        handle->config.validate();
        // Surface world and characterization errors before any season runs.
        (void)wheatsim::market::load_world(handle->config.world_file);
        (void)wheatsim::lca::CharacterizationMatrix::load(handle->config.midpoint_file, handle->config.endpoint_file);
        *out = handle.release();
    });
}

ws_status ws_scenario_set_workers(ws_scenario* scenario, unsigned workers) {
    if (!scenario) return fail(WS_ERR_INVALID_ARGUMENT, "null scenario");
    if (workers < 1) return fail(WS_ERR_INVALID_ARGUMENT, "workers must be >= 1");
    scenario->config.workers = workers;
    return WS_OK;
}

unsigned ws_scenario_workers(const ws_scenario* scenario) { return scenario ? scenario->config.workers : 0; }

size_t ws_scenario_season_count(const ws_scenario* scenario) { return scenario ? scenario->config.seasons : 0; }

ws_status ws_scenario_run(ws_scenario* scenario, const char* out_dir, ws_season_fn on_season, void* user) {
    if (!scenario || !out_dir) return fail(WS_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        scenario->last_run.reset();
        wheatsim::orchestrator::SeasonCallback cb;
        if (on_season) {
            cb = [&](const wheatsim::orchestrator::SeasonResult& r) {
                ws_season_summary s{};
                fill_summary(r, &s);
                on_season(&s, user);
            };
        }
        scenario->last_run = wheatsim::orchestrator::run_scenario(scenario->config, out_dir, cb);
    });
}

size_t ws_scenario_farm_count(const ws_scenario* scenario) {
    return scenario && scenario->last_run ? scenario->last_run->farms : 0;
}

double ws_scenario_wall_seconds(const ws_scenario* scenario) {
    return scenario && scenario->last_run ? scenario->last_run->wall_seconds : 0.0;
}

ws_status ws_scenario_season(const ws_scenario* scenario, size_t season, ws_season_summary* out) {
    if (!scenario || !out) return fail(WS_ERR_INVALID_ARGUMENT, "null argument");
    if (!scenario->last_run) return fail(WS_ERR_INVALID_ARGUMENT, "scenario has not been run");
    if (season >= scenario->last_run->seasons.size()) return fail(WS_ERR_INVALID_ARGUMENT, "season out of range");
    fill_summary(scenario->last_run->seasons[season], out);
    return WS_OK;
}

void ws_scenario_free(ws_scenario* scenario) { delete scenario; }

ws_status ws_diff(const char* baseline_dir, const char* scenario_dir, ws_line_fn on_line, void* user) {
    if (!baseline_dir || !scenario_dir) return fail(WS_ERR_INVALID_ARGUMENT, "null argument");
    return guarded([&] {
        const auto deltas = wheatsim::diff::diff_directories(baseline_dir, scenario_dir);
        if (!on_line) return;
        static const char* shown[] = {"market_price", "production_t", "end_DALY", "end_species_yr", "end_cost"};
        for (const auto& d : deltas) {
            std::string line = "season " + std::to_string(d.season) + ":";
            for (const char* name : shown) {
                for (const auto& c : d.columns) {
                    if (c.column != name) continue;
                    char buf[160];
                    if (std::isnan(c.percent)) {
                        std::snprintf(buf, sizeof buf, " %s %+.6g", name, c.delta);
                    } else {
                        std::snprintf(buf, sizeof buf, " %s %+.6g (%+.3f%%)", name, c.delta, c.percent);
                    }
                    line += buf;
                }
            }
            on_line(line.c_str(), user);
        }
    });
}

}  // extern "C"
