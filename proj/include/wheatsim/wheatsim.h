/* C interface to the wheat production system simulator.
 *
 * All functions return a ws_status; on failure a message for the calling
 * thread is available from ws_last_error() until the next call. Handles are
 * opaque and must be released with the matching *_free function.
 */
#ifndef WHEATSIM_WHEATSIM_H
#define WHEATSIM_WHEATSIM_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(WHEATSIM_BUILDING_LIB)
#define WS_API __declspec(dllexport)
#else
#define WS_API __declspec(dllimport)
#endif
#else
#define WS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ws_status {
    WS_OK = 0,
    WS_ERR_INVALID_ARGUMENT = 1,
    WS_ERR_IO = 2,
    WS_ERR_PARSE = 3,
    WS_ERR_VALIDATION = 4,
    WS_ERR_NUMERICAL = 5,
    WS_ERR_MARKET = 6,
    WS_ERR_INTERNAL = 99
} ws_status;

#define WS_VARIABLE_COUNT 8

typedef struct ws_population ws_population;
typedef struct ws_scenario ws_scenario;

typedef struct ws_cluster_summary {
    int cluster_id;
    double weight;
    size_t survey_members;            /* records assigned by clustering */
    size_t synthetic_count;           /* farms generated for this cluster */
    double centroid[WS_VARIABLE_COUNT]; /* standardized space */
    double mean[WS_VARIABLE_COUNT];     /* fitted distribution means, natural units */
} ws_cluster_summary;

typedef struct ws_season_summary {
    size_t season;
    double decision_price;
    double market_price;
    double production_t;
    double mean_yield_gap;
    double italy_net_imports_t;
    double endpoints[3]; /* DALY, species_yr, cost */
    size_t flag_count;
    double seconds;      /* wall time of the season */
    double phase_seconds[5]; /* distribute, decide, lca, reduce, market */
} ws_season_summary;

typedef void (*ws_season_fn)(const ws_season_summary* summary, void* user);
typedef void (*ws_line_fn)(const char* line, void* user);

WS_API const char* ws_version(void);
WS_API const char* ws_last_error(void);
WS_API const char* ws_status_name(ws_status status);

/* Population: load survey records, drop outliers, cluster and synthesize. */
WS_API ws_status ws_population_generate(const char* records_csv, size_t clusters, size_t size, uint64_t seed,
                                        double outlier_z, ws_population** out);
WS_API ws_status ws_population_load(const char* population_csv, ws_population** out);
WS_API ws_status ws_population_save(const ws_population* population, const char* path);
WS_API size_t ws_population_size(const ws_population* population);
WS_API size_t ws_population_records_used(const ws_population* population);
WS_API size_t ws_population_cluster_count(const ws_population* population);
WS_API ws_status ws_population_cluster(const ws_population* population, size_t index, ws_cluster_summary* out);
WS_API const char* ws_population_variable_name(size_t index);
WS_API void ws_population_free(ws_population* population);

/* Scenario: parse and validate a config; run writes all exports. */
WS_API ws_status ws_scenario_load(const char* config_path, ws_scenario** out);
WS_API ws_status ws_scenario_set_workers(ws_scenario* scenario, unsigned workers);
WS_API unsigned ws_scenario_workers(const ws_scenario* scenario);
WS_API size_t ws_scenario_season_count(const ws_scenario* scenario);
WS_API ws_status ws_scenario_run(ws_scenario* scenario, const char* out_dir, ws_season_fn on_season, void* user);
/* Results of the last run. */
WS_API size_t ws_scenario_farm_count(const ws_scenario* scenario);
WS_API double ws_scenario_wall_seconds(const ws_scenario* scenario);
WS_API ws_status ws_scenario_season(const ws_scenario* scenario, size_t season, ws_season_summary* out);
WS_API void ws_scenario_free(ws_scenario* scenario);

/* Compares <baseline_dir>/seasons.csv with <scenario_dir>/seasons.csv, writes
 * <scenario_dir>/diff.csv and reports one line per season through on_line. */
WS_API ws_status ws_diff(const char* baseline_dir, const char* scenario_dir, ws_line_fn on_line, void* user);

#ifdef __cplusplus
}
#endif

#endif /* WHEATSIM_WHEATSIM_H */
