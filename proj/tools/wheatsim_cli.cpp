// wheatsim: command-line front end. Talks to the simulator only through the C API.

#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "wheatsim/wheatsim.h"

namespace {

int report_failure(const char* phase, ws_status status) {
    std::fprintf(stderr, "wheatsim: %s: %s: %s\n", phase, ws_status_name(status), ws_last_error());
    return 1;
}

int generate_population(const std::string& records, std::size_t clusters, std::size_t size, std::uint64_t seed,
                        double outlier_z, const std::string& out) {
    ws_population* pop = nullptr;
    if (auto st = ws_population_generate(records.c_str(), clusters, size, seed, outlier_z, &pop); st != WS_OK) {
        return report_failure("generate-population", st);
    }
    if (auto st = ws_population_save(pop, out.c_str()); st != WS_OK) {
        ws_population_free(pop);
        return report_failure("generate-population", st);
    }
    std::printf("records used: %zu, synthetic farms: %zu\n", ws_population_records_used(pop), ws_population_size(pop));
    std::printf("%-7s %9s %9s %9s", "cluster", "members", "weight", "farms");
    for (std::size_t j = 0; j < WS_VARIABLE_COUNT; ++j) std::printf(" %12.12s", ws_population_variable_name(j));
    std::printf("\n");
    for (std::size_t c = 0; c < ws_population_cluster_count(pop); ++c) {
        ws_cluster_summary s{};
        if (ws_population_cluster(pop, c, &s) != WS_OK) continue;
        std::printf("%-7d %9zu %9.5f %9zu", s.cluster_id, s.survey_members, s.weight, s.synthetic_count);
        for (double v : s.centroid) std::printf(" %12.4f", v);
        std::printf("   (centroid, z)\n%-7s %9s %9s %9s", "", "", "", "");
        for (double v : s.mean) std::printf(" %12.4g", v);
        std::printf("   (mean)\n");
    }
    ws_population_free(pop);
    return 0;
}

int validate(const std::string& config) {
    ws_scenario* scn = nullptr;
    if (auto st = ws_scenario_load(config.c_str(), &scn); st != WS_OK) return report_failure("validate", st);
    std::printf("%s: ok (%zu seasons, %u workers)\n", config.c_str(), ws_scenario_season_count(scn), ws_scenario_workers(scn));
    ws_scenario_free(scn);
    return 0;
}

void print_season(const ws_season_summary* s, void*) {
    std::printf(
        "season %zu: price %.2f -> %.2f, production %.4g t, mean gap %.3f t/ha, Italy net imports %.4g t, "
        "DALY %.4g, species.yr %.4g, cost %.4g, flags %zu, %.2fs (decide %.2fs, lca %.2fs, market %.3fs)\n",
        s->season, s->decision_price, s->market_price, s->production_t, s->mean_yield_gap, s->italy_net_imports_t,
        s->endpoints[0], s->endpoints[1], s->endpoints[2], s->flag_count, s->seconds, s->phase_seconds[1],
        s->phase_seconds[2], s->phase_seconds[4]);
    std::fflush(stdout);
}

int run(const std::string& config, unsigned workers, const std::string& out_dir) {
    ws_scenario* scn = nullptr;
    if (auto st = ws_scenario_load(config.c_str(), &scn); st != WS_OK) return report_failure("validate", st);
    if (workers > 0) {
        if (auto st = ws_scenario_set_workers(scn, workers); st != WS_OK) {
            ws_scenario_free(scn);
            return report_failure("validate", st);
        }
    }
    const auto st = ws_scenario_run(scn, out_dir.c_str(), print_season, nullptr);
    if (st != WS_OK) {
        ws_scenario_free(scn);
        return report_failure("run", st);
    }
    const double wall = ws_scenario_wall_seconds(scn);
    const double farm_seasons = static_cast<double>(ws_scenario_farm_count(scn) * ws_scenario_season_count(scn));
    std::printf("done: %zu farms x %zu seasons in %.2fs (%.0f farm-seasons/s), %u workers\n", ws_scenario_farm_count(scn),
                ws_scenario_season_count(scn), wall, wall > 0 ? farm_seasons / wall : 0.0, ws_scenario_workers(scn));
    ws_scenario_free(scn);
    return 0;
}

void print_line(const char* line, void*) { std::printf("%s\n", line); }

int diff(const std::string& baseline, const std::string& scenario) {
    if (auto st = ws_diff(baseline.c_str(), scenario.c_str(), print_line, nullptr); st != WS_OK) {
        return report_failure("diff", st);
    }
    std::printf("wrote %s/diff.csv\n", scenario.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Italian durum wheat production system simulator"};
    app.set_version_flag("--version", std::string("wheatsim ") + ws_version());
    app.require_subcommand(1);

    auto* gen = app.add_subcommand("generate-population", "Cluster farm records and synthesize a population");
    std::string records, out;
    std::size_t clusters = 6, size = 0;
    std::uint64_t seed = 1;
    double outlier_z = 4.0;
    gen->add_option("--records", records, "Farm microdata CSV")->required()->check(CLI::ExistingFile);
    gen->add_option("--clusters", clusters, "Number of production-system clusters")->capture_default_str();
    gen->add_option("--size", size, "Synthetic population size")->required();
    gen->add_option("--seed", seed, "Random seed")->capture_default_str();
    gen->add_option("--outlier-z", outlier_z, "Outlier z-score threshold")->capture_default_str();
    gen->add_option("--out", out, "Output population CSV")->required();

    auto* val = app.add_subcommand("validate", "Validate a scenario config and the files it references");
    std::string config;
    val->add_option("--config", config, "Scenario config file")->required();

    auto* run_cmd = app.add_subcommand("run", "Run a scenario and write its exports");
    unsigned workers = 0;
    std::string out_dir;
    run_cmd->add_option("--config", config, "Scenario config file")->required();
    run_cmd->add_option("--workers", workers, "Worker threads (default: from config)")->check(CLI::PositiveNumber);
    run_cmd->add_option("--out-dir", out_dir, "Output directory")->required();

    auto* diff_cmd = app.add_subcommand("diff", "Compare two scenario output directories");
    std::string baseline, scenario;
    diff_cmd->add_option("--baseline", baseline, "Baseline output directory")->required()->check(CLI::ExistingDirectory);
    diff_cmd->add_option("--scenario", scenario, "Scenario output directory")->required()->check(CLI::ExistingDirectory);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "wheatsim: usage: %s (see --help)\n", e.what());
        return 1;
    }

    if (*gen) return generate_population(records, clusters, size, seed, outlier_z, out);
    if (*val) return validate(config);
    if (*run_cmd) return run(config, workers, out_dir);
    if (*diff_cmd) return diff(baseline, scenario);
    return 1;
}
