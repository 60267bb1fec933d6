#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wheatsim/rng.hpp"

namespace wheatsim::population {

/// Numeric survey variables, in CSV column order. All of them take part in
/// clustering.
enum class Variable : std::size_t {
    area,
    tractor_hours_per_ha,
    fert_n,
    fert_p,
    fert_k,
    herbicide,
    insecticide,
    fungicide,
};
inline constexpr std::size_t kVariableCount = 8;
inline constexpr std::array<std::string_view, kVariableCount> kVariableNames = {
    "area", "tractor_hours_per_ha", "fert_n", "fert_p", "fert_k", "herbicide", "insecticide", "fungicide"};

using Values = std::array<double, kVariableCount>;

/// One farm of survey microdata (or one synthetic farm, when cluster_id >= 0).
struct FarmRecord {
    std::string id;
    Values values{};
    std::string region;
    int cluster_id = -1;

    double& operator[](Variable v) { return values[static_cast<std::size_t>(v)]; }
    double operator[](Variable v) const { return values[static_cast<std::size_t>(v)]; }
    double area() const { return (*this)[Variable::area]; }
};

/// Clustering space of a record: area enters as ln(area), the rest as is.
Values clustering_features(const Values& raw);

/// Per-variable z-standardization of clustering features. A zero standard
/// deviation is stored as 1 so constant variables standardize to 0.
struct Standardization {
    Values mean{};
    Values scale{};

    static Standardization fit(std::span<const FarmRecord> records);
    /// Standardizes `clustering_features(raw)`.
    Values apply(const Values& raw) const;
};

enum class Family { log_normal, truncated_normal };

/// Two-parameter marginal distribution of one variable within a cluster.
/// log_normal: location/scale are mean/sd of ln(x).
/// truncated_normal: location/scale of the parent normal, truncated below at 0.
struct Distribution {
    Family family = Family::truncated_normal;
    double location = 0.0;
    double scale = 0.0;

    /// Analytic mean of the (truncated) distribution.
    double mean() const;
    double sample(KeyedRng& rng) const;
};

struct ClusterSpec {
    int cluster_id = 0;
    double weight = 0.0;
    std::size_t members = 0;
    std::array<Distribution, kVariableCount> distributions{};
    Values centroid{};  // standardized space
    std::vector<std::pair<std::string, double>> region_shares;
};

struct SyntheticPopulation {
    std::vector<FarmRecord> farms;
    std::size_t target_size = 0;
};

/// CSV header of farm microdata files.
std::string records_header();

std::vector<FarmRecord> load_farm_records(const std::filesystem::path& path);
std::vector<FarmRecord> parse_farm_records(std::istream& in, const std::string& origin);

/// Loads a synthetic population export (records schema plus cluster_id).
SyntheticPopulation load_population(const std::filesystem::path& path);
void write_population(std::ostream& out, const SyntheticPopulation& population);
void save_population(const std::filesystem::path& path, const SyntheticPopulation& population);

/// Drops records whose standardized value exceeds z_threshold in any variable.
/// Throws if nothing survives.
std::vector<FarmRecord> remove_outliers(std::span<const FarmRecord> records, double z_threshold);

struct KMeansResult {
    std::vector<Values> centroids;  // standardized space
    std::vector<int> assignment;
    double inertia = 0.0;
    int iterations = 0;
    bool converged = false;
};

inline constexpr int kKMeansMaxIterations = 300;
inline constexpr double kKMeansTolerance = 1e-6;

/// Seeded k-means++ / Lloyd on already standardized points. Restarts `n_init`
/// times with derived seeds and keeps the lowest inertia.
KMeansResult kmeans(std::span<const Values> points, std::size_t k, std::uint64_t seed, int n_init = 4);

/// Clusters survey records into production-system types. Clusters are
/// returned in a canonical order (lexicographic by centroid), so ids do not
/// depend on the random initialization.
std::vector<ClusterSpec> cluster(std::span<const FarmRecord> records, std::size_t k, std::uint64_t seed);

/// Largest-remainder apportionment of `total` items by `weights`. Ties in the
/// remainder go to the lower index.
std::vector<std::size_t> apportion(std::span<const double> weights, std::size_t total);

SyntheticPopulation synthesize_population(std::span<const ClusterSpec> specs, std::size_t target_size,
                                          std::uint64_t seed);

void validate_specs(std::span<const ClusterSpec> specs);

}  // namespace wheatsim::population
