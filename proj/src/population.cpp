#include "wheatsim/population.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>

#include <boost/math/special_functions/erf.hpp>

#include "wheatsim/csv.hpp"
#include "wheatsim/error.hpp"

namespace wheatsim::population {

namespace {

constexpr std::size_t kArea = static_cast<std::size_t>(Variable::area);

double upper_tail(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

double squared_distance(const Values& a, const Values& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < kVariableCount; ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
    return d;
}

std::vector<std::string> expected_header(bool with_cluster) {
    std::vector<std::string> h{"id"};
    for (auto n : kVariableNames) h.emplace_back(n);
    h.emplace_back("region");
    if (with_cluster) h.emplace_back("cluster_id");
    return h;
}

std::vector<FarmRecord> parse_rows(std::istream& in, const std::string& origin, bool with_cluster) {
    std::vector<FarmRecord> out;
    const auto header = expected_header(with_cluster);
    std::string line;
    std::size_t number = 0;
    bool seen_header = false;
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        auto fields = csv::split(line);
        if (!seen_header) {
            if (fields != header) {
                throw Error(ErrorCode::parse, origin + ":" + std::to_string(number) + ": unexpected header");
            }
            seen_header = true;
            continue;
        }
        auto where = [&] { return origin + ":" + std::to_string(number) + ": "; };
        if (fields.size() != header.size()) {
            throw Error(ErrorCode::parse, where() + "expected " + std::to_string(header.size()) + " fields, got " +
                                              std::to_string(fields.size()));
        }
        FarmRecord r;
        r.id = fields[0];
        if (r.id.empty()) throw Error(ErrorCode::parse, where() + "field 'id' is empty");
        for (std::size_t i = 0; i < kVariableCount; ++i) {
            try {
                r.values[i] = csv::parse_double(fields[i + 1], number, kVariableNames[i]);
            } catch (const Error& e) {
                throw Error(ErrorCode::parse, origin + ": " + e.what());
            }
            if (r.values[i] < 0.0) {
                throw Error(ErrorCode::validation,
                            where() + "field '" + std::string(kVariableNames[i]) + "' is negative");
            }
        }
        if (!(r.area() > 0.0)) throw Error(ErrorCode::validation, where() + "field 'area' must be positive");
        r.region = fields[kVariableCount + 1];
        if (with_cluster) {
            const auto& c = fields.back();
            char* end = nullptr;
            const long v = std::strtol(c.c_str(), &end, 10);
            if (c.empty() || *end != '\0' || v < 0) {
                throw Error(ErrorCode::parse, where() + "field 'cluster_id' is not a non-negative integer");
            }
            r.cluster_id = static_cast<int>(v);
        }
        out.push_back(std::move(r));
    }
    if (!seen_header) throw Error(ErrorCode::parse, origin + ": missing header");
    return out;
}

Distribution fit(Family family, const std::vector<double>& xs) {
    Distribution d;
    d.family = family;
    if (xs.empty()) return d;
    const auto n = static_cast<double>(xs.size());
    double mean = 0.0;
    for (double x : xs) mean += family == Family::log_normal ? std::log(x) : x;
    mean /= n;
    double var = 0.0;
    for (double x : xs) {
        const double t = (family == Family::log_normal ? std::log(x) : x) - mean;
        var += t * t;
    }
    d.location = mean;
    d.scale = std::sqrt(var / n);
    return d;
}

}  // namespace

Values clustering_features(const Values& raw) {
    Values f = raw;
    f[kArea] = std::log(raw[kArea]);
    return f;
}

Standardization Standardization::fit(std::span<const FarmRecord> records) {
    Standardization s;
    const auto n = static_cast<double>(records.size());
    std::vector<Values> features;
    features.reserve(records.size());
    for (const auto& r : records) features.push_back(clustering_features(r.values));
    for (std::size_t i = 0; i < kVariableCount; ++i) {
        double mean = 0.0;
        for (const auto& f : features) mean += f[i];
        mean /= n;
        double var = 0.0;
        for (const auto& f : features) var += (f[i] - mean) * (f[i] - mean);
        const double sd = std::sqrt(var / n);
        const auto [lo, hi] = std::minmax_element(features.begin(), features.end(),
                                                  [i](const Values& a, const Values& b) { return a[i] < b[i]; });
        const bool constant = (*lo)[i] == (*hi)[i];
        s.mean[i] = constant ? (*lo)[i] : mean;
        s.scale[i] = constant || !(sd > 0.0) ? 1.0 : sd;
    }
    return s;
}

Values Standardization::apply(const Values& raw) const {
    Values z = clustering_features(raw);
    for (std::size_t i = 0; i < kVariableCount; ++i) z[i] = (z[i] - mean[i]) / scale[i];
    return z;
}

double Distribution::mean() const {
    if (family == Family::log_normal) return std::exp(location + 0.5 * scale * scale);
    if (scale == 0.0) return std::max(location, 0.0);
    const double alpha = -location / scale;
    const double tail = upper_tail(alpha);
    if (tail < 1e-300) return 0.0;
    const double pdf = std::exp(-0.5 * alpha * alpha) / std::sqrt(2.0 * std::numbers::pi);
    return location + scale * pdf / tail;
}

double Distribution::sample(KeyedRng& rng) const {
    if (family == Family::log_normal) return std::exp(location + scale * rng.normal());
    if (scale == 0.0) return std::max(location, 0.0);
    // Inverse-CDF on the upper tail beyond zero; stays accurate when most of
    // the parent mass is negative.
    const double tail = upper_tail(-location / scale);
    if (tail < 1e-300) return 0.0;
    const double v = tail * rng.uniform();
    const double z = std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * v);
    return std::max(location + scale * z, 0.0);
}

std::string records_header() {
    std::string h;
    for (const auto& f : expected_header(false)) h += (h.empty() ? "" : ",") + f;
    return h;
}

std::vector<FarmRecord> parse_farm_records(std::istream& in, const std::string& origin) {
    return parse_rows(in, origin, false);
}

std::vector<FarmRecord> load_farm_records(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io, "cannot open farm records '" + path.string() + "'");
    return parse_rows(in, path.string(), false);
}

SyntheticPopulation load_population(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io, "cannot open population '" + path.string() + "'");
    SyntheticPopulation pop;
    pop.farms = parse_rows(in, path.string(), true);
    pop.target_size = pop.farms.size();
    if (pop.farms.empty()) throw Error(ErrorCode::validation, path.string() + ": population is empty");
    return pop;
}

void write_population(std::ostream& out, const SyntheticPopulation& population) {
    csv::write_row(out, expected_header(true));
    std::vector<std::string> row(kVariableCount + 3);
    for (const auto& f : population.farms) {
        row[0] = f.id;
        for (std::size_t i = 0; i < kVariableCount; ++i) row[i + 1] = csv::format(f.values[i]);
        row[kVariableCount + 1] = f.region;
        row[kVariableCount + 2] = std::to_string(f.cluster_id);
        csv::write_row(out, row);
    }
}

void save_population(const std::filesystem::path& path, const SyntheticPopulation& population) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io, "cannot write '" + path.string() + "'");
    write_population(out, population);
    if (!out) throw Error(ErrorCode::io, "write failed for '" + path.string() + "'");
}

std::vector<FarmRecord> remove_outliers(std::span<const FarmRecord> records, double z_threshold) {
    if (records.empty()) throw Error(ErrorCode::invalid_argument, "remove_outliers: no records");
    if (!(z_threshold > 0.0)) throw Error(ErrorCode::invalid_argument, "remove_outliers: threshold must be > 0");
    const auto stdz = Standardization::fit(records);
    std::vector<FarmRecord> kept;
    kept.reserve(records.size());
    for (const auto& r : records) {
        const auto z = stdz.apply(r.values);
        if (std::all_of(z.begin(), z.end(), [&](double v) { return std::abs(v) <= z_threshold; })) {
            kept.push_back(r);
        }
    }
    if (kept.empty()) throw Error(ErrorCode::validation, "remove_outliers: every record exceeds the threshold");
    return kept;
}

namespace {

KMeansResult lloyd(std::span<const Values> points, std::size_t k, KeyedRng& rng) {
    const std::size_t n = points.size();
    KMeansResult res;

    // k-means++ seeding
    res.centroids.push_back(points[rng.below(n)]);
    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(points[i], res.centroids[0]);
    while (res.centroids.size() < k) {
        const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
        std::size_t pick = 0;
        if (total > 0.0) {
            const double target = rng.uniform() * total;
            double acc = 0.0;
            pick = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                acc += d2[i];
                if (acc >= target && d2[i] > 0.0) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = rng.below(n);
        }
        res.centroids.push_back(points[pick]);
        for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], squared_distance(points[i], res.centroids.back()));
    }

    res.assignment.assign(n, 0);
    std::vector<double> dist(n);
    for (res.iterations = 1; res.iterations <= kKMeansMaxIterations; ++res.iterations) {
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            int arg = 0;
            for (std::size_t c = 0; c < k; ++c) {
                const double d = squared_distance(points[i], res.centroids[c]);
                if (d < best) {
                    best = d;
                    arg = static_cast<int>(c);
                }
            }
            res.assignment[i] = arg;
            dist[i] = best;
        }
        std::vector<Values> next(k, Values{});
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto c = static_cast<std::size_t>(res.assignment[i]);
            ++counts[c];
            for (std::size_t j = 0; j < kVariableCount; ++j) next[c][j] += points[i][j];
        }
        bool reseeded = false;
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) {
                // Empty cluster: restart it at the point farthest from its centroid.
                const auto far = static_cast<std::size_t>(std::max_element(dist.begin(), dist.end()) - dist.begin());
                next[c] = points[far];
                dist[far] = 0.0;
                reseeded = true;
                continue;
            }
            for (auto& v : next[c]) v /= static_cast<double>(counts[c]);
        }
        double shift = 0.0;
        for (std::size_t c = 0; c < k; ++c) shift = std::max(shift, std::sqrt(squared_distance(next[c], res.centroids[c])));
        res.centroids = std::move(next);
        if (!reseeded && shift < kKMeansTolerance) {
            res.converged = true;
            break;
        }
    }
    res.iterations = std::min(res.iterations, kKMeansMaxIterations);

    res.inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        res.inertia += squared_distance(points[i], res.centroids[static_cast<std::size_t>(res.assignment[i])]);
    }
    return res;
}

}  // namespace

KMeansResult kmeans(std::span<const Values> points, std::size_t k, std::uint64_t seed, int n_init) {
    if (k == 0) throw Error(ErrorCode::invalid_argument, "kmeans: k must be >= 1");
    if (points.size() < k) {
        throw Error(ErrorCode::invalid_argument, "kmeans: k = " + std::to_string(k) + " exceeds record count " +
                                                     std::to_string(points.size()));
    }
    KMeansResult best;
    for (int run = 0; run < std::max(1, n_init); ++run) {
        KeyedRng rng(seed, {0x6b6d65616e73ULL, static_cast<std::uint64_t>(run)});
        auto res = lloyd(points, k, rng);
        if (run == 0 || res.inertia < best.inertia) best = std::move(res);
    }

    // Canonical labels: order centroids lexicographically.
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return best.centroids[a] < best.centroids[b]; });
    std::vector<int> relabel(k);
    std::vector<Values> sorted(k);
    for (std::size_t i = 0; i < k; ++i) {
        relabel[order[i]] = static_cast<int>(i);
        sorted[i] = best.centroids[order[i]];
    }
    best.centroids = std::move(sorted);
    for (auto& a : best.assignment) a = relabel[static_cast<std::size_t>(a)];
    return best;
}

std::vector<ClusterSpec> cluster(std::span<const FarmRecord> records, std::size_t k, std::uint64_t seed) {
    if (k == 0) throw Error(ErrorCode::invalid_argument, "cluster: k must be >= 1");
    if (records.size() < k) {
        throw Error(ErrorCode::invalid_argument, "cluster: k = " + std::to_string(k) + " exceeds record count " +
                                                     std::to_string(records.size()));
    }
    const auto stdz = Standardization::fit(records);
    std::vector<Values> points;
    points.reserve(records.size());
    for (const auto& r : records) points.push_back(stdz.apply(r.values));
    const auto km = kmeans(points, k, seed);

    std::vector<ClusterSpec> specs(k);
    for (std::size_t c = 0; c < k; ++c) {
        auto& spec = specs[c];
        spec.cluster_id = static_cast<int>(c);
        spec.centroid = km.centroids[c];
        std::array<std::vector<double>, kVariableCount> columns;
        std::map<std::string, std::size_t> regions;
        for (std::size_t i = 0; i < records.size(); ++i) {
            if (static_cast<std::size_t>(km.assignment[i]) != c) continue;
            ++spec.members;
            for (std::size_t j = 0; j < kVariableCount; ++j) columns[j].push_back(records[i].values[j]);
            ++regions[records[i].region];
        }
        spec.weight = static_cast<double>(spec.members) / static_cast<double>(records.size());
        for (std::size_t j = 0; j < kVariableCount; ++j) {
            spec.distributions[j] = fit(j == kArea ? Family::log_normal : Family::truncated_normal, columns[j]);
        }
        for (const auto& [name, count] : regions) {
            spec.region_shares.emplace_back(name, static_cast<double>(count) / static_cast<double>(spec.members));
        }
    }
    return specs;
}

std::vector<std::size_t> apportion(std::span<const double> weights, std::size_t total) {
    const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (weights.empty() || !(sum > 0.0)) throw Error(ErrorCode::invalid_argument, "apportion: weights sum to zero");
    std::vector<std::size_t> counts(weights.size());
    std::vector<double> remainder(weights.size());
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const double quota = weights[i] / sum * static_cast<double>(total);
        counts[i] = static_cast<std::size_t>(std::floor(quota));
        remainder[i] = quota - std::floor(quota);
        assigned += counts[i];
    }
    // Floating-point quotas can overshoot by one when the weights are not
    // exactly normalized; take back from the smallest remainders.
    std::vector<std::size_t> order(weights.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t i = 0; assigned < total; i = (i + 1) % order.size()) {
        ++counts[order[i]];
        ++assigned;
    }
    for (std::size_t i = order.size(); assigned > total;) {
        i = (i == 0 ? order.size() : i) - 1;
        if (counts[order[i]] > 0) {
            --counts[order[i]];
            --assigned;
        }
    }
    return counts;
}

void validate_specs(std::span<const ClusterSpec> specs) {
    if (specs.empty()) throw Error(ErrorCode::invalid_argument, "no cluster specs");
    double sum = 0.0;
    for (const auto& s : specs) {
        if (!(s.weight >= 0.0 && s.weight <= 1.0)) {
            throw Error(ErrorCode::invalid_argument, "cluster " + std::to_string(s.cluster_id) + ": weight outside [0,1]");
        }
        for (const auto& d : s.distributions) {
            if (!(d.scale >= 0.0) || !std::isfinite(d.location)) {
                throw Error(ErrorCode::invalid_argument,
                            "cluster " + std::to_string(s.cluster_id) + ": invalid distribution parameters");
            }
        }
        sum += s.weight;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw Error(ErrorCode::invalid_argument, "cluster weights do not sum to 1");
}

SyntheticPopulation synthesize_population(std::span<const ClusterSpec> specs, std::size_t target_size,
                                          std::uint64_t seed) {
    validate_specs(specs);
    if (target_size == 0) throw Error(ErrorCode::invalid_argument, "target population size must be >= 1");
    std::vector<double> weights;
    for (const auto& s : specs) weights.push_back(s.weight);
    const auto counts = apportion(weights, target_size);

    SyntheticPopulation pop;
    pop.target_size = target_size;
    pop.farms.reserve(target_size);
    std::uint64_t index = 0;
    for (std::size_t c = 0; c < specs.size(); ++c) {
        const auto& spec = specs[c];
        for (std::size_t i = 0; i < counts[c]; ++i, ++index) {
            KeyedRng rng(seed, {0x73796e7468ULL, index});
            FarmRecord f;
            f.id = std::to_string(index);
            f.cluster_id = spec.cluster_id;
            for (std::size_t j = 0; j < kVariableCount; ++j) f.values[j] = spec.distributions[j].sample(rng);
            // A log-normal draw can underflow to 0 for extreme parameters.
            f.values[kArea] = std::max(f.values[kArea], std::numeric_limits<double>::min());
            if (!spec.region_shares.empty()) {
                const double u = rng.uniform();
                double acc = 0.0;
                f.region = spec.region_shares.back().first;
                for (const auto& [name, share] : spec.region_shares) {
                    acc += share;
                    if (u < acc) {
                        f.region = name;
                        break;
                    }
                }
            } else {
                f.region = "NA";
            }
            pop.farms.push_back(std::move(f));
        }
    }
    return pop;
}

}  // namespace wheatsim::population
