#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wheatsim/population.hpp"

namespace wheatsim::agronomy {

enum class StressKind { nutrition, weeds, pests, fungi };
inline constexpr std::size_t kStressKinds = 4;
inline constexpr std::array<std::string_view, kStressKinds> kStressKindNames = {"nutrition", "weeds", "pests", "fungi"};

StressKind parse_stress_kind(std::string_view name);

/// A yield-reducing agent. Without countermeasures the farm loses
/// `loss_share` of its potential yield; input x recovers it at rate
/// `response_rate`: factor(x) = 1 - s * exp(-lambda * x).
struct StressFactor {
    StressKind kind = StressKind::nutrition;
    double loss_share = 0.0;     // s, in (0, 1)
    double response_rate = 0.0;  // lambda, per input unit
    double input_price = 0.0;    // currency per input unit

    double factor(double input) const;
};

enum class Behavior { optimizer, rule_based };

struct Farm {
    std::uint64_t id = 0;
    int cluster_id = 0;
    double area = 0.0;             // ha
    double potential_yield = 0.0;  // t/ha
    double machinery_hours = 0.0;  // tractor h/ha
    std::array<double, 3> npk_split{1.0 / 3, 1.0 / 3, 1.0 / 3};
    std::vector<StressFactor> stress_factors;
    Behavior behavior = Behavior::rule_based;
    std::vector<double> last_inputs;  // rule-based memory, one per factor
    double last_price = 0.0;          // wheat price behind last_inputs
    std::vector<std::string> adopted_schemes;

    void validate() const;
};

/// Prices and constraints a farm decides under, after policy adjustments.
struct DecisionEnvironment {
    double wheat_price = 0.0;
    std::vector<double> input_prices;  // per stress factor of the farm
    std::vector<double> input_caps;    // +inf when unconstrained
    double per_ha_payment = 0.0;

    static DecisionEnvironment raw(const Farm& farm, double wheat_price);
};

struct Decision {
    double target_yield = 0.0;  // t/ha
    std::vector<double> inputs;
    double expected_profit = 0.0;  // currency/ha
    bool converged = true;
    int sweeps = 0;
};

struct Outcome {
    double actual_yield = 0.0;  // t/ha
    double yield_gap = 0.0;     // t/ha
    double production = 0.0;    // t
    double realized_profit = 0.0;
};

/// potential_yield * prod_i (1 - s_i exp(-lambda_i x_i)).
double yield_response(const Farm& farm, std::span<const double> inputs);

/// Per-hectare profit of an input vector: p_w * y(x) - sum p_i x_i + payment.
double profit(const Farm& farm, const DecisionEnvironment& env, std::span<const double> inputs);

/// Analytic optimum for a farm with exactly one stress factor. Inputs are
/// clamped to [0, cap]; the interior branch uses the closed forms
/// y* = ybar - p_x / (p_w lambda), x* = -ln(p_x / (p_w lambda s ybar)) / lambda.
Decision optimize_single(const Farm& farm, const DecisionEnvironment& env);
Decision optimize_single(const Farm& farm, double wheat_price);

inline constexpr double kCoordinateTolerance = 1e-8;
inline constexpr int kMaxSweeps = 10000;

/// Profit maximization over all factors by cyclic coordinate ascent; each
/// coordinate step is the single-factor closed form against the yield left
/// by the other factors, clamped to its box.
Decision optimize_multi(const Farm& farm, const DecisionEnvironment& env);
Decision optimize_multi(const Farm& farm, double wheat_price);

/// Elasticity of rule-based input scaling to the wheat price ratio.
inline constexpr double kRuleElasticity = 0.5;
inline constexpr double kRuleScaleMin = 0.8;
inline constexpr double kRuleScaleMax = 1.2;

/// Adaptive repetition: last season's inputs scaled by the clamped
/// price-ratio response, then capped.
Decision rule_based_decide(const Farm& farm, const DecisionEnvironment& env, double previous_price);

/// Dispatches on farm.behavior.
Decision decide(const Farm& farm, const DecisionEnvironment& env);

struct ShockParams {
    double sigma_log = 0.10;
    std::uint64_t seed = 0;
};

/// Multiplicative log-normal season shock with median 1, keyed by
/// (seed, farm id, season).
double season_shock(const ShockParams& shock, std::uint64_t farm_id, std::uint64_t season);

Outcome realize_yield(const Decision& decision, const Farm& farm, const DecisionEnvironment& env,
                      const ShockParams& shock, std::uint64_t season);

/// Parameters that turn synthetic survey records into decision-making farms.
struct Calibration {
    double size_threshold_ha = 20.0;
    double reference_wheat_price = 280.0;  // currency/t
    double potential_yield_min = 3.0;      // t/ha
    double potential_yield_max = 5.0;
    std::vector<std::array<double, 2>> cluster_potential_yield;  // optional per-cluster override
    std::array<double, kStressKinds> loss_share{0.40, 0.20, 0.06, 0.10};
    std::array<double, kStressKinds> input_price{0.6, 25.0, 30.0, 22.0};  // currency per kg (NPK or ai)
    double min_response_rate = 1e-3;
    double max_response_rate = 50.0;
};

/// Per-kind input intensity implied by a survey record: total NPK for
/// nutrition, herbicide, insecticide, fungicide.
std::array<double, kStressKinds> record_inputs(const population::FarmRecord& record);

/// Response rate that puts the single-factor optimum at `input` when the
/// factor faces `effective_yield` t/ha at the given prices; takes the branch
/// where the optimum decreases in lambda and clamps to [lo, hi].
double calibrate_response_rate(double input, double loss_share, double effective_yield, double wheat_price,
                               double input_price, double lo, double hi);

/// Builds agents from a synthetic population. Response rates are calibrated
/// per (cluster, stress kind) so that cluster-mean inputs sit near the
/// optimum at the reference price; potential yield is drawn per farm.
std::vector<Farm> build_farms(const population::SyntheticPopulation& population, const Calibration& calibration,
                              std::uint64_t seed);

}  // namespace wheatsim::agronomy
