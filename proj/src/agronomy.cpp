#include "wheatsim/agronomy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "wheatsim/error.hpp"
#include "wheatsim/rng.hpp"

namespace wheatsim::agronomy {

using population::Variable;

StressKind parse_stress_kind(std::string_view name) {
    for (std::size_t i = 0; i < kStressKinds; ++i) {
        if (kStressKindNames[i] == name) return static_cast<StressKind>(i);
    }
    throw Error(ErrorCode::validation, "unknown stress kind '" + std::string(name) + "'");
}

double StressFactor::factor(double input) const { return 1.0 - loss_share * std::exp(-response_rate * input); }

void Farm::validate() const {
    const auto where = "farm " + std::to_string(id) + ": ";
    if (!(area > 0.0)) throw Error(ErrorCode::validation, where + "area must be positive");
    if (!(potential_yield > 0.0)) throw Error(ErrorCode::validation, where + "potential yield must be positive");
    double total_loss = 0.0;
    for (const auto& f : stress_factors) {
        if (!(f.loss_share > 0.0 && f.loss_share < 1.0)) throw Error(ErrorCode::validation, where + "loss share outside (0,1)");
        if (!(f.response_rate > 0.0)) throw Error(ErrorCode::validation, where + "response rate must be positive");
        if (!(f.input_price > 0.0)) throw Error(ErrorCode::validation, where + "input price must be positive");
        total_loss += f.loss_share;
    }
    if (!(total_loss < 1.0)) throw Error(ErrorCode::validation, where + "loss shares sum to >= 1");
}

DecisionEnvironment DecisionEnvironment::raw(const Farm& farm, double wheat_price) {
    DecisionEnvironment env;
    env.wheat_price = wheat_price;
    for (const auto& f : farm.stress_factors) env.input_prices.push_back(f.input_price);
    env.input_caps.assign(farm.stress_factors.size(), std::numeric_limits<double>::infinity());
    return env;
}

double yield_response(const Farm& farm, std::span<const double> inputs) {
    if (inputs.size() != farm.stress_factors.size()) {
        throw Error(ErrorCode::invalid_argument, "yield_response: expected " +
                                                     std::to_string(farm.stress_factors.size()) + " input levels");
    }
    double y = farm.potential_yield;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        if (!(inputs[i] >= 0.0)) throw Error(ErrorCode::invalid_argument, "yield_response: negative input level");
        y *= farm.stress_factors[i].factor(inputs[i]);
    }
    return y;
}

double profit(const Farm& farm, const DecisionEnvironment& env, std::span<const double> inputs) {
    double cost = 0.0;
    for (std::size_t i = 0; i < inputs.size(); ++i) cost += env.input_prices[i] * inputs[i];
    return env.wheat_price * yield_response(farm, inputs) - cost + env.per_ha_payment;
}

namespace {

void check_environment(const Farm& farm, const DecisionEnvironment& env) {
    // A zero price is legal (a market in excess supply clears there); every
    // input is then worthless and the optimum is the zero corner.
    if (!(env.wheat_price >= 0.0) || !std::isfinite(env.wheat_price)) {
        throw Error(ErrorCode::invalid_argument, "wheat price must be finite and >= 0");
    }
    if (env.input_prices.size() != farm.stress_factors.size() || env.input_caps.size() != farm.stress_factors.size()) {
        throw Error(ErrorCode::invalid_argument, "decision environment does not match the farm's stress factors");
    }
}

/// Best input for one factor when the rest of the response multiplies the
/// potential yield down to `effective_yield`.
double best_input(const StressFactor& f, double effective_yield, double wheat_price, double input_price, double cap) {
    const double ratio = input_price / (wheat_price * f.response_rate * f.loss_share * effective_yield);
    const double x = ratio >= 1.0 ? 0.0 : -std::log(ratio) / f.response_rate;
    return std::min(x, cap);
}

}  // namespace

Decision optimize_single(const Farm& farm, const DecisionEnvironment& env) {
    if (farm.stress_factors.size() != 1) {
        throw Error(ErrorCode::invalid_argument, "optimize_single: farm must have exactly one stress factor");
    }
    check_environment(farm, env);
    const auto& f = farm.stress_factors[0];
    const double px = env.input_prices[0];
    const double pw = env.wheat_price;
    const double ybar = farm.potential_yield;

    Decision d;
    const double ratio = px / (pw * f.response_rate * f.loss_share * ybar);
    const double interior = -std::log(ratio) / f.response_rate;
    if (ratio < 1.0 && interior <= env.input_caps[0]) {
        d.inputs = {interior};
        d.target_yield = ybar - px / (pw * f.response_rate);
    } else {
        d.inputs = {ratio >= 1.0 ? 0.0 : env.input_caps[0]};
        d.target_yield = yield_response(farm, d.inputs);
    }
    d.expected_profit = pw * d.target_yield - px * d.inputs[0] + env.per_ha_payment;
    return d;
}

Decision optimize_single(const Farm& farm, double wheat_price) {
    return optimize_single(farm, DecisionEnvironment::raw(farm, wheat_price));
}

Decision optimize_multi(const Farm& farm, const DecisionEnvironment& env) {
    if (farm.stress_factors.empty()) throw Error(ErrorCode::invalid_argument, "optimize_multi: no stress factors");
    check_environment(farm, env);
    const std::size_t n = farm.stress_factors.size();
    std::vector<double> x(n, 0.0);
    std::vector<double> factor(n);
    for (std::size_t i = 0; i < n; ++i) factor[i] = farm.stress_factors[i].factor(0.0);

    Decision d;
    d.converged = false;
    for (d.sweeps = 1; d.sweeps <= kMaxSweeps; ++d.sweeps) {
        double max_change = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double others = farm.potential_yield;
            for (std::size_t j = 0; j < n; ++j) {
                if (j != i) others *= factor[j];
            }
            const auto& f = farm.stress_factors[i];
            const double xi = best_input(f, others, env.wheat_price, env.input_prices[i], env.input_caps[i]);
            max_change = std::max(max_change, std::abs(xi - x[i]));
            x[i] = xi;
            factor[i] = f.factor(xi);
        }
        if (max_change < kCoordinateTolerance) {
            d.converged = true;
            break;
        }
    }
    d.sweeps = std::min(d.sweeps, kMaxSweeps);
    d.inputs = std::move(x);
    d.target_yield = yield_response(farm, d.inputs);
    d.expected_profit = profit(farm, env, d.inputs);
    return d;
}

Decision optimize_multi(const Farm& farm, double wheat_price) {
    return optimize_multi(farm, DecisionEnvironment::raw(farm, wheat_price));
}

Decision rule_based_decide(const Farm& farm, const DecisionEnvironment& env, double previous_price) {
    check_environment(farm, env);
    if (!(previous_price >= 0.0)) throw Error(ErrorCode::invalid_argument, "previous price must be >= 0");
    if (farm.last_inputs.size() != farm.stress_factors.size()) {
        throw Error(ErrorCode::invalid_argument, "rule-based farm has no input memory");
    }
    double ratio = 1.0;
    if (previous_price > 0.0) {
        ratio = env.wheat_price / previous_price;
    } else if (env.wheat_price > 0.0) {
        ratio = std::numeric_limits<double>::infinity();
    }
    const double scale = std::clamp(std::pow(ratio, kRuleElasticity), kRuleScaleMin, kRuleScaleMax);
    Decision d;
    d.inputs.resize(farm.last_inputs.size());
    for (std::size_t i = 0; i < d.inputs.size(); ++i) {
        d.inputs[i] = std::min(farm.last_inputs[i] * scale, env.input_caps[i]);
    }
    d.target_yield = yield_response(farm, d.inputs);
    d.expected_profit = profit(farm, env, d.inputs);
    return d;
}

Decision decide(const Farm& farm, const DecisionEnvironment& env) {
    if (farm.behavior == Behavior::optimizer) return optimize_multi(farm, env);
    return rule_based_decide(farm, env, farm.last_price);
}

double season_shock(const ShockParams& shock, std::uint64_t farm_id, std::uint64_t season) {
    if (shock.sigma_log == 0.0) return 1.0;
    KeyedRng rng(shock.seed, {0x73686f636bULL, farm_id, season});
    return std::exp(shock.sigma_log * rng.normal());
}

Outcome realize_yield(const Decision& decision, const Farm& farm, const DecisionEnvironment& env,
                      const ShockParams& shock, std::uint64_t season) {
    Outcome o;
    o.actual_yield = std::min(farm.potential_yield, decision.target_yield * season_shock(shock, farm.id, season));
    o.yield_gap = farm.potential_yield - o.actual_yield;
    o.production = o.actual_yield * farm.area;
    double cost = 0.0;
    for (std::size_t i = 0; i < decision.inputs.size(); ++i) cost += env.input_prices[i] * decision.inputs[i];
    o.realized_profit = (env.wheat_price * o.actual_yield - cost + env.per_ha_payment) * farm.area;
    return o;
}

std::array<double, kStressKinds> record_inputs(const population::FarmRecord& r) {
    return {r[Variable::fert_n] + r[Variable::fert_p] + r[Variable::fert_k], r[Variable::herbicide],
            r[Variable::insecticide], r[Variable::fungicide]};
}

double calibrate_response_rate(double input, double loss_share, double effective_yield, double wheat_price,
                               double input_price, double lo, double hi) {
    // x*(lambda) = ln(c lambda) / lambda peaks at lambda = e / c with value c / e
    // and decreases beyond it.
    const double c = wheat_price * loss_share * effective_yield / input_price;
    const double peak = std::numbers::e / c;
    if (!(input > 0.0)) return hi;
    if (input >= c / std::numbers::e) return std::clamp(peak, lo, hi);
    auto optimum = [c](double lambda) { return std::log(c * lambda) / lambda; };
    double a = peak;
    double b = std::max(peak, lo) * 2.0;
    while (optimum(b) > input && b < hi) b *= 2.0;
    if (optimum(b) > input) return hi;
    for (int it = 0; it < 200 && b - a > 1e-14 * b; ++it) {
        const double m = 0.5 * (a + b);
        (optimum(m) > input ? a : b) = m;
    }
    return std::clamp(0.5 * (a + b), lo, hi);
}

std::vector<Farm> build_farms(const population::SyntheticPopulation& pop, const Calibration& cal, std::uint64_t seed) {
    if (pop.farms.empty()) throw Error(ErrorCode::invalid_argument, "build_farms: empty population");

    struct ClusterStats {
        std::size_t count = 0;
        std::array<double, kStressKinds> inputs{};
        std::array<double, 3> npk{};
        std::array<double, kStressKinds> response{};
    };
    std::map<int, ClusterStats> clusters;
    for (const auto& r : pop.farms) {
        auto& cs = clusters[r.cluster_id];
        ++cs.count;
        const auto in = record_inputs(r);
        for (std::size_t k = 0; k < kStressKinds; ++k) cs.inputs[k] += in[k];
        cs.npk[0] += r[Variable::fert_n];
        cs.npk[1] += r[Variable::fert_p];
        cs.npk[2] += r[Variable::fert_k];
    }

    auto yield_range = [&](int cluster) -> std::array<double, 2> {
        if (cluster >= 0 && static_cast<std::size_t>(cluster) < cal.cluster_potential_yield.size()) {
            return cal.cluster_potential_yield[static_cast<std::size_t>(cluster)];
        }
        return {cal.potential_yield_min, cal.potential_yield_max};
    };

    for (auto& [id, cs] : clusters) {
        for (auto& v : cs.inputs) v /= static_cast<double>(cs.count);
        const auto range = yield_range(id);
        const double ybar = 0.5 * (range[0] + range[1]);
        // Each factor is calibrated against the yield the other factors leave
        // at their optimal inputs. Where a rate is interior that optimum is the
        // cluster mean; where it is clamped, the clamped optimum is used.
        std::array<double, kStressKinds> x = cs.inputs;
        cs.response.fill(1.0);
        for (int pass = 0; pass < 200; ++pass) {
            for (std::size_t k = 0; k < kStressKinds; ++k) {
                double others = ybar;
                for (std::size_t j = 0; j < kStressKinds; ++j) {
                    if (j != k) others *= 1.0 - cal.loss_share[j] * std::exp(-cs.response[j] * x[j]);
                }
                const double lambda =
                    calibrate_response_rate(cs.inputs[k], cal.loss_share[k], others, cal.reference_wheat_price,
                                            cal.input_price[k], cal.min_response_rate, cal.max_response_rate);
                const double c = cal.reference_wheat_price * cal.loss_share[k] * others / cal.input_price[k];
                cs.response[k] = lambda;
                x[k] = std::max(0.0, std::log(c * lambda) / lambda);
            }
        }
    }

    std::vector<Farm> farms;
    farms.reserve(pop.farms.size());
    for (std::size_t idx = 0; idx < pop.farms.size(); ++idx) {
        const auto& r = pop.farms[idx];
        const auto& cs = clusters.at(r.cluster_id);
        Farm f;
        f.id = idx;
        f.cluster_id = r.cluster_id;
        f.area = r.area();
        f.machinery_hours = r[Variable::tractor_hours_per_ha];
        const double npk = r[Variable::fert_n] + r[Variable::fert_p] + r[Variable::fert_k];
        const double cluster_npk = cs.npk[0] + cs.npk[1] + cs.npk[2];
        if (npk > 0.0) {
            f.npk_split = {r[Variable::fert_n] / npk, r[Variable::fert_p] / npk, r[Variable::fert_k] / npk};
        } else if (cluster_npk > 0.0) {
            f.npk_split = {cs.npk[0] / cluster_npk, cs.npk[1] / cluster_npk, cs.npk[2] / cluster_npk};
        }
        const auto range = yield_range(r.cluster_id);
        KeyedRng rng(seed, {0x7962617259ULL, idx});
        f.potential_yield = rng.uniform(range[0], range[1]);
        for (std::size_t k = 0; k < kStressKinds; ++k) {
            f.stress_factors.push_back(
                {static_cast<StressKind>(k), cal.loss_share[k], cs.response[k], cal.input_price[k]});
        }
        f.behavior = f.area >= cal.size_threshold_ha ? Behavior::optimizer : Behavior::rule_based;
        f.last_inputs.assign(cs.inputs.begin(), cs.inputs.end());
        f.last_price = cal.reference_wheat_price;
        f.validate();
        farms.push_back(std::move(f));
    }
    return farms;
}

}  // namespace wheatsim::agronomy
