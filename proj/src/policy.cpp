#include "wheatsim/policy.hpp"

#include <algorithm>
#include <cmath>

#include "wheatsim/error.hpp"

namespace wheatsim::policy {

namespace {

constexpr std::string_view kKindNames[] = {"input_tax", "input_subsidy", "per_ha_green_payment", "input_cap_mandatory",
                                           "input_cap_voluntary"};

bool contains(std::span<const std::string> ids, const std::string& id) {
    return std::find(ids.begin(), ids.end(), id) != ids.end();
}

}  // namespace

SchemeKind parse_scheme_kind(std::string_view name) {
    for (std::size_t i = 0; i < std::size(kKindNames); ++i) {
        if (kKindNames[i] == name) return static_cast<SchemeKind>(i);
    }
    throw Error(ErrorCode::validation, "unknown policy kind '" + std::string(name) + "'");
}

const char* to_string(SchemeKind kind) { return kKindNames[static_cast<std::size_t>(kind)].data(); }

void PolicyScheme::validate() const {
    const auto where = "policy " + id + ": ";
    if (!(rate >= 0.0)) throw Error(ErrorCode::validation, where + "rate must be >= 0");
    if (!(cap >= 0.0)) throw Error(ErrorCode::validation, where + "cap must be >= 0");
    if (!(payment >= 0.0) || !std::isfinite(payment)) throw Error(ErrorCode::validation, where + "payment must be >= 0");
    switch (kind) {
        case SchemeKind::input_subsidy:
            if (!(rate < 1.0)) throw Error(ErrorCode::validation, where + "subsidy rate must be < 1");
            [[fallthrough]];
        case SchemeKind::input_tax:
        case SchemeKind::input_cap_mandatory:
        case SchemeKind::input_cap_voluntary:
            if (!input) throw Error(ErrorCode::validation, where + "needs an 'input' stress kind");
            break;
        case SchemeKind::per_ha_green_payment: break;
    }
}

agronomy::DecisionEnvironment apply_policy(const agronomy::Farm& farm, std::span<const PolicyScheme> schemes,
                                           double wheat_price, std::span<const std::string> adopted) {
    auto env = agronomy::DecisionEnvironment::raw(farm, wheat_price);
    const bool in_voluntary_scheme = std::any_of(schemes.begin(), schemes.end(), [&](const PolicyScheme& s) {
        return s.voluntary() && contains(adopted, s.id);
    });
    for (const auto& s : schemes) {
        if (s.kind == SchemeKind::per_ha_green_payment) {
            if (!s.coupled || in_voluntary_scheme) env.per_ha_payment += s.payment;
            continue;
        }
        if (s.voluntary() && !contains(adopted, s.id)) continue;
        if (s.voluntary()) env.per_ha_payment += s.payment;
        for (std::size_t i = 0; i < farm.stress_factors.size(); ++i) {
            if (farm.stress_factors[i].kind != *s.input) continue;
            switch (s.kind) {
                case SchemeKind::input_tax: env.input_prices[i] *= 1.0 + s.rate; break;
                case SchemeKind::input_subsidy: env.input_prices[i] *= 1.0 - s.rate; break;
                case SchemeKind::input_cap_mandatory:
                case SchemeKind::input_cap_voluntary: env.input_caps[i] = std::min(env.input_caps[i], s.cap); break;
                case SchemeKind::per_ha_green_payment: break;
            }
        }
    }
    return env;
}

bool decide_adoption(const agronomy::Farm& farm, const PolicyScheme& scheme, std::span<const PolicyScheme> schemes,
                     double wheat_price, std::span<const std::string> adopted) {
    if (!scheme.voluntary()) throw Error(ErrorCode::invalid_argument, "decide_adoption: scheme " + scheme.id + " is not voluntary");
    std::vector<PolicyScheme> in_force(schemes.begin(), schemes.end());
    if (std::none_of(in_force.begin(), in_force.end(), [&](const PolicyScheme& s) { return s.id == scheme.id; })) {
        in_force.push_back(scheme);
    }
    std::vector<std::string> with(adopted.begin(), adopted.end());
    with.push_back(scheme.id);
    const double without_profit = agronomy::decide(farm, apply_policy(farm, in_force, wheat_price, adopted)).expected_profit;
    const double with_profit = agronomy::decide(farm, apply_policy(farm, in_force, wheat_price, with)).expected_profit;
    return with_profit >= without_profit - kAdoptionTieTolerance * std::max(1.0, std::abs(without_profit));
}

}  // namespace wheatsim::policy
