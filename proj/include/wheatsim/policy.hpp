#pragma once

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wheatsim/agronomy.hpp"

namespace wheatsim::policy {

enum class SchemeKind {
    input_tax,             // p_i *= 1 + rate
    input_subsidy,         // p_i *= 1 - rate
    per_ha_green_payment,  // flat payment; if coupled, only to farms in a voluntary scheme
    input_cap_mandatory,   // x_i <= cap for every farm
    input_cap_voluntary,   // x_i <= cap plus payment, for adopters only
};

SchemeKind parse_scheme_kind(std::string_view name);
const char* to_string(SchemeKind kind);

struct PolicyScheme {
    std::string id;
    SchemeKind kind = SchemeKind::input_tax;
    std::optional<agronomy::StressKind> input;  // targeted input, where applicable
    double rate = 0.0;
    double cap = std::numeric_limits<double>::infinity();
    double payment = 0.0;  // currency/ha
    bool coupled = false;

    bool voluntary() const { return kind == SchemeKind::input_cap_voluntary; }
    void validate() const;
};

/// Effective decision environment of a farm: adjusted input prices, caps as
/// box constraints, per-hectare payments. Voluntary schemes count only when
/// their id is in `adopted`.
agronomy::DecisionEnvironment apply_policy(const agronomy::Farm& farm, std::span<const PolicyScheme> schemes,
                                           double wheat_price, std::span<const std::string> adopted = {});

/// Relative slack under which adoption counts as a tie (ties adopt).
inline constexpr double kAdoptionTieTolerance = 1e-9;

/// True iff the farm's best profit with the scheme (cap plus payment) is at
/// least its best profit without, given the schemes already adopted.
bool decide_adoption(const agronomy::Farm& farm, const PolicyScheme& scheme, std::span<const PolicyScheme> schemes,
                     double wheat_price, std::span<const std::string> adopted = {});

}  // namespace wheatsim::policy
