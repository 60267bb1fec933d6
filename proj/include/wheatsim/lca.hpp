#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wheatsim/agronomy.hpp"

namespace wheatsim::lca {

/// Physical flows tracked per farm, in inventory order.
enum class Flow : std::size_t {
    diesel,
    fert_n,
    fert_p,
    fert_k,
    herbicide,
    insecticide,
    fungicide,
    machinery,
};
inline constexpr std::size_t kFlowCount = 8;
inline constexpr std::array<std::string_view, kFlowCount> kFlowNames = {
    "diesel_l", "fert_n_kg", "fert_p_kg", "fert_k_kg", "herbicide_kg", "insecticide_kg", "fungicide_kg", "machinery_h"};

inline constexpr std::size_t kEndpointCount = 3;
inline constexpr std::array<std::string_view, kEndpointCount> kEndpointNames = {"DALY", "species_yr", "cost"};

enum class FunctionalUnit { per_hectare, per_tonne };

using Flows = std::array<double, kFlowCount>;

struct Inventory {
    std::uint64_t farm_id = 0;
    FunctionalUnit unit = FunctionalUnit::per_hectare;
    Flows flows{};

    double operator[](Flow f) const { return flows[static_cast<std::size_t>(f)]; }
};

/// Linear maps flows -> midpoint categories -> endpoints. Rows of the
/// midpoint matrix follow kFlowNames order regardless of file order.
class CharacterizationMatrix {
  public:
    CharacterizationMatrix() = default;
    CharacterizationMatrix(std::vector<std::string> flow_names, std::vector<std::string> categories,
                           std::vector<double> midpoint, std::vector<double> endpoint, std::string metadata = {});

    static CharacterizationMatrix load(const std::filesystem::path& midpoint_csv,
                                       const std::filesystem::path& endpoint_csv);

    std::size_t flow_count() const { return flow_names_.size(); }
    std::size_t category_count() const { return categories_.size(); }
    const std::vector<std::string>& flow_names() const { return flow_names_; }
    const std::vector<std::string>& categories() const { return categories_; }
    const std::string& metadata() const { return metadata_; }

    double midpoint_factor(std::size_t flow, std::size_t category) const {
        return midpoint_[flow * categories_.size() + category];
    }
    double endpoint_factor(std::size_t category, std::size_t endpoint) const {
        return endpoint_[category * kEndpointCount + endpoint];
    }
    std::size_t category_index(std::string_view name) const;

  private:
    std::vector<std::string> flow_names_;
    std::vector<std::string> categories_;
    std::vector<double> midpoint_;  // flows x categories, row-major
    std::vector<double> endpoint_;  // categories x 3, row-major
    std::string metadata_;
};

struct ImpactResult {
    std::uint64_t farm_id = 0;
    std::vector<double> midpoints;
    std::array<double, kEndpointCount> endpoints{};
};

struct InventoryCoefficients {
    double diesel_l_per_hour = 8.0;
};

/// Per-hectare flows from a farm's applied inputs and machinery use.
/// Per-tonne divides by the actual yield and needs it to be positive.
Inventory build_inventory(const agronomy::Farm& farm, const agronomy::Decision& decision,
                          const agronomy::Outcome& outcome, const InventoryCoefficients& coefficients,
                          FunctionalUnit unit = FunctionalUnit::per_hectare);

/// midpoints = flows . M, endpoints = midpoints . E.
ImpactResult characterize(std::span<const double> flows, const CharacterizationMatrix& matrix,
                          std::uint64_t farm_id = 0);
ImpactResult characterize(const Inventory& inventory, const CharacterizationMatrix& matrix);

struct NationalImpact {
    ImpactResult totals;      // sum over farms of per-ha impact x area
    ImpactResult per_tonne;   // totals / production; zero when nothing was produced
    Flows flow_totals{};      // sum over farms of per-ha flows x area
    double production = 0.0;  // t
    double area = 0.0;        // ha
};

/// Fixed-order reduction over farms (index order). `inventories` may be empty
/// when flow totals are not needed.
NationalImpact aggregate_national(std::span<const ImpactResult> per_hectare, std::span<const agronomy::Farm> farms,
                                  std::span<const double> production, std::span<const Inventory> inventories = {});

/// Header of the per-farm impact export.
std::vector<std::string> impact_header(const CharacterizationMatrix& matrix);
/// One export row: per-hectare midpoints and endpoints, then per-tonne (empty
/// fields when the farm produced nothing).
std::vector<std::string> impact_row(const ImpactResult& per_hectare, double actual_yield);

}  // namespace wheatsim::lca
