#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "wheatsim/error.hpp"
#include "wheatsim/lca.hpp"
#include "wheatsim/rng.hpp"

using namespace wheatsim;
using namespace wheatsim::lca;
using agronomy::StressKind;
using testing::factor;
using testing::make_farm;
using testing::rel_err;

namespace {

CharacterizationMatrix bundled() {
    return CharacterizationMatrix::load(testing::data_dir() / "lca" / "midpoint.csv", testing::data_dir() / "lca" / "endpoint.csv");
}

agronomy::Farm four_factor_farm() {
    auto farm = make_farm(5.0, {factor(0.4, 0.02, 0.6, StressKind::nutrition), factor(0.2, 2, 25, StressKind::weeds),
                                factor(0.06, 10, 30, StressKind::pests), factor(0.1, 5, 22, StressKind::fungi)});
    farm.npk_split = {0.6, 0.3, 0.1};
    return farm;
}

agronomy::Decision decision(std::vector<double> x) {
    agronomy::Decision d;
    d.inputs = std::move(x);
    return d;
}

std::filesystem::path write_matrix_files(const std::string& name, const std::string& mid, const std::string& end) {
    const auto dir = testing::scratch_dir("lca_" + name);
    testing::write_text(dir / "mid.csv", mid);
    testing::write_text(dir / "end.csv", end);
    return dir;
}

const std::string kEndpointFile =
    "category,DALY,species_yr,cost\nclimate,1,0,0\nwater,0,1,2\n";

std::string midpoint_file(const std::vector<std::string>& flows) {
    std::string s = "# test matrix\nflow,climate,water\n";
    for (std::size_t i = 0; i < flows.size(); ++i) s += flows[i] + "," + std::to_string(i + 1) + ",0.5\n";
    return s;
}

}  // namespace

TEST_CASE("inventory: zero inputs and machinery give zero flows") {
    auto farm = four_factor_farm();
    farm.machinery_hours = 0.0;
    const auto inv = build_inventory(farm, decision({0, 0, 0, 0}), {}, {});
    for (double v : inv.flows) CHECK(v == 0.0);
}

TEST_CASE("inventory: inputs map to flows, doubling doubles") {
    const auto farm = four_factor_farm();
    const auto a = build_inventory(farm, decision({100, 1.5, 0.2, 0.8}), {}, {});
    CHECK(a[Flow::fert_n] == doctest::Approx(60.0).epsilon(1e-15));
    CHECK(a[Flow::fert_p] == doctest::Approx(30.0).epsilon(1e-15));
    CHECK(a[Flow::fert_k] == doctest::Approx(10.0).epsilon(1e-15));
    CHECK(a[Flow::herbicide] == 1.5);
    CHECK(a[Flow::insecticide] == 0.2);
    CHECK(a[Flow::fungicide] == 0.8);
    const auto b = build_inventory(farm, decision({200, 3.0, 0.4, 1.6}), {}, {});
    for (auto f : {Flow::fert_n, Flow::fert_p, Flow::fert_k, Flow::herbicide, Flow::insecticide, Flow::fungicide}) {
        CHECK(b[f] == 2.0 * a[f]);
    }
}

TEST_CASE("inventory: diesel from machinery hours") {
    auto farm = four_factor_farm();
    farm.machinery_hours = 10.0;
    const auto inv = build_inventory(farm, decision({0, 0, 0, 0}), {}, {8.0});
    CHECK(inv[Flow::diesel] == 80.0);
    CHECK(inv[Flow::machinery] == 10.0);
}

TEST_CASE("inventory: per-tonne divides by actual yield") {
    const auto farm = four_factor_farm();
    agronomy::Outcome o;
    o.actual_yield = 4.0;
    const auto ha = build_inventory(farm, decision({100, 1, 0.1, 0.5}), o, {});
    const auto t = build_inventory(farm, decision({100, 1, 0.1, 0.5}), o, {}, FunctionalUnit::per_tonne);
    CHECK(t.unit == FunctionalUnit::per_tonne);
    for (std::size_t f = 0; f < kFlowCount; ++f) CHECK(t.flows[f] == doctest::Approx(ha.flows[f] / 4.0).epsilon(1e-15));
    o.actual_yield = 0.0;
    CHECK_THROWS_AS(build_inventory(farm, decision({100, 1, 0.1, 0.5}), o, {}, FunctionalUnit::per_tonne), Error);
}

TEST_CASE("characterization: bundled matrices load with metadata") {
    const auto m = bundled();
    CHECK(m.flow_count() == 8);
    CHECK(m.category_count() == 6);
    CHECK(m.metadata().find("Illustrative") != std::string::npos);
    CHECK(m.midpoint_factor(0, m.category_index("climate_change_kg_co2eq")) == 3.2);
    CHECK(m.endpoint_factor(m.category_index("fossil_depletion_kg_oileq"), 2) == 0.457);
}

TEST_CASE("characterization: zero inventory maps to zero") {
    const auto m = bundled();
    const Flows zero{};
    const auto r = characterize(zero, m);
    for (double v : r.midpoints) CHECK(v == 0.0);
    for (double v : r.endpoints) CHECK(v == 0.0);
}

TEST_CASE("characterization: identity-like one-flow matrix") {
    const CharacterizationMatrix m({"x"}, {"c"}, {1.0}, {1.0, 0.0, 0.0});
    const double flow[] = {3.25};
    const auto r = characterize(flow, m);
    CHECK(r.midpoints[0] == 3.25);
    CHECK(r.endpoints[0] == 3.25);
    CHECK(r.endpoints[1] == 0.0);
}

TEST_CASE("characterization: 3-flow, 2-category hand product") {
    // M = [[1, 2], [0.5, 0], [3, 4]], E = [[1, 0, 10], [0, 2, 0]]
    const CharacterizationMatrix m({"a", "b", "c"}, {"u", "v"}, {1, 2, 0.5, 0, 3, 4}, {1, 0, 10, 0, 2, 0});
    const double flows[] = {2, 4, 1};
    const auto r = characterize(flows, m);
    // u = 2 + 2 + 3 = 7, v = 4 + 0 + 4 = 8
    CHECK(r.midpoints == std::vector<double>{7, 8});
    CHECK(r.endpoints[0] == 7);
    CHECK(r.endpoints[1] == 16);
    CHECK(r.endpoints[2] == 70);
    const double wrong[] = {1, 2};
    CHECK_THROWS_AS(characterize(wrong, m), Error);
}

TEST_CASE("characterization: linear and additive on random inventories") {
    const auto m = bundled();
    KeyedRng rng(12, {12});
    for (int t = 0; t < 500; ++t) {
        Flows a{}, b{}, sum{}, scaled{};
        const double alpha = rng.uniform(0, 50);
        for (std::size_t f = 0; f < kFlowCount; ++f) {
            a[f] = rng.uniform(0, 200);
            b[f] = rng.uniform(0, 200);
            sum[f] = a[f] + b[f];
            scaled[f] = alpha * a[f];
        }
        const auto ra = characterize(a, m), rb = characterize(b, m), rs = characterize(sum, m), rx = characterize(scaled, m);
        for (std::size_t c = 0; c < m.category_count(); ++c) {
            CHECK(rel_err(rs.midpoints[c], ra.midpoints[c] + rb.midpoints[c]) <= 1e-12);
            CHECK(rel_err(rx.midpoints[c], alpha * ra.midpoints[c]) <= 1e-12);
        }
        for (std::size_t e = 0; e < kEndpointCount; ++e) {
            CHECK(rel_err(rs.endpoints[e], ra.endpoints[e] + rb.endpoints[e]) <= 1e-12);
            CHECK(rel_err(rx.endpoints[e], alpha * ra.endpoints[e]) <= 1e-12);
        }
    }
}

TEST_CASE("characterization: file order does not matter, bad files are rejected") {
    const std::vector<std::string> flows(kFlowNames.begin(), kFlowNames.end());
    auto reversed = flows;
    std::reverse(reversed.begin(), reversed.end());
    const auto d1 = write_matrix_files("fwd", midpoint_file(flows), kEndpointFile);
    const auto d2 = write_matrix_files("rev", midpoint_file(reversed), kEndpointFile);
    const auto m1 = CharacterizationMatrix::load(d1 / "mid.csv", d1 / "end.csv");
    const auto m2 = CharacterizationMatrix::load(d2 / "mid.csv", d2 / "end.csv");
    CHECK(m1.metadata() == "test matrix");
    // Row f of m2 came from line (8 - f) of the reversed file.
    for (std::size_t f = 0; f < kFlowCount; ++f) {
        CHECK(m1.midpoint_factor(f, 0) == static_cast<double>(f + 1));
        CHECK(m2.midpoint_factor(f, 0) == static_cast<double>(kFlowCount - f));
    }

    auto unknown = flows;
    unknown[3] = "uranium_kg";
    const auto d3 = write_matrix_files("unknown", midpoint_file(unknown), kEndpointFile);
    CHECK_THROWS_AS(CharacterizationMatrix::load(d3 / "mid.csv", d3 / "end.csv"), Error);
    auto missing = flows;
    missing.pop_back();
    const auto d4 = write_matrix_files("missing", midpoint_file(missing), kEndpointFile);
    CHECK_THROWS_AS(CharacterizationMatrix::load(d4 / "mid.csv", d4 / "end.csv"), Error);
    const auto d5 = write_matrix_files("endcols", midpoint_file(flows), "category,DALY,cost\nclimate,1,0\nwater,0,1\n");
    CHECK_THROWS_AS(CharacterizationMatrix::load(d5 / "mid.csv", d5 / "end.csv"), Error);
    const auto d6 = write_matrix_files("endrows", midpoint_file(flows), "category,DALY,species_yr,cost\nclimate,1,0,0\n");
    CHECK_THROWS_AS(CharacterizationMatrix::load(d6 / "mid.csv", d6 / "end.csv"), Error);
    const auto d7 = write_matrix_files("nan", midpoint_file(flows) + "", "category,DALY,species_yr,cost\nclimate,x,0,0\nwater,0,1,2\n");
    CHECK_THROWS_AS(CharacterizationMatrix::load(d7 / "mid.csv", d7 / "end.csv"), Error);
    CHECK_THROWS_AS(CharacterizationMatrix::load(d1 / "none.csv", d1 / "end.csv"), Error);
}

TEST_CASE("national: single farm, identical farms") {
    const auto m = bundled();
    const auto farm = four_factor_farm();
    const auto inv = build_inventory(farm, decision({100, 1.5, 0.2, 0.8}), {}, {});
    const auto per_ha = characterize(inv, m);

    const std::vector<agronomy::Farm> one = {farm};
    const std::vector<ImpactResult> r1 = {per_ha};
    const std::vector<double> p1 = {40.0};
    const std::vector<Inventory> i1 = {inv};
    const auto n1 = aggregate_national(r1, one, p1, i1);
    for (std::size_t c = 0; c < m.category_count(); ++c) CHECK(n1.totals.midpoints[c] == per_ha.midpoints[c] * farm.area);
    for (std::size_t e = 0; e < kEndpointCount; ++e) {
        CHECK(n1.totals.endpoints[e] == per_ha.endpoints[e] * farm.area);
        CHECK(n1.per_tonne.endpoints[e] == doctest::Approx(per_ha.endpoints[e] * farm.area / 40.0).epsilon(1e-15));
    }
    CHECK(n1.flow_totals[1] == inv.flows[1] * farm.area);
    CHECK(n1.area == farm.area);

    const std::vector<agronomy::Farm> two = {farm, farm};
    const std::vector<ImpactResult> r2 = {per_ha, per_ha};
    const std::vector<double> p2 = {40.0, 40.0};
    const auto n2 = aggregate_national(r2, two, p2);
    for (std::size_t c = 0; c < m.category_count(); ++c) CHECK(n2.totals.midpoints[c] == 2 * n1.totals.midpoints[c]);
    for (std::size_t e = 0; e < kEndpointCount; ++e) CHECK(n2.totals.endpoints[e] == 2 * n1.totals.endpoints[e]);
    CHECK(n2.production == 80.0);

    const std::vector<double> nothing = {0.0};
    const auto n0 = aggregate_national(r1, one, nothing);
    for (double v : n0.per_tonne.endpoints) CHECK(v == 0.0);
    CHECK_THROWS_AS(aggregate_national(r2, one, p1), Error);
}

TEST_CASE("export: per-tonne columns empty when nothing was produced") {
    const auto m = bundled();
    const auto header = impact_header(m);
    ImpactResult r;
    r.farm_id = 9;
    r.midpoints.assign(m.category_count(), 2.0);
    r.endpoints = {1.0, 2.0, 4.0};
    const auto row = impact_row(r, 4.0);
    REQUIRE(row.size() == header.size());
    CHECK(row[0] == "9");
    CHECK(row[1] == "2");
    CHECK(row.back() == "1");
    const auto empty = impact_row(r, 0.0);
    CHECK(empty.back().empty());
    CHECK(empty[1 + m.category_count()] == "1");
}
