#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "support.hpp"
#include "wheatsim/agronomy.hpp"
#include "wheatsim/error.hpp"
#include "wheatsim/population.hpp"

using namespace wheatsim;
using namespace wheatsim::agronomy;
using testing::factor;
using testing::make_farm;
using testing::rel_err;

namespace {

/// Golden-section maximum of a unimodal function on [a, b].
template <class F>
double golden_max(F f, double a, double b) {
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    for (int i = 0; i < 300 && b - a > 1e-13 * std::max(1.0, std::abs(b)); ++i) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

/// Exhaustive 2-D grid maximum of p_w * ybar * f1(x1) * f2(x2) - p1 x1 - p2 x2.
/// For each x1 the best x2 is found by scanning; since the x2-objective is
/// concave along the grid and its maximizer is nondecreasing in x1's yield
/// multiplier, a forward-only scan over x1 sorted by that multiplier visits
/// the same maximum as a full double loop.
struct GridBest {
    double profit = -std::numeric_limits<double>::infinity();
    double x1 = 0.0;
    double x2 = 0.0;
};

GridBest grid_search_2d(const Farm& farm, double pw, double step, double max1, double max2, bool brute = false) {
    const auto& a = farm.stress_factors[0];
    const auto& b = farm.stress_factors[1];
    const auto n1 = static_cast<std::size_t>(std::llround(max1 / step)) + 1;
    const auto n2 = static_cast<std::size_t>(std::llround(max2 / step)) + 1;
    std::vector<double> f2(n2), c2(n2);
    for (std::size_t j = 0; j < n2; ++j) {
        const double x = static_cast<double>(j) * step;
        f2[j] = b.factor(x);
        c2[j] = b.input_price * x;
    }
    GridBest best;
    std::size_t j = 0;
    for (std::size_t i = 0; i < n1; ++i) {
        const double x1 = static_cast<double>(i) * step;
        const double amp = pw * farm.potential_yield * a.factor(x1);
        const double c1 = a.input_price * x1;
        if (brute) {
            for (std::size_t k = 0; k < n2; ++k) {
                const double p = amp * f2[k] - c2[k] - c1;
                if (p > best.profit) best = {p, x1, static_cast<double>(k) * step};
            }
        } else {
            while (j + 1 < n2 && amp * f2[j + 1] - c2[j + 1] >= amp * f2[j] - c2[j]) ++j;
            const double p = amp * f2[j] - c2[j] - c1;
            if (p > best.profit) best = {p, x1, static_cast<double>(j) * step};
        }
    }
    return best;
}

double profit_at(const Farm& farm, double pw, std::vector<double> x) {
    return profit(farm, DecisionEnvironment::raw(farm, pw), x);
}

}  // namespace

TEST_CASE("yield response: closed expression and limits") {
    const auto farm = make_farm(6.0, {factor(0.4, 0.05, 1.0), factor(0.2, 0.1, 1.0)});
    const double x[] = {20.0, 10.0};
    const double expected = 6.0 * (1.0 - 0.4 * std::exp(-1.0)) * (1.0 - 0.2 * std::exp(-1.0));
    CHECK(rel_err(yield_response(farm, x), expected) < 1e-15);
    CHECK(yield_response(farm, x) == doctest::Approx(4.740594947736382).epsilon(1e-14));

    const double big[] = {1e6, 1e6};
    CHECK(yield_response(farm, big) == 6.0);
    const auto single = make_farm(5.0, {factor(0.3, 0.2, 1.0)});
    const double zero[] = {0.0};
    CHECK(yield_response(single, zero) == doctest::Approx(5.0 * 0.7).epsilon(1e-15));
}

TEST_CASE("single factor: closed form matches golden-section search") {
    const auto farm = make_farm(6.0, {factor(0.4, 0.05, 1.0)});
    const auto d = optimize_single(farm, 250.0);
    CHECK(d.target_yield == doctest::Approx(5.92).epsilon(1e-12));
    CHECK(d.inputs[0] == doctest::Approx(20.0 * std::log(30.0)).epsilon(1e-12));
    CHECK(d.inputs[0] == doctest::Approx(68.02).epsilon(1e-4));

    const double xg = golden_max([&](double x) { return profit_at(farm, 250.0, {x}); }, 0.0, 500.0);
    CHECK(std::abs(xg - d.inputs[0]) < 1e-4);
    CHECK(d.expected_profit >= profit_at(farm, 250.0, {xg}) - 1e-9);
}

TEST_CASE("single factor: corner solutions") {
    const double ybar = 6.0, s = 0.4, lambda = 0.05, pw = 250.0;
    const double corner = pw * lambda * s * ybar;
    auto at = [&](double px) { return optimize_single(make_farm(ybar, {factor(s, lambda, px)}), pw); };

    const auto exact = at(corner);
    CHECK(exact.inputs[0] == 0.0);
    CHECK(exact.target_yield == doctest::Approx(ybar * (1 - s)).epsilon(1e-14));
    CHECK(at(10 * corner).inputs[0] == 0.0);
    CHECK(at(10 * corner).target_yield == doctest::Approx(ybar * (1 - s)).epsilon(1e-14));

    // Profit is continuous through the corner price.
    const double eps = corner * 1e-9;
    CHECK(std::abs(at(corner - eps).expected_profit - at(corner + eps).expected_profit) < 1e-6);
    CHECK(at(corner - eps).inputs[0] > 0.0);
    CHECK(at(corner - eps).inputs[0] < 1e-6);
}

TEST_CASE("single factor: cap below the optimum binds exactly") {
    const auto farm = make_farm(6.0, {factor(0.4, 0.05, 1.0)});
    auto env = DecisionEnvironment::raw(farm, 250.0);
    env.input_caps[0] = 40.0;
    const auto d = optimize_single(farm, env);
    CHECK(d.inputs[0] == 40.0);
    // Grid oracle restricted to [0, cap].
    double best = -1e300, bx = -1;
    for (int i = 0; i <= 40000; ++i) {
        const double x = i * 1e-3;
        const double p = profit(farm, env, std::vector<double>{x});
        if (p > best) best = p, bx = x;
    }
    CHECK(bx == doctest::Approx(40.0));
    CHECK(d.expected_profit == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("single factor: randomized closed form against search") {
    KeyedRng rng(3, {3});
    for (int t = 0; t < 300; ++t) {
        const double ybar = rng.uniform(2, 9), s = rng.uniform(0.05, 0.6), lambda = rng.uniform(0.01, 3);
        const double pw = rng.uniform(100, 500), px = rng.uniform(0.1, 40);
        const auto farm = make_farm(ybar, {factor(s, lambda, px)});
        const auto d = optimize_single(farm, pw);
        const double hi = std::max(1.0, 50.0 / lambda);
        const double xg = golden_max([&](double x) { return profit_at(farm, pw, {x}); }, 0.0, hi);
        const double pg = profit_at(farm, pw, {xg});
        CHECK(d.expected_profit >= pg - 1e-9 * std::max(1.0, std::abs(pg)));
        CHECK(std::abs(d.inputs[0] - xg) < 1e-4 * std::max(1.0, xg));
    }
}

TEST_CASE("multi factor: one factor reduces to the closed form") {
    KeyedRng rng(4, {4});
    for (int t = 0; t < 100; ++t) {
        const auto farm = make_farm(rng.uniform(3, 7), {factor(rng.uniform(0.1, 0.5), rng.uniform(0.02, 2), rng.uniform(0.5, 20))});
        const double pw = rng.uniform(150, 400);
        const auto a = optimize_single(farm, pw);
        const auto b = optimize_multi(farm, pw);
        CHECK(std::abs(a.inputs[0] - b.inputs[0]) <= 1e-9 * std::max(1.0, a.inputs[0]));
        CHECK(rel_err(a.expected_profit, b.expected_profit) <= 1e-9);
    }
}

TEST_CASE("multi factor: two factors against an exhaustive grid") {
    const auto farm = make_farm(6.0, {factor(0.4, 0.05, 1.0), factor(0.2, 0.1, 1.0)});
    const auto d = optimize_multi(farm, 250.0);
    REQUIRE(d.converged);
    const auto grid = grid_search_2d(farm, 250.0, 1e-3, 150.0, 80.0);
    CHECK(d.expected_profit >= grid.profit - 1e-9);
    CHECK(d.expected_profit - grid.profit < 1e-5);
    CHECK(std::abs(d.inputs[0] - grid.x1) < 2e-3);
    CHECK(std::abs(d.inputs[1] - grid.x2) < 2e-3);
}

TEST_CASE("grid oracle: monotone scan equals the full double loop") {
    KeyedRng rng(9, {9});
    for (int t = 0; t < 5; ++t) {
        const auto farm = make_farm(rng.uniform(3, 7), {factor(rng.uniform(0.1, 0.5), rng.uniform(0.5, 2), rng.uniform(1, 10)),
                                                       factor(rng.uniform(0.1, 0.5), rng.uniform(0.5, 2), rng.uniform(1, 10))});
        const auto fast = grid_search_2d(farm, 250.0, 1e-2, 12.0, 12.0);
        const auto slow = grid_search_2d(farm, 250.0, 1e-2, 12.0, 12.0, true);
        CHECK(fast.profit == slow.profit);
    }
}

TEST_CASE("multi factor: first-order conditions at interior optima") {
    KeyedRng rng(5, {5});
    for (int t = 0; t < 100; ++t) {
        std::vector<StressFactor> fs;
        for (std::size_t k = 0; k < 4; ++k) {
            fs.push_back(factor(rng.uniform(0.05, 0.3), rng.uniform(0.01, 1.0), rng.uniform(0.5, 10), static_cast<StressKind>(k)));
        }
        const auto farm = make_farm(rng.uniform(3, 7), fs);
        const double pw = rng.uniform(200, 350);
        const auto d = optimize_multi(farm, pw);
        REQUIRE(d.converged);
        const auto env = DecisionEnvironment::raw(farm, pw);
        for (std::size_t i = 0; i < 4; ++i) {
            auto up = d.inputs, down = d.inputs;
            const double h = 1e-4 * std::max(1.0, d.inputs[i]);
            up[i] += h;
            down[i] = std::max(0.0, down[i] - h);
            const double grad = (profit(farm, env, up) - profit(farm, env, down)) / (up[i] - down[i]);
            if (d.inputs[i] > 0.0) {
                CHECK(std::abs(grad) < 1e-3 * fs[i].input_price);
            } else {
                CHECK(grad <= 1e-6);
            }
        }
    }
}

TEST_CASE("multi factor: prices above every corner give zero inputs") {
    const auto farm = make_farm(6.0, {factor(0.4, 0.05, 100.0), factor(0.2, 0.1, 100.0)});
    const auto d = optimize_multi(farm, 250.0);
    CHECK(d.inputs == std::vector<double>{0.0, 0.0});
    CHECK(d.target_yield == doctest::Approx(6.0 * 0.6 * 0.8).epsilon(1e-15));
}

TEST_CASE("rule-based: price ratio scaling and clamps") {
    auto farm = make_farm(5.0, {factor(0.3, 0.05, 1.0), factor(0.1, 1.0, 25.0, StressKind::weeds)}, Behavior::rule_based);
    farm.last_inputs = {100.0, 1.5};
    auto env = DecisionEnvironment::raw(farm, 280.0);

    CHECK(rule_based_decide(farm, env, 280.0).inputs == std::vector<double>{100.0, 1.5});
    env.wheat_price = 4 * 280.0;
    auto d = rule_based_decide(farm, env, 280.0);
    CHECK(d.inputs[0] == doctest::Approx(120.0).epsilon(1e-15));
    CHECK(d.inputs[1] == doctest::Approx(1.8).epsilon(1e-15));
    env.wheat_price = 0.25 * 280.0;
    d = rule_based_decide(farm, env, 280.0);
    CHECK(d.inputs[0] == doctest::Approx(80.0).epsilon(1e-15));
    env.wheat_price = 1.1 * 280.0;
    d = rule_based_decide(farm, env, 280.0);
    CHECK(d.inputs[0] == doctest::Approx(100.0 * std::sqrt(1.1)).epsilon(1e-14));
    CHECK(d.target_yield == doctest::Approx(yield_response(farm, d.inputs)).epsilon(1e-15));
    env.input_caps[0] = 90.0;
    CHECK(rule_based_decide(farm, env, 280.0).inputs[0] == 90.0);
    CHECK_THROWS_AS(rule_based_decide(farm, env, -1.0), Error);
    // After a season that cleared at zero, any positive price is the largest rise.
    env.input_caps[0] = std::numeric_limits<double>::infinity();
    CHECK(rule_based_decide(farm, env, 0.0).inputs[0] == doctest::Approx(120.0).epsilon(1e-15));
    env.wheat_price = 0.0;
    CHECK(rule_based_decide(farm, env, 0.0).inputs[0] == 100.0);
    CHECK(rule_based_decide(farm, env, 280.0).inputs[0] == doctest::Approx(80.0).epsilon(1e-15));
}

TEST_CASE("optimizer: a zero wheat price gives zero inputs") {
    const auto farm = make_farm(5.0, {factor(0.4, 0.02, 0.6), factor(0.2, 2.0, 25.0, StressKind::weeds)});
    const auto d = optimize_multi(farm, 0.0);
    CHECK(d.inputs == std::vector<double>{0.0, 0.0});
    CHECK(d.expected_profit == 0.0);
    CHECK(optimize_single(make_farm(5.0, {factor(0.4, 0.02, 0.6)}), 0.0).inputs[0] == 0.0);
    CHECK_THROWS_AS(optimize_multi(farm, -1.0), Error);
}

TEST_CASE("realization: shock, clamp and gap") {
    const auto farm = make_farm(6.0, {factor(0.4, 0.05, 1.0)});
    const auto env = DecisionEnvironment::raw(farm, 250.0);
    const auto d = optimize_single(farm, env);

    const auto o = realize_yield(d, farm, env, {0.0, 1}, 0);
    CHECK(o.actual_yield == d.target_yield);
    CHECK(o.yield_gap == doctest::Approx(6.0 - d.target_yield).epsilon(1e-15));
    CHECK(o.production == doctest::Approx(d.target_yield * farm.area).epsilon(1e-15));
    CHECK(o.realized_profit == doctest::Approx(d.expected_profit * farm.area).epsilon(1e-12));

    // Find a season whose shock pushes the target above potential.
    const ShockParams wide{0.5, 3};
    std::uint64_t s = 0;
    while (d.target_yield * season_shock(wide, farm.id, s) <= 6.0) ++s;
    const auto clamped = realize_yield(d, farm, env, wide, s);
    CHECK(clamped.actual_yield == 6.0);
    CHECK(clamped.yield_gap == 0.0);
}

TEST_CASE("realization: shock median is 1") {
    const ShockParams p{0.1, 2024};
    std::vector<double> eps;
    eps.reserve(100000);
    for (std::uint64_t f = 0; f < 100000; ++f) eps.push_back(season_shock(p, f, 3));
    std::nth_element(eps.begin(), eps.begin() + 50000, eps.end());
    CHECK(std::abs(eps[50000] - 1.0) < 0.01);
    // log-shock standard deviation
    double ss = 0.0;
    for (double e : eps) ss += std::log(e) * std::log(e);
    CHECK(std::sqrt(ss / 100000) == doctest::Approx(0.1).epsilon(0.02));
    CHECK(season_shock(p, 7, 3) == season_shock(p, 7, 3));
    CHECK(season_shock(p, 7, 3) != season_shock(p, 7, 4));
    CHECK(season_shock(p, 7, 3) != season_shock(p, 8, 3));
}

TEST_CASE("calibration: response rate reproduces the target input") {
    KeyedRng rng(8, {8});
    for (int t = 0; t < 200; ++t) {
        const double s = rng.uniform(0.05, 0.4), ybar = rng.uniform(3, 6), pw = rng.uniform(200, 350), px = rng.uniform(0.5, 30);
        const double c = pw * s * ybar / px;
        const double x = rng.uniform(0.01, 0.95) * c / std::numbers::e;
        const double lambda = calibrate_response_rate(x, s, ybar, pw, px, 1e-6, 1e6);
        CHECK(lambda >= std::numbers::e / c);
        const auto d = optimize_single(make_farm(ybar, {factor(s, lambda, px)}), pw);
        CHECK(rel_err(d.inputs[0], x) < 1e-9);
    }
    CHECK(calibrate_response_rate(0.0, 0.3, 5, 280, 1.2, 1e-3, 50) == 50);
}

TEST_CASE("calibration: built farms place cluster-mean inputs at the optimum") {
    const auto records = population::remove_outliers(
        population::load_farm_records(testing::data_dir() / "farm_records.csv"), 4.0);
    const auto specs = population::cluster(records, 6, 1);
    const auto pop = population::synthesize_population(specs, 3000, 2);
    Calibration cal;
    const auto farms = build_farms(pop, cal, 4);
    REQUIRE(farms.size() == 3000);

    std::size_t optimizers = 0;
    for (std::size_t i = 0; i < farms.size(); ++i) {
        const auto& f = farms[i];
        CHECK(f.potential_yield >= cal.potential_yield_min);
        CHECK(f.potential_yield < cal.potential_yield_max);
        CHECK((f.behavior == Behavior::optimizer) == (pop.farms[i].area() >= cal.size_threshold_ha));
        optimizers += f.behavior == Behavior::optimizer;
        CHECK(f.stress_factors.size() == kStressKinds);
        for (const auto& sf : f.stress_factors) {
            CHECK(sf.response_rate >= cal.min_response_rate);
            CHECK(sf.response_rate <= cal.max_response_rate);
        }
        CHECK(f.npk_split[0] + f.npk_split[1] + f.npk_split[2] == doctest::Approx(1.0));
    }
    CHECK(optimizers > 0);
    CHECK(optimizers < farms.size());

    // Representative farm of each cluster: mid-range potential yield, cluster
    // mean inputs. Where the calibrated rate is interior, the optimum at the
    // reference price lands on the mean input.
    for (const auto& spec : specs) {
        std::array<double, kStressKinds> mean{};
        std::size_t n = 0;
        const Farm* sample = nullptr;
        for (std::size_t i = 0; i < farms.size(); ++i) {
            if (pop.farms[i].cluster_id != spec.cluster_id) continue;
            const auto in = record_inputs(pop.farms[i]);
            for (std::size_t k = 0; k < kStressKinds; ++k) mean[k] += in[k];
            ++n;
            sample = &farms[i];
        }
        REQUIRE(sample);
        for (auto& m : mean) m /= static_cast<double>(n);
        auto rep = *sample;
        rep.potential_yield = 0.5 * (cal.potential_yield_min + cal.potential_yield_max);
        rep.behavior = Behavior::optimizer;
        const auto d = optimize_multi(rep, cal.reference_wheat_price);
        for (std::size_t k = 0; k < kStressKinds; ++k) {
            const double lambda = rep.stress_factors[k].response_rate;
            if (lambda <= cal.min_response_rate || lambda >= cal.max_response_rate) continue;
            CHECK(rel_err(d.inputs[k], mean[k]) < 1e-6);
        }
    }
}

TEST_CASE("farm validation") {
    auto farm = make_farm(6.0, {factor(0.4, 0.05, 1.0)});
    CHECK_NOTHROW(farm.validate());
    farm.stress_factors[0].loss_share = 1.0;
    CHECK_THROWS_AS(farm.validate(), Error);
    farm = make_farm(0.0, {factor(0.4, 0.05, 1.0)});
    CHECK_THROWS_AS(farm.validate(), Error);
    CHECK(parse_stress_kind("weeds") == StressKind::weeds);
    CHECK_THROWS_AS(parse_stress_kind("rust"), Error);
}
