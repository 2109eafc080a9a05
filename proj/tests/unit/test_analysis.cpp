#include "fixtures.hpp"

#include "foodshock/analysis.hpp"
#include "foodshock/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace foodshock;

namespace {

Catalog catalog_with(std::vector<double> populations, std::vector<double> hdi, std::size_t items = 1)
{
    std::vector<Entry> areas;
    std::vector<std::optional<double>> pops;
    std::vector<HdiRecord> records;
    for (std::size_t a = 0; a < populations.size(); ++a) {
        areas.push_back({"A" + std::to_string(a), "Area " + std::to_string(a)});
        pops.emplace_back(populations[a]);
        const double v = hdi[a];
        records.push_back({v < 0.6 ? "low" : (v > 0.8 ? "very high" : "medium"), v});
    }
    std::vector<Entry> item_entries;
    std::vector<std::string> groups;
    for (std::size_t i = 0; i < items; ++i) {
        item_entries.push_back({"I" + std::to_string(i), "Item " + std::to_string(i)});
        groups.push_back("cereals");
    }
    return Catalog(std::move(areas), std::move(item_entries), std::move(groups),
                   std::vector<std::string>(items, "tonnes"), {{"P0", "Process 0"}}, std::move(pops),
                   std::move(records));
}

Trajectory single_frame(std::vector<double> x)
{
    Trajectory t;
    StepState s;
    s.x = std::move(x);
    t.steps.push_back(std::move(s));
    return t;
}

} // namespace

TEST_CASE("per-capita loss examples")
{
    const auto catalog = catalog_with({2e6}, {0.7});
    const auto report = loss_per_capita(single_frame({100.0}), single_frame({60.0}), catalog);
    CHECK(report.at(0, 0) == doctest::Approx(0.02));
    CHECK(report.shortfall[0] == 40.0);

    SUBCASE("aggregate of two equal populations is the mean")
    {
        const auto two = catalog_with({1000.0, 1000.0}, {0.5, 0.9});
        const auto r = loss_per_capita(single_frame({10.0, 10.0}), single_frame({8.0, 6.0}), two);
        CHECK(r.at(0, 0) == doctest::Approx(2.0));
        CHECK(r.at(1, 0) == doctest::Approx(4.0));
        CHECK(aggregate_loss(r, all_areas(two), all_items(two), two) == doctest::Approx(3.0));
    }
    SUBCASE("missing population")
    {
        Catalog c({{"A0", "A"}}, {{"I0", "I"}}, {"cereals"}, {"tonnes"}, {{"P0", "P"}}, {std::nullopt},
                  {HdiRecord{"low", 0.4}});
        CHECK_THROWS_AS(loss_per_capita(single_frame({1.0}), single_frame({0.0}), c), DataError);
    }
}

TEST_CASE("aggregation properties")
{
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const auto dims = fixtures::random_dims(rng);
        const auto catalog = fixtures::make_catalog(dims, trial + 1);
        std::uniform_real_distribution<double> u(0.0, 1000.0);
        std::vector<double> xb(dims.sectors()), xs(dims.sectors());
        for (std::size_t s = 0; s < dims.sectors(); ++s) {
            xb[s] = u(rng);
            xs[s] = u(rng);
        }
        const auto r = loss_per_capita(single_frame(xb), single_frame(xs), catalog);

        for (std::size_t a = 0; a < dims.areas; ++a) {
            for (std::size_t i = 0; i < dims.items; ++i) {
                const std::size_t aa[] = {a};
                const std::size_t ii[] = {i};
                CHECK(aggregate_loss(r, aa, ii, catalog) == doctest::Approx(r.at(a, i)).epsilon(1e-12));
            }
        }

        // Splitting the areas: the total is the population-weighted mean of the parts.
        const auto items = all_items(catalog);
        const std::size_t cut = dims.areas / 2;
        std::vector<std::size_t> left(cut), right(dims.areas - cut);
        std::iota(left.begin(), left.end(), std::size_t{0});
        std::iota(right.begin(), right.end(), cut);
        auto persons = [&](const std::vector<std::size_t>& set) {
            double z = 0.0;
            for (auto a : set) {
                z += *catalog.population(a);
            }
            return z;
        };
        const double whole = aggregate_loss(r, all_areas(catalog), items, catalog);
        const double zl = persons(left);
        const double zr = persons(right);
        double parts = aggregate_loss(r, right, items, catalog) * zr;
        if (!left.empty()) {
            parts += aggregate_loss(r, left, items, catalog) * zl;
        }
        CHECK(whole == doctest::Approx(parts / (zl + zr)).epsilon(1e-12));
    }
    const auto catalog = catalog_with({1e6}, {0.5});
    const auto r = loss_per_capita(single_frame({1.0}), single_frame({1.0}), catalog);
    CHECK_THROWS_AS(aggregate_loss(r, {}, all_items(catalog), catalog), ValidationError);
}

TEST_CASE("superposition impact classification and symmetry")
{
    const auto catalog = catalog_with({1000.0, 1000.0}, {0.5, 0.9});
    const auto areas = all_areas(catalog);
    const auto items = all_items(catalog);
    const auto base = single_frame({10.0, 10.0});
    const auto first = loss_per_capita(base, single_frame({8.0, 10.0}), catalog);
    const auto second = loss_per_capita(base, single_frame({10.0, 7.0}), catalog);

    const auto additive = loss_per_capita(base, single_frame({8.0, 7.0}), catalog);
    CHECK(superposition_impact(additive, first, second, areas, items, catalog).kind == Additivity::neutral);

    const auto worse = loss_per_capita(base, single_frame({6.0, 7.0}), catalog);
    const auto v = superposition_impact(worse, first, second, areas, items, catalog);
    CHECK(v.kind == Additivity::super_additive);
    CHECK(v.si == doctest::Approx(1.0));
    const auto w = superposition_impact(worse, second, first, areas, items, catalog);
    CHECK(w.si == v.si);

    const auto milder = loss_per_capita(base, single_frame({9.0, 8.0}), catalog);
    CHECK(superposition_impact(milder, first, second, areas, items, catalog).kind == Additivity::sub_additive);

    const auto adaptive = loss_per_capita(base, single_frame({8.0, 7.0}), catalog, {}, true);
    CHECK_THROWS_AS(superposition_impact(adaptive, first, second, areas, items, catalog), ValidationError);
}

TEST_CASE("combined shock sampling")
{
    const auto params = fixtures::trading_network({5, 2, 1});
    const auto catalog = fixtures::make_catalog(params.dims, 3);
    std::mt19937_64 rng(11);
    const auto rules = fixtures::random_rules(rng, params.dims, 0.5);
    SimulationConfig config;
    config.adaptation_enabled = true;
    config.substitution_enabled = true;
    config.trigger_delta_abs = 10.0;

    SamplingConfig sampling;
    sampling.n_samples = 12;
    sampling.pool_size = 8;
    sampling.seed = 99;

    const auto pool = eligible_shock_pool(params, sampling.pool_size, sampling.phi);
    REQUIRE(pool.size() == 8);
    // Largest inputless output first: item 1 of the last area.
    CHECK(pool.front().area == 4);
    CHECK(pool.front().item == 1);

    const auto one = sample_combined_shocks(params, rules, catalog, config, sampling);
    REQUIRE(one.pairs.size() == 12);
    for (const auto& pair : one.pairs) {
        CHECK(catalog.same_group(pair.first.item, pair.second.item));
        CHECK_FALSE(pair.first == pair.second);
    }

    sampling.threads = 3;
    const auto two = sample_combined_shocks(params, rules, catalog, config, sampling);
    REQUIRE(two.pairs.size() == one.pairs.size());
    for (std::size_t k = 0; k < one.pairs.size(); ++k) {
        CHECK(one.pairs[k].first == two.pairs[k].first);
        CHECK(one.pairs[k].second == two.pairs[k].second);
        CHECK(one.pairs[k].all_items.si == two.pairs[k].all_items.si);
        CHECK(one.pairs[k].shocked_items.si == two.pairs[k].shocked_items.si);
    }
    CHECK(one.mean_all_items == two.mean_all_items);

    const auto baseline = run_baseline(params, config);
    const auto& sample = one.pairs.front();
    const auto direct = superpose_pair(params, rules, catalog, config, baseline, sample.first, sample.second);
    CHECK(direct.all_items.si == sample.all_items.si);
    CHECK(direct.shocked_items.combined == sample.shocked_items.combined);

    sampling.seed = 100;
    const auto other = sample_combined_shocks(params, rules, catalog, config, sampling);
    bool differs = false;
    for (std::size_t k = 0; k < one.pairs.size(); ++k) {
        differs = differs || !(one.pairs[k].first == other.pairs[k].first) ||
                  !(one.pairs[k].second == other.pairs[k].second);
    }
    CHECK(differs);

    CHECK(one.availability_per_capita > 0.0);
}

TEST_CASE("static superposition of inputless pairs is neutral")
{
    const auto params = fixtures::trading_network({4, 2, 1});
    const auto catalog = fixtures::make_catalog(params.dims, 5);
    const SimulationConfig config;
    const auto baseline = run_baseline(params, config);
    const auto pair = superpose_pair(params, {}, catalog, config, baseline, {0, 0, 1.0}, {2, 0, 0.5});
    CHECK(pair.all_items.kind == Additivity::neutral);
    CHECK(std::abs(pair.all_items.si) <= 1e-9 * std::max(1.0, std::abs(pair.all_items.combined)));
}

TEST_CASE("rule impact estimators")
{
    ParameterSet p(2020, {2, 1, 1});
    p.beta.set(0, 0, 0, 100.0);
    p.beta.set(1, 0, 0, 50.0);
    p.eta_exp = {0.5, 0.4};
    p.eta_prod = {0.0, 0.0};
    p.x0 = {200.0, 100.0};
    p.trade.set(0, 1, 0, 1.0);
    p.trade.set(0, 0, 1, 1.0);

    AdaptationRuleSet rules;
    rules[RuleFamily::trade_import] = RuleMatrix({{1, 0, RuleValue{2.0, 0.0, 3, 0}}, {0, 1, RuleValue{0.0, 0.1, 0, 2}}});
    rules[RuleFamily::beta] = RuleMatrix({{0, 0, RuleValue{0.0, 0.0, 4, 0}}});

    const auto report = impact_estimators(p, rules);
    // Only the weight branch counts: W * T * eta_exp * x0 for importer 1.
    REQUIRE(report.trade.size() == 1);
    CHECK(report.trade[0].importer == 1);
    CHECK(report.trade[0].exporter == 0);
    CHECK(report.trade[0].impact == doctest::Approx(2.0 * 1.0 * 0.4 * 100.0));
    // A zero weight gives a zero impact.
    REQUIRE(report.production.size() == 1);
    CHECK(report.production[0].impact == 0.0);
    CHECK(report.substitution.empty());
}

TEST_CASE("HDI group losses")
{
    const auto catalog = catalog_with({1e6, 1e6, 1e6, 1e6}, {0.5, 0.7, 0.9, 0.95});
    const auto items = all_items(catalog);
    const auto base = single_frame({10.0, 10.0, 10.0, 10.0});
    const auto stat = loss_per_capita(base, single_frame({8.0, 6.0, 5.0, 10.0}), catalog);

    SUBCASE("identical reports give no change")
    {
        for (const auto& g : hdi_group_losses(stat, stat, catalog, items)) {
            CHECK(g.mean_relative_change == 0.0);
        }
    }
    SUBCASE("hand example")
    {
        const auto adap = loss_per_capita(base, single_frame({9.0, 8.0, 5.0, 9.0}), catalog, {}, true);
        const auto groups = hdi_group_losses(stat, adap, catalog, items);
        REQUIRE(groups.size() >= 3);
        CHECK(groups[0].group == "HDI < 0.6");
        CHECK(groups[0].countries == 1);
        CHECK(groups[0].mean_relative_change == doctest::Approx(-0.5));
        CHECK(groups[1].countries == 1);
        CHECK(groups[1].mean_relative_change == doctest::Approx(-0.5));
        // Area 3 has no static loss and is left out.
        CHECK(groups[2].countries == 1);
        CHECK(groups[2].mean_relative_change == doctest::Approx(0.0));

        const std::size_t excluded[] = {0};
        const auto without = hdi_group_losses(stat, adap, catalog, items, excluded);
        CHECK(without[0].countries == 0);
    }
}

namespace {

/// Two single-item areas with inputless production and no trade. Area 0
/// loses half its availability in `drop_year` when `drop` is set; area 1 is
/// large so growth normalization barely moves area 0.
std::vector<ParameterSet> two_area_years(int first, int last, bool drop, int drop_year = 2011)
{
    std::vector<ParameterSet> out;
    for (int y = first; y <= last; ++y) {
        ParameterSet p(y, {2, 1, 1});
        p.beta.set(0, 0, 0, 10000.0);
        p.beta.set(1, 0, 0, 1e6);
        p.eta_exp = {0.0, 0.0};
        p.eta_prod = {0.0, 0.0};
        p.x0 = {(drop && y >= drop_year) ? 5000.0 : 10000.0, 1e6};
        out.push_back(std::move(p));
    }
    return out;
}

} // namespace

TEST_CASE("reconciliation harness")
{
    const auto catalog = catalog_with({1e6, 5e7}, {0.5, 0.9});
    CalibrationConfig calibration;
    SimulationConfig simulation;

    SUBCASE("no events: all three simulations coincide")
    {
        const auto yearly = two_area_years(2001, 2020, false);
        const auto result = reconciliation_harness(yearly, {}, catalog, calibration, simulation);
        CHECK(result.shocks.empty());
        for (std::size_t t = 0; t < result.baseline.steps.size(); ++t) {
            CHECK(result.static_run.steps[t].x == result.baseline.steps[t].x);
            CHECK(result.adaptive_run.steps[t].x == result.baseline.steps[t].x);
        }
        REQUIRE(result.find("benchmark") != nullptr);
        CHECK(result.find("static")->mean_share_sd == result.find("baseline")->mean_share_sd);
    }
    SUBCASE("a single halving event is replayed")
    {
        const auto yearly = two_area_years(2001, 2020, true);
        const auto result = reconciliation_harness(yearly, {}, catalog, calibration, simulation);
        REQUIRE(result.shocks.size() == 1);
        CHECK(result.shocks[0].area == 0);
        CHECK(result.shocks[0].year == 2011);
        // Growth normalization rescales the 2011 total back to the 2001 level.
        const double normalized = 5000.0 * 1010000.0 / 1005000.0;
        const double loss = 1.0 - normalized / 10000.0;
        CHECK(result.shocks[0].loss == doctest::Approx(loss).epsilon(1e-12));
        CHECK(result.baseline.final_state().x[0] == doctest::Approx(10000.0));
        CHECK(result.static_run.final_state().x[0] == doctest::Approx(10000.0 * (1.0 - loss)));
        CHECK(result.static_run.final_state().x[1] == doctest::Approx(1e6));
    }
    SUBCASE("missing benchmark years")
    {
        const auto yearly = two_area_years(2001, 2015, false);
        CHECK_THROWS_AS(reconciliation_harness(yearly, {}, catalog, calibration, simulation), DataError);
    }
}
