#include "fixtures.hpp"

#include "foodshock/errors.hpp"
#include "foodshock/stability.hpp"

#include <doctest.h>

#include <cmath>

using namespace foodshock;

namespace {

const FamilyStability& family_of(const std::vector<FamilyStability>& v, std::string_view name)
{
    for (const auto& f : v) {
        if (f.family == name) {
            return f;
        }
    }
    FAIL("missing family " << name);
    return v.front();
}

std::vector<ParameterSet> planted_years(std::uint64_t seed, const Dims& dims)
{
    std::mt19937_64 rng(seed);
    auto yearly = fixtures::random_years(rng, dims, 1992, 2020, 0.01);
    // One drop on each side of the split year.
    fixtures::plant_drop(yearly, 0, 2001, 0.5);
    fixtures::plant_drop(yearly, dims.sector(1, 1), 2010, 0.6);
    return yearly;
}

} // namespace

TEST_CASE("rule presence comparison")
{
    std::mt19937_64 rng(3);
    const Dims dims{4, 4, 2};
    const auto catalog = fixtures::make_catalog(dims);
    const auto rules = fixtures::random_rules(rng, dims, 0.5);

    SUBCASE("a rule set agrees perfectly with itself")
    {
        for (const auto& f : compare_rule_presence(rules, rules, catalog)) {
            CHECK(f.mcc == doctest::Approx(1.0));
            CHECK(f.rules_first == f.rules_second);
        }
    }
    SUBCASE("disjoint presence is not positively correlated")
    {
        AdaptationRuleSet a;
        AdaptationRuleSet b;
        a[RuleFamily::beta] = RuleMatrix({{0, 0, RuleValue{1.0, 0.0, 1, 0}}, {1, 0, RuleValue{1.0, 0.0, 1, 0}}});
        b[RuleFamily::beta] = RuleMatrix({{2, 0, RuleValue{1.0, 0.0, 1, 0}}, {3, 1, RuleValue{1.0, 0.0, 1, 0}}});
        const auto cmp = compare_rule_presence(a, b, catalog);
        const auto& beta = family_of(cmp, "W_beta");
        CHECK(beta.mcc <= 0.0);
        CHECK(beta.rules_first == 2);
        CHECK(beta.rules_second == 2);
    }
    SUBCASE("MCC stays in [-1, 1]")
    {
        for (int k = 0; k < 50; ++k) {
            const auto other = fixtures::random_rules(rng, dims, 0.3);
            for (const auto& f : compare_rule_presence(rules, other, catalog)) {
                CHECK(f.mcc >= -1.0 - 1e-12);
                CHECK(f.mcc <= 1.0 + 1e-12);
            }
        }
    }
}

TEST_CASE("stability analysis on synthetic years")
{
    const Dims dims{4, 3, 2};
    const auto catalog = fixtures::make_catalog(dims);
    const auto yearly = planted_years(17, dims);
    const auto normalized = normalize_growth(yearly, 1992);
    CalibrationConfig config;
    config.n_permutations = 100;

    const auto report = stability_analysis(normalized, catalog, config);
    CHECK(report.split_year == kDefaultSplitYear);
    CHECK(report.events_first >= 1);
    CHECK(report.events_second >= 1);
    CHECK_FALSE(report.families.empty());
    for (const auto& f : report.families) {
        CHECK(std::isfinite(f.mcc));
    }

    SUBCASE("deterministic for a seed and thread count")
    {
        config.threads = 2;
        const auto again = stability_analysis(normalized, catalog, config);
        REQUIRE(again.families.size() == report.families.size());
        for (std::size_t k = 0; k < report.families.size(); ++k) {
            CHECK(again.families[k].mcc == report.families[k].mcc);
        }
    }
    SUBCASE("sweep covers both grids")
    {
        const double rel[] = {0.1, 0.3};
        const double dev[] = {0.2, 0.4, 0.6};
        const auto sweep = stability_sweep(normalized, catalog, config, rel, dev);
        REQUIRE(sweep.size() == 5);
        CHECK(sweep[0].delta_rel == 0.1);
        CHECK(sweep[1].delta_rel == 0.3);
        CHECK(sweep[2].delta_dev == 0.2);
        CHECK(sweep[4].delta_dev == 0.6);
        CHECK(sweep[0].delta_dev == config.delta_dev);
        CHECK(sweep[2].delta_rel == config.delta_rel);
        // A looser drop threshold never finds fewer events.
        CHECK(sweep[0].events_first >= sweep[1].events_first);

        const auto dir = fixtures::temp_dir("stability");
        write_stability(sweep, dir / "stability.csv");
        const auto text = fixtures::read_file(dir / "stability.csv");
        CHECK(text.find("W_beta") != std::string::npos);
    }
    SUBCASE("split outside the data")
    {
        CHECK_THROWS_AS(stability_analysis(normalized, catalog, config, 2030), ValidationError);
    }
}
