#include "fixtures.hpp"

#include "foodshock/calibration.hpp"
#include "foodshock/errors.hpp"
#include "foodshock/rules.hpp"
#include "foodshock/statistics.hpp"
#include "foodshock/substitutability.hpp"

#include <doctest.h>

#include <cmath>

using namespace foodshock;

namespace {

AvailabilitySeries single_series(const std::vector<int>& years, const std::vector<double>& values)
{
    AvailabilitySeries s(Dims{1, 1, 1}, years);
    std::copy(values.begin(), values.end(), s.sector(0).begin());
    return s;
}

std::vector<int> year_range(int first, int last)
{
    std::vector<int> y;
    for (int k = first; k <= last; ++k) {
        y.push_back(k);
    }
    return y;
}

} // namespace

TEST_CASE("growth normalization")
{
    const Dims dims{2, 1, 2};
    ParameterSet base(2000, dims);
    base.alpha.set(0, 0, 0, 0.4);
    base.alpha.set(1, 0, 0, 0.6);
    base.beta.set(0, 0, 1, 50.0);
    base.x0 = {100.0, 300.0};

    SUBCASE("constant series is unchanged")
    {
        auto next = base;
        next.year = 2001;
        const std::vector<ParameterSet> in{base, next};
        const auto out = normalize_growth(in, 2000);
        CHECK(out[0] == base);
        CHECK(out[1].alpha == base.alpha);
        CHECK(out[1].x0 == base.x0);
    }
    SUBCASE("doubled output rates are halved back")
    {
        auto next = base;
        next.year = 2001;
        next.alpha.set(0, 0, 0, 0.8);
        next.alpha.set(1, 0, 0, 1.2);
        const std::vector<ParameterSet> in{base, next};
        const auto out = normalize_growth(in, 2000);
        // Per-(area, process) totals match the base year.
        CHECK(out[1].alpha.process_totals() == base.alpha.process_totals());
        CHECK(out[1].alpha.get(0, 0, 0) == doctest::Approx(0.4));
    }
    SUBCASE("availability is scaled globally")
    {
        auto next = base;
        next.year = 2001;
        next.x0 = {300.0, 500.0};
        const std::vector<ParameterSet> in{base, next};
        const auto out = normalize_growth(in, 2000);
        CHECK(out[1].x0[0] == doctest::Approx(150.0));
        CHECK(out[1].x0[1] == doctest::Approx(250.0));
    }
    SUBCASE("zero base total zeroes the column")
    {
        auto next = base;
        next.year = 2001;
        next.beta.set(1, 0, 1, 10.0);
        GrowthReport report;
        const std::vector<ParameterSet> in{base, next};
        const auto out = normalize_growth(in, 2000, &report);
        CHECK(out[1].beta.get(1, 0, 1) == 0.0);
        CHECK(report.zeroed_beta_columns == 1);
    }
    SUBCASE("missing base year")
    {
        const std::vector<ParameterSet> in{base};
        CHECK_THROWS_AS(normalize_growth(in, 1999), ValidationError);
    }
}

TEST_CASE("coefficient of variation")
{
    const std::vector<double> zeros{0.0, 0.0, 0.0};
    CHECK(coefficient_of_variation(zeros) == 0.0);
    const std::vector<double> v{1.0, 3.0};
    CHECK(coefficient_of_variation(v) == doctest::Approx(0.5));
}

TEST_CASE("event detection examples")
{
    CalibrationConfig config;
    config.first_event_year = 1990;
    config.last_event_year = 2030;

    SUBCASE("constant series has no event")
    {
        const auto s = single_series(year_range(2000, 2020), std::vector<double>(21, 5000.0));
        CHECK(detect_events(s, config).empty());
    }
    SUBCASE("10 years at 10000 then 11 years at 6000")
    {
        std::vector<double> x(10, 10000.0);
        x.resize(21, 6000.0);
        const auto s = single_series(year_range(2000, 2020), x);
        const auto events = detect_events(s, config);
        REQUIRE(events.size() == 1);
        CHECK(events[0].year == 2010);
        CHECK(events[0].loss == doctest::Approx(0.4).epsilon(1e-15));
        CHECK(evaluate_event_at(s, 0, 2010, config) == events[0]);
        CHECK_FALSE(evaluate_event_at(s, 0, 2011, config));
    }
    SUBCASE("absolute threshold")
    {
        std::vector<double> x(10, 1000.0);
        x.resize(21, 600.0);
        CHECK(detect_events(single_series(year_range(2000, 2020), x), config).empty());
    }
    SUBCASE("unstable history")
    {
        std::vector<double> x;
        for (int k = 0; k < 10; ++k) {
            x.push_back(k % 2 ? 20000.0 : 6000.0);
        }
        x.resize(21, 3000.0);
        CHECK(detect_events(single_series(year_range(2000, 2020), x), config).empty());
    }
    SUBCASE("too close to the edge of the series")
    {
        std::vector<double> x(3, 10000.0);
        x.resize(21, 6000.0);
        CHECK(detect_events(single_series(year_range(2000, 2020), x), config).empty());
    }
    SUBCASE("zero predecessor is skipped and counted")
    {
        std::vector<double> x(21, 8000.0);
        x[9] = 0.0;
        DetectionLog log;
        detect_events(single_series(year_range(2000, 2020), x), config, &log);
        CHECK(log.skipped_zero_previous == 1);
    }
}

TEST_CASE("event detector agrees with the brute-force definition")
{
    std::mt19937_64 rng(42);
    const auto series = fixtures::planted_series(rng, 500);
    const CalibrationConfig config;
    const auto events = detect_events(series, config);
    const auto oracle = fixtures::brute_force_events(series, config);
    CHECK(events == oracle);
    CHECK(events.size() > 20);
}

TEST_CASE("event detection is scale invariant in the relative criteria")
{
    std::mt19937_64 rng(5);
    auto series = fixtures::planted_series(rng, 300);
    CalibrationConfig config;
    config.delta_abs = 1e-9;
    const auto events = detect_events(series, config);
    for (std::size_t s = 0; s < 300; ++s) {
        for (auto& v : series.sector(s)) {
            v *= 8.0; // exact in binary floating point
        }
    }
    CHECK(detect_events(series, config) == events);
}

TEST_CASE("event counts never grow with a stricter relative threshold")
{
    std::mt19937_64 rng(9);
    const auto series = fixtures::planted_series(rng, 400);
    CalibrationConfig config;
    std::size_t previous = std::numeric_limits<std::size_t>::max();
    for (double rel = 0.05; rel < 0.95; rel += 0.05) {
        config.delta_rel = rel;
        const auto n = detect_events(series, config).size();
        CHECK(n <= previous);
        previous = n;
    }
}

TEST_CASE("rule components")
{
    const Dims dims{1, 1, 1};
    ParameterSet p0(2000, dims);
    ParameterSet p1(2001, dims);
    const std::vector<Event> events{{0, 0, 2000, 0.5}};

    SUBCASE("weight branch")
    {
        p0.alpha.set(0, 0, 0, 0.2);
        p1.alpha.set(0, 0, 0, 0.3);
        const std::vector<ParameterSet> years{p0, p1};
        const auto c = derive_rule_components(events, years);
        REQUIRE(c.size() == 1);
        CHECK(c[0].family == RuleFamily::alpha);
        CHECK(c[0].branch == Branch::weight);
        CHECK(c[0].value == doctest::Approx(3.0).epsilon(1e-15));
    }
    SUBCASE("rewiring branch")
    {
        p1.nu.set(0, 0, 0, 0.1);
        const std::vector<ParameterSet> years{p0, p1};
        const auto c = derive_rule_components(events, years);
        REQUIRE(c.size() == 1);
        CHECK(c[0].family == RuleFamily::nu);
        CHECK(c[0].branch == Branch::rewire);
        CHECK(c[0].value == doctest::Approx(0.2).epsilon(1e-15));
    }
    SUBCASE("structural zeros emit nothing")
    {
        const std::vector<ParameterSet> years{p0, p1};
        CHECK(derive_rule_components(events, years).empty());
    }
    SUBCASE("missing follow-up year")
    {
        const std::vector<ParameterSet> years{p0};
        CHECK_THROWS_AS(derive_rule_components(events, years), ValidationError);
    }
}

TEST_CASE("rule aggregation averages each branch separately")
{
    std::vector<RuleComponent> c;
    c.push_back({RuleFamily::beta, 1, 2, Branch::weight, 2.0, 1.0, 1.0, 0.5, 0});
    c.push_back({RuleFamily::beta, 1, 2, Branch::weight, 4.0, 1.0, 2.0, 0.5, 1});
    c.push_back({RuleFamily::beta, 1, 2, Branch::rewire, 0.6, 0.0, 0.3, 0.5, 2});
    const auto rules = aggregate_rules(c);
    const auto* v = rules[RuleFamily::beta].find(1, 2);
    REQUIRE(v);
    CHECK(v->w == doctest::Approx(3.0));
    CHECK(v->n_weight == 2);
    CHECK(v->r == doctest::Approx(0.6));
    CHECK(v->n_rewire == 1);

    const auto single = aggregate_rules(std::span(c).first(1));
    CHECK(single[RuleFamily::beta].find(1, 2)->w == 2.0);
    CHECK_FALSE(single[RuleFamily::beta].find(1, 2)->has_rewire());
}

TEST_CASE("rule application semantics")
{
    RuleValue weight_only{2.0, 0.0, 1, 0};
    CHECK(weight_only.apply(0.3, 0.5) == doctest::Approx(0.3));
    RuleValue rewire_only{0.0, 0.4, 0, 2};
    CHECK(rewire_only.apply(0.3, 0.5) == doctest::Approx(0.5));
    RuleValue both{3.0, 0.2, 1, 1};
    CHECK(both.apply(0.2, 0.5) == doctest::Approx(0.4));
}

TEST_CASE("components reproduce the observed change")
{
    std::mt19937_64 rng(21);
    const Dims dims{4, 3, 2};
    const auto yearly = fixtures::random_years(rng, dims, 2000, 2003, 0.2);
    std::vector<Event> events;
    for (std::size_t s = 0; s < dims.sectors(); ++s) {
        const auto sec = dims.unpack(s);
        events.push_back({sec.area, sec.item, 2001, 0.3 + 0.05 * static_cast<double>(s % 5)});
    }
    const auto components = derive_rule_components(events, yearly);
    REQUIRE(!components.empty());
    for (const auto& c : components) {
        const double w = c.branch == Branch::weight ? c.value : 0.0;
        const double r = c.branch == Branch::rewire ? c.value : 0.0;
        const double rebuilt = c.loss * w * c.before + c.loss * r;
        CHECK(std::abs(rebuilt - c.after) <= 1e-12 * std::max(1.0, std::abs(c.after)));
    }
}

TEST_CASE("rules and events survive a CSV round trip")
{
    std::mt19937_64 rng(4);
    const Dims dims{4, 4, 2};
    const auto catalog = fixtures::make_catalog(dims);
    const auto rules = fixtures::random_rules(rng, dims, 0.4);
    const auto dir = fixtures::temp_dir("rules_io");
    write_rules(rules, catalog, dir / "rules.csv");
    CHECK(read_rules(dir / "rules.csv", catalog) == rules);

    const std::vector<Event> events{{1, 2, 2004, 0.375}, {3, 0, 2010, 0.5}};
    write_events(events, catalog, dir / "events.csv");
    CHECK(read_events(dir / "events.csv", catalog) == events);
}

TEST_CASE("statistics")
{
    const std::vector<double> v{1, 2, 3, 4, 5};
    CHECK(stats::mean(v) == 3.0);
    CHECK(stats::sample_sd(v) == doctest::Approx(std::sqrt(2.5)));
    // Reference values from a standard statistics package.
    CHECK(stats::t_test_greater(v) == doctest::Approx(0.0066177997818413475).epsilon(1e-9));
    const std::vector<double> w{0.3, -0.1, 0.2, 0.05};
    CHECK(stats::t_test_greater(w) == doctest::Approx(0.14439925681504276).epsilon(1e-9));
    const std::vector<double> one{4.0};
    CHECK(stats::t_test_greater(one) == 1.0);

    const std::vector<double> p{0.01, 0.04, 0.03, 0.005};
    const auto q = stats::benjamini_hochberg(p);
    CHECK(q[0] == doctest::Approx(0.02));
    CHECK(q[1] == doctest::Approx(0.04));
    CHECK(q[2] == doctest::Approx(0.04));
    CHECK(q[3] == doctest::Approx(0.02));

    CHECK(stats::matthews_correlation({5, 5, 0, 0}) == doctest::Approx(1.0));
    CHECK(stats::matthews_correlation({0, 0, 5, 5}) == doctest::Approx(-1.0));
    CHECK(stats::matthews_correlation({0, 10, 3, 4}) <= 0.0);
    CHECK(stats::matthews_correlation({0, 10, 0, 0}) == 1.0);
    // tp=6, tn=3, fp=1, fn=2
    CHECK(stats::matthews_correlation({6, 3, 1, 2}) ==
          doctest::Approx((6.0 * 3 - 1.0 * 2) / std::sqrt(7.0 * 8 * 4 * 5)));
}

namespace {

/// Events on items 0 and 2 (same group). Item-0 events raise imports of item
/// 2 by about 50%; item-2 events leave item-0 imports unchanged on average.
struct SubstitutionFixture {
    Dims dims{40, 4, 1};
    foodshock::Catalog catalog = fixtures::make_catalog(dims);
    std::vector<ParameterSet> yearly;
    std::vector<Event> events;

    explicit SubstitutionFixture(bool respond)
    {
        std::mt19937_64 rng(77);
        std::uniform_real_distribution<double> noise(-0.1, 0.1);
        ParameterSet p0(2001, dims);
        ParameterSet p1(2002, dims);
        for (std::size_t a = 0; a < dims.areas; ++a) {
            const std::size_t exporter = (a + 1) % dims.areas;
            for (std::size_t j = 0; j < dims.items; ++j) {
                p0.trade.set(j, a, exporter, 0.4);
                double change = 0.0;
                if (respond) {
                    const bool item0_event = a < 20;
                    if (item0_event && j == 2) {
                        change = 0.5 + noise(rng);
                    } else if (!item0_event && j == 2) {
                        change = -0.3 + noise(rng);
                    } else {
                        change = noise(rng);
                    }
                }
                p1.trade.set(j, a, exporter, 0.4 * (1.0 + change));
            }
            events.push_back({a, a < 20 ? std::size_t{0} : std::size_t{2}, 2001, 0.5});
        }
        yearly = {p0, p1};
    }
};

} // namespace

TEST_CASE("substitutability")
{
    CalibrationConfig config;
    config.n_permutations = 500;

    SUBCASE("planted substitution is admitted")
    {
        SubstitutionFixture f(true);
        const auto result = derive_substitutability(f.events, f.yearly, f.catalog, config);
        const auto* s02 = result.matrix.find(0, 2);
        REQUIRE(s02);
        CHECK(s02->s == doctest::Approx(0.5).epsilon(0.05));
        CHECK(s02->n_events == 20);
        CHECK_FALSE(result.matrix.find(2, 0));
        for (const auto& cell : result.matrix.cells()) {
            CHECK(f.catalog.same_group(cell.row, cell.col));
            CHECK(cell.row != cell.col);
        }
        for (const auto& t : result.tests) {
            CHECK(f.catalog.same_group(t.from_item, t.to_item));
        }
    }
    SUBCASE("no change means no substitution")
    {
        SubstitutionFixture f(false);
        const auto result = derive_substitutability(f.events, f.yearly, f.catalog, config);
        CHECK(result.matrix.empty());
        for (const auto& t : result.tests) {
            CHECK(t.s == 0.0);
            CHECK(t.p_mean >= config.alpha_sig);
        }
    }
    SUBCASE("results do not depend on the thread count")
    {
        SubstitutionFixture f(true);
        auto many = config;
        many.threads = 4;
        const auto a = derive_substitutability(f.events, f.yearly, f.catalog, config);
        const auto b = derive_substitutability(f.events, f.yearly, f.catalog, many);
        CHECK(a.matrix == b.matrix);
        REQUIRE(a.tests.size() == b.tests.size());
        for (std::size_t k = 0; k < a.tests.size(); ++k) {
            CHECK(a.tests[k].p_perm == b.tests[k].p_perm);
        }
    }
}
