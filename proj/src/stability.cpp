#include "foodshock/stability.hpp"

#include "foodshock/csv.hpp"
#include "foodshock/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <set>

namespace foodshock {

CalibrationResult fit_rules(std::span<const ParameterSet> normalized, const Catalog& catalog,
                            const CalibrationConfig& config)
{
    config.validate();
    CalibrationResult result;
    const auto series = AvailabilitySeries::from_parameters(normalized);
    result.events = detect_events(series, config, &result.detection);
    result.components = derive_rule_components(result.events, normalized);
    result.rules = aggregate_rules(result.components);
    auto subst = derive_substitutability(result.events, normalized, catalog, config);
    result.rules.substitution = std::move(subst.matrix);
    result.substitution_tests = std::move(subst.tests);
    result.excluded_zero_index = subst.excluded_zero_index;
    return result;
}

const FamilyStability* StabilityReport::family(std::string_view name) const
{
    for (const auto& f : families) {
        if (f.family == name) {
            return &f;
        }
    }
    return nullptr;
}

namespace {

using KeySet = std::set<std::pair<std::uint32_t, std::uint32_t>>;

FamilyStability compare(std::string name, const KeySet& first, const KeySet& second, std::size_t universe)
{
    FamilyStability out;
    out.family = std::move(name);
    out.rules_first = first.size();
    out.rules_second = second.size();
    for (const auto& k : first) {
        second.count(k) ? ++out.counts.tp : ++out.counts.fn;
    }
    for (const auto& k : second) {
        if (!first.count(k)) {
            ++out.counts.fp;
        }
    }
    const auto occupied = out.counts.tp + out.counts.fp + out.counts.fn;
    out.counts.tn = universe > occupied ? universe - occupied : 0;
    out.mcc = stats::matthews_correlation(out.counts);
    return out;
}

template <typename Pred>
KeySet keys_where(const RuleMatrix& m, Pred&& pred)
{
    KeySet keys;
    for (const auto& c : m.cells()) {
        if (pred(c.value)) {
            keys.emplace(c.row, c.col);
        }
    }
    return keys;
}

std::size_t universe_size(RuleFamily f, const Dims& d)
{
    switch (f) {
    case RuleFamily::alpha:
    case RuleFamily::beta:
    case RuleFamily::nu:
        return d.items * d.processes;
    case RuleFamily::eta_exp:
    case RuleFamily::eta_prod:
        return d.items;
    case RuleFamily::trade_import:
    case RuleFamily::trade_export:
        return d.areas * d.areas;
    }
    return 0;
}

} // namespace

std::vector<FamilyStability> compare_rule_presence(const AdaptationRuleSet& first, const AdaptationRuleSet& second,
                                                   const Catalog& catalog)
{
    const auto d = catalog.dims();
    std::vector<FamilyStability> out;
    for (auto f : kRuleFamilies) {
        const auto universe = universe_size(f, d);
        auto weight = [](const RuleValue& v) { return v.has_weight(); };
        auto rewire = [](const RuleValue& v) { return v.has_rewire(); };
        out.push_back(compare(fmt::format("W_{}", family_name(f)), keys_where(first[f], weight),
                              keys_where(second[f], weight), universe));
        out.push_back(compare(fmt::format("R_{}", family_name(f)), keys_where(first[f], rewire),
                              keys_where(second[f], rewire), universe));
    }
    std::size_t pairs = 0;
    for (const auto& g : catalog.group_names()) {
        const auto m = catalog.group_members(g).size();
        pairs += m * (m - 1);
    }
    KeySet s1;
    KeySet s2;
    for (const auto& c : first.substitution.cells()) {
        s1.emplace(c.row, c.col);
    }
    for (const auto& c : second.substitution.cells()) {
        s2.emplace(c.row, c.col);
    }
    out.push_back(compare("S", s1, s2, pairs));
    return out;
}

StabilityReport stability_analysis(std::span<const ParameterSet> normalized, const Catalog& catalog,
                                   const CalibrationConfig& config, int split_year, int edge_window)
{
    if (normalized.empty()) {
        throw ValidationError("stability analysis needs yearly parameters");
    }
    const int first = normalized.front().year;
    const int last = normalized.back().year;
    const int min_span = 2 * edge_window + 1;
    if (split_year - first + 1 < min_span || last - split_year + 1 < min_span) {
        throw ValidationError(fmt::format(
            "series {}-{} too short for a split at {}: each half needs at least {} consecutive years", first, last,
            split_year, min_span));
    }

    auto half = [&](int from, int to) {
        std::vector<ParameterSet> years;
        for (const auto& p : normalized) {
            if (p.year >= from && p.year <= to) {
                years.push_back(p);
            }
        }
        CalibrationConfig c = config;
        c.min_window_years = edge_window;
        c.first_event_year = from + edge_window;
        c.last_event_year = to - edge_window;
        return fit_rules(years, catalog, c);
    };
    const auto a = half(first, split_year);
    const auto b = half(split_year, last);

    StabilityReport report;
    report.split_year = split_year;
    report.delta_rel = config.delta_rel;
    report.delta_abs = config.delta_abs;
    report.delta_dev = config.delta_dev;
    report.events_first = a.events.size();
    report.events_second = b.events.size();
    report.families = compare_rule_presence(a.rules, b.rules, catalog);
    return report;
}

std::vector<StabilityReport> stability_sweep(std::span<const ParameterSet> normalized, const Catalog& catalog,
                                             const CalibrationConfig& config, std::span<const double> rel_grid,
                                             std::span<const double> dev_grid, int split_year, int edge_window)
{
    std::vector<StabilityReport> out;
    for (double rel : rel_grid) {
        CalibrationConfig c = config;
        c.delta_rel = rel;
        out.push_back(stability_analysis(normalized, catalog, c, split_year, edge_window));
    }
    for (double dev : dev_grid) {
        CalibrationConfig c = config;
        c.delta_dev = dev;
        out.push_back(stability_analysis(normalized, catalog, c, split_year, edge_window));
    }
    return out;
}

void write_stability(std::span<const StabilityReport> reports, const std::filesystem::path& path)
{
    csv::Writer out(path, {"delta_rel", "delta_abs", "delta_dev", "split_year", "events_first", "events_second",
                           "family", "rules_first", "rules_second", "tp", "tn", "fp", "fn", "mcc"});
    for (const auto& r : reports) {
        for (const auto& f : r.families) {
            out.field(r.delta_rel)
                .field(r.delta_abs)
                .field(r.delta_dev)
                .field(r.split_year)
                .field(r.events_first)
                .field(r.events_second)
                .field(f.family)
                .field(f.rules_first)
                .field(f.rules_second)
                .field(f.counts.tp)
                .field(f.counts.tn)
                .field(f.counts.fp)
                .field(f.counts.fn)
                .field(f.mcc)
                .end_row();
        }
    }
    out.commit();
}

} // namespace foodshock
