#include "foodshock/analysis.hpp"
#include "foodshock/errors.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numeric>

namespace foodshock {

LossReport loss_per_capita(const Trajectory& baseline, const Trajectory& shocked, const Catalog& catalog,
                           const ShockSpec& shock, bool adaptive)
{
    const Dims dims = catalog.dims();
    if (baseline.steps.empty() || shocked.steps.empty()) {
        throw ValidationError("loss_per_capita: empty trajectory");
    }
    if (baseline.steps.size() != shocked.steps.size()) {
        throw ValidationError(fmt::format("loss_per_capita: horizon mismatch ({} vs {} steps)",
                                          baseline.steps.size(), shocked.steps.size()));
    }
    const auto& xb = baseline.final_state().x;
    const auto& xs = shocked.final_state().x;
    if (xb.size() != dims.sectors() || xs.size() != dims.sectors()) {
        throw ValidationError("loss_per_capita: trajectory shape does not match the catalog");
    }

    LossReport report;
    report.dims = dims;
    report.shock = shock;
    report.adaptive = adaptive;
    report.shortfall.resize(dims.sectors());
    report.per_capita.resize(dims.sectors());
    for (std::size_t a = 0; a < dims.areas; ++a) {
        const double z = catalog.require_population(a);
        for (std::size_t i = 0; i < dims.items; ++i) {
            const auto s = dims.sector(a, i);
            report.shortfall[s] = xb[s] - xs[s];
            report.per_capita[s] = report.shortfall[s] * kUnitsPerModelUnit / z;
        }
    }
    return report;
}

namespace {

void check_scope(const Dims& dims, std::span<const std::size_t> areas, std::span<const std::size_t> items)
{
    if (areas.empty() || items.empty()) {
        throw ValidationError("loss scope needs at least one area and one item");
    }
    for (auto a : areas) {
        if (a >= dims.areas) {
            throw ValidationError(fmt::format("loss scope: area index {} out of range", a));
        }
    }
    for (auto i : items) {
        if (i >= dims.items) {
            throw ValidationError(fmt::format("loss scope: item index {} out of range", i));
        }
    }
}

} // namespace

double aggregate_loss(const LossReport& report, std::span<const std::size_t> areas,
                      std::span<const std::size_t> items, const Catalog& catalog)
{
    check_scope(report.dims, areas, items);
    double shortfall = 0.0;
    double persons = 0.0;
    for (auto a : areas) {
        persons += catalog.require_population(a);
        for (auto i : items) {
            shortfall += report.shortfall[report.dims.sector(a, i)];
        }
    }
    return shortfall * kUnitsPerModelUnit / persons;
}

std::vector<std::size_t> all_areas(const Catalog& catalog)
{
    std::vector<std::size_t> out(catalog.dims().areas);
    std::iota(out.begin(), out.end(), std::size_t{0});
    return out;
}

std::vector<std::size_t> all_items(const Catalog& catalog)
{
    std::vector<std::size_t> out(catalog.dims().items);
    std::iota(out.begin(), out.end(), std::size_t{0});
    return out;
}

std::string_view additivity_name(Additivity a)
{
    switch (a) {
    case Additivity::sub_additive: return "sub-additive";
    case Additivity::super_additive: return "super-additive";
    case Additivity::neutral: break;
    }
    return "neutral";
}

SuperpositionValue superposition_impact(const LossReport& combined, const LossReport& first,
                                        const LossReport& second, std::span<const std::size_t> areas,
                                        std::span<const std::size_t> items, const Catalog& catalog)
{
    if (!(combined.dims == first.dims) || !(combined.dims == second.dims) || !(combined.dims == catalog.dims())) {
        throw ValidationError("superposition_impact: loss reports cover different sector sets");
    }
    if (combined.adaptive != first.adaptive || combined.adaptive != second.adaptive) {
        throw ValidationError("superposition_impact: reports mix static and adaptive runs");
    }
    SuperpositionValue v;
    v.combined = aggregate_loss(combined, areas, items, catalog);
    v.first = aggregate_loss(first, areas, items, catalog);
    v.second = aggregate_loss(second, areas, items, catalog);
    v.si = v.combined - (v.first + v.second);
    const double scale = std::max({1.0, std::abs(v.combined), std::abs(v.first) + std::abs(v.second)});
    if (v.si > kAdditivityTolerance * scale) {
        v.kind = Additivity::super_additive;
    } else if (v.si < -kAdditivityTolerance * scale) {
        v.kind = Additivity::sub_additive;
    }
    return v;
}

std::vector<HdiGroupChange> hdi_group_losses(const LossReport& static_report, const LossReport& adaptive_report,
                                             const Catalog& catalog, std::span<const std::size_t> items,
                                             std::span<const std::size_t> excluded_areas)
{
    const Dims dims = catalog.dims();
    if (!(static_report.dims == dims) || !(adaptive_report.dims == dims)) {
        throw ValidationError("hdi_group_losses: loss reports do not match the catalog");
    }
    std::vector<std::size_t> areas = all_areas(catalog);
    check_scope(dims, areas, items);

    std::vector<std::string> names{"HDI < 0.6", "0.6 <= HDI <= 0.8", "HDI > 0.8"};
    std::vector<std::string> categories;
    for (std::size_t a = 0; a < dims.areas; ++a) {
        const auto& cat = catalog.hdi(a).category;
        if (std::find(categories.begin(), categories.end(), cat) == categories.end()) {
            categories.push_back(cat);
        }
    }
    std::vector<double> sums(names.size() + categories.size(), 0.0);
    std::vector<std::size_t> counts(sums.size(), 0);

    for (std::size_t a = 0; a < dims.areas; ++a) {
        if (std::find(excluded_areas.begin(), excluded_areas.end(), a) != excluded_areas.end()) {
            continue;
        }
        double stat = 0.0;
        double adap = 0.0;
        for (auto i : items) {
            stat += static_report.per_capita[dims.sector(a, i)];
            adap += adaptive_report.per_capita[dims.sector(a, i)];
        }
        if (stat == 0.0) {
            continue;
        }
        const double change = (adap - stat) / stat;
        const auto& hdi = catalog.hdi(a);
        if (hdi.value) {
            const double v = *hdi.value;
            const std::size_t band = v < kHdiLowBound ? 0 : (v > kHdiHighBound ? 2 : 1);
            sums[band] += change;
            ++counts[band];
        }
        const auto c = static_cast<std::size_t>(std::find(categories.begin(), categories.end(), hdi.category) -
                                                categories.begin());
        sums[names.size() + c] += change;
        ++counts[names.size() + c];
    }
    names.insert(names.end(), categories.begin(), categories.end());

    std::vector<HdiGroupChange> out;
    for (std::size_t g = 0; g < names.size(); ++g) {
        HdiGroupChange change;
        change.group = names[g];
        change.countries = counts[g];
        change.mean_relative_change = counts[g] ? sums[g] / static_cast<double>(counts[g]) : 0.0;
        out.push_back(std::move(change));
    }
    return out;
}

} // namespace foodshock
