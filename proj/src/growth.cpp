#include "foodshock/calibration.hpp"

#include "foodshock/errors.hpp"

#include <fmt/format.h>

#include <algorithm>

namespace foodshock {

namespace {

std::size_t rescale_columns(SectorProcessTable& table, const std::vector<double>& base_totals)
{
    const auto& d = table.dims();
    const auto totals = table.process_totals();
    std::vector<double> factor(totals.size(), 1.0);
    std::size_t zeroed = 0;
    for (std::size_t k = 0; k < totals.size(); ++k) {
        if (totals[k] > 0.0) {
            factor[k] = base_totals[k] / totals[k];
            if (base_totals[k] == 0.0) {
                ++zeroed;
            }
        }
    }
    for (std::size_t s = 0; s < d.sectors(); ++s) {
        const auto area = s / d.items;
        auto& row = table.row(s);
        for (auto& e : row) {
            e.value *= factor[area * d.processes + e.key];
        }
        std::erase_if(row, [](const SparseEntry& e) { return e.value == 0.0; });
    }
    return zeroed;
}

} // namespace

std::vector<ParameterSet> normalize_growth(std::span<const ParameterSet> yearly, int base_year, GrowthReport* report)
{
    if (yearly.size() < 2) {
        throw ValidationError("growth normalization needs at least two years");
    }
    auto base = std::find_if(yearly.begin(), yearly.end(), [&](const ParameterSet& p) { return p.year == base_year; });
    if (base == yearly.end()) {
        throw ValidationError(fmt::format("base year {} missing from the series", base_year));
    }
    const auto alpha_base = base->alpha.process_totals();
    const auto beta_base = base->beta.process_totals();
    double x0_base = 0.0;
    for (double v : base->x0) {
        x0_base += v;
    }

    GrowthReport counts;
    std::vector<ParameterSet> out(yearly.begin(), yearly.end());
    for (auto& params : out) {
        if (!(params.dims == base->dims)) {
            throw ValidationError(fmt::format("year {} has different dimensions than the base year", params.year));
        }
        counts.zeroed_alpha_columns += rescale_columns(params.alpha, alpha_base);
        counts.zeroed_beta_columns += rescale_columns(params.beta, beta_base);
        double total = 0.0;
        for (double v : params.x0) {
            total += v;
        }
        if (total > 0.0) {
            const double factor = x0_base / total;
            for (double& v : params.x0) {
                v *= factor;
            }
        }
    }
    if (report) {
        *report = counts;
    }
    return out;
}

} // namespace foodshock
