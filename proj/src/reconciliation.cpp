#include "foodshock/analysis.hpp"
#include "foodshock/errors.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <cmath>

namespace foodshock {

const ReconciliationSeries* ReconciliationResult::find(std::string_view name) const
{
    for (const auto& s : series) {
        if (s.name == name) {
            return &s;
        }
    }
    return nullptr;
}

namespace {

struct MeanSd {
    double mean = 0.0;
    double sd = 0.0;
};

// Population standard deviation over the time axis.
MeanSd describe(std::span<const double> values)
{
    MeanSd out;
    if (values.empty()) {
        return out;
    }
    double sum = 0.0;
    for (double v : values) {
        sum += v;
    }
    out.mean = sum / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) {
        ss += (v - out.mean) * (v - out.mean);
    }
    out.sd = std::sqrt(ss / static_cast<double>(values.size()));
    return out;
}

ReconciliationSeries summarize(std::string name, const std::vector<std::vector<double>>& frames,
                               std::span<const std::size_t> sectors, const Dims& dims,
                               const std::vector<double>& persons)
{
    // Item totals per frame for the market share denominator.
    std::vector<std::vector<double>> item_totals(frames.size(), std::vector<double>(dims.items, 0.0));
    for (std::size_t t = 0; t < frames.size(); ++t) {
        for (std::size_t s = 0; s < dims.sectors(); ++s) {
            item_totals[t][dims.unpack(s).item] += frames[t][s];
        }
    }

    ReconciliationSeries out;
    out.name = std::move(name);
    std::vector<double> share(frames.size());
    std::vector<double> per_capita(frames.size());
    double share_sd = 0.0;
    double pc_sd = 0.0;
    for (auto s : sectors) {
        const auto sec = dims.unpack(s);
        for (std::size_t t = 0; t < frames.size(); ++t) {
            const double total = item_totals[t][sec.item];
            share[t] = total > 0.0 ? frames[t][s] / total : 0.0;
            per_capita[t] = frames[t][s] * kUnitsPerModelUnit / persons[sec.area];
        }
        const auto sh = describe(share);
        const auto pc = describe(per_capita);
        out.sectors.push_back({s, sh.mean, sh.sd, pc.mean, pc.sd});
        share_sd += sh.sd;
        pc_sd += pc.sd;
    }
    if (!sectors.empty()) {
        out.mean_share_sd = share_sd / static_cast<double>(sectors.size());
        out.mean_per_capita_sd = pc_sd / static_cast<double>(sectors.size());
    }
    return out;
}

std::vector<std::vector<double>> frames_of(const Trajectory& run)
{
    std::vector<std::vector<double>> frames;
    frames.reserve(run.steps.size());
    for (const auto& step : run.steps) {
        frames.push_back(step.x);
    }
    return frames;
}

} // namespace

ReconciliationResult reconciliation_harness(std::span<const ParameterSet> yearly, const AdaptationRuleSet& rules,
                                            const Catalog& catalog, const CalibrationConfig& calibration,
                                            const SimulationConfig& simulation,
                                            const ReconciliationConfig& reconciliation)
{
    calibration.validate();
    simulation.validate();
    if (reconciliation.benchmark_last_year < reconciliation.benchmark_first_year) {
        throw ValidationError("reconciliation: benchmark range is empty");
    }
    if (yearly.empty()) {
        throw DataError("reconciliation: no yearly parameters");
    }
    const Dims dims = catalog.dims();

    auto find_year = [&](int year) -> const ParameterSet* {
        for (const auto& p : yearly) {
            if (p.year == year) {
                return &p;
            }
        }
        return nullptr;
    };
    std::vector<int> missing;
    std::vector<const ParameterSet*> benchmark;
    for (int y = reconciliation.benchmark_first_year; y <= reconciliation.benchmark_last_year; ++y) {
        const auto* p = find_year(y);
        if (!p) {
            missing.push_back(y);
        }
        benchmark.push_back(p);
    }
    if (!missing.empty()) {
        throw DataError(fmt::format("reconciliation: benchmark years missing: {}", fmt::join(missing, ", ")));
    }
    const ParameterSet& start = *benchmark.front();
    if (!(start.dims == dims)) {
        throw ValidationError("reconciliation: parameter shape does not match the catalog");
    }

    // Events of the first benchmark year, judged on the growth-normalized series.
    const int base = find_year(calibration.base_year) ? calibration.base_year : yearly.front().year;
    const auto normalized = normalize_growth(yearly, base);
    const auto series = AvailabilitySeries::from_parameters(normalized);

    ReconciliationResult result;
    ShockSpec shock;
    for (std::size_t s = 0; s < dims.sectors(); ++s) {
        if (auto e = evaluate_event_at(series, s, reconciliation.benchmark_first_year, calibration)) {
            result.shocks.push_back(*e);
            shock.targets.push_back({e->area, e->item, e->loss});
        }
    }

    SimulationConfig static_config = simulation;
    static_config.adaptation_enabled = false;
    static_config.substitution_enabled = false;
    SimulationConfig adaptive_config = simulation;
    adaptive_config.adaptation_enabled = true;
    adaptive_config.substitution_enabled = true;

    result.baseline = run_baseline(start, static_config);
    result.static_run = run_scenario(start, shock, rules, result.baseline, static_config);
    result.adaptive_run = run_scenario(start, shock, rules, result.baseline, adaptive_config);

    // Observed availability rescaled to the starting year's global total.
    auto total_of = [](const std::vector<double>& x) {
        double sum = 0.0;
        for (double v : x) {
            sum += v;
        }
        return sum;
    };
    const double start_total = total_of(start.x0);
    std::vector<std::vector<double>> observed;
    for (const auto* p : benchmark) {
        const double total = total_of(p->x0);
        const double factor = total > 0.0 ? start_total / total : 0.0;
        std::vector<double> x(p->x0);
        for (auto& v : x) {
            v *= factor;
        }
        observed.push_back(std::move(x));
    }

    std::vector<double> persons(dims.areas);
    for (std::size_t a = 0; a < dims.areas; ++a) {
        persons[a] = catalog.require_population(a);
    }
    std::vector<std::size_t> sectors;
    for (std::size_t s = 0; s < dims.sectors(); ++s) {
        if (start.x0[s] > 0.0) {
            sectors.push_back(s);
        }
    }

    result.series.push_back(summarize("benchmark", observed, sectors, dims, persons));
    result.series.push_back(summarize("baseline", frames_of(result.baseline), sectors, dims, persons));
    result.series.push_back(summarize("static", frames_of(result.static_run), sectors, dims, persons));
    result.series.push_back(summarize("adaptive", frames_of(result.adaptive_run), sectors, dims, persons));
    return result;
}

} // namespace foodshock
