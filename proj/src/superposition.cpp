#include "foodshock/analysis.hpp"
#include "foodshock/errors.hpp"
#include "foodshock/parallel.hpp"
#include "foodshock/statistics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <mutex>
#include <random>

namespace foodshock {

std::vector<ShockTarget> eligible_shock_pool(const ParameterSet& params, std::size_t pool_size, double phi)
{
    const Dims& dims = params.dims;
    const auto export_sums = params.trade.exporter_sums();
    struct Candidate {
        std::size_t sector;
        double volume;
    };
    std::vector<Candidate> candidates;
    for (std::size_t s = 0; s < dims.sectors(); ++s) {
        const double volume = row_sum(params.beta.row(s));
        if (volume > 0.0 && params.alpha.row(s).empty() && params.eta_exp[s] > 0.0 && export_sums[s] > 0.0) {
            candidates.push_back({s, volume});
        }
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) { return a.volume > b.volume; });
    if (candidates.size() > pool_size) {
        candidates.resize(pool_size);
    }
    std::vector<ShockTarget> pool;
    pool.reserve(candidates.size());
    for (const auto& c : candidates) {
        const auto sec = dims.unpack(c.sector);
        pool.push_back({sec.area, sec.item, phi});
    }
    return pool;
}

namespace {

struct PairScopes {
    std::vector<std::size_t> items;
    std::vector<std::size_t> every_item;
    std::vector<std::size_t> every_area;
};

PairResult evaluate_pair(const LossReport& combined, const LossReport& first, const LossReport& second,
                         const ShockTarget& a, const ShockTarget& b, const Catalog& catalog,
                         const std::vector<std::size_t>& areas, const std::vector<std::size_t>& items)
{
    std::vector<std::size_t> shocked_items{a.item};
    if (b.item != a.item) {
        shocked_items.push_back(b.item);
    }
    PairResult r;
    r.first = a;
    r.second = b;
    r.shocked_items = superposition_impact(combined, first, second, areas, shocked_items, catalog);
    r.all_items = superposition_impact(combined, first, second, areas, items, catalog);
    return r;
}

LossReport single_run(const ParameterSet& params, const AdaptationRuleSet& rules, const Catalog& catalog,
                      const SimulationConfig& config, const Trajectory& baseline, const ShockSpec& spec)
{
    const auto run = run_scenario(params, spec, rules, baseline, config);
    return loss_per_capita(baseline, run, catalog, spec, config.adaptation_enabled);
}

} // namespace

PairResult superpose_pair(const ParameterSet& params, const AdaptationRuleSet& rules, const Catalog& catalog,
                          const SimulationConfig& config, const Trajectory& baseline, const ShockTarget& first,
                          const ShockTarget& second)
{
    if (first.area == second.area && first.item == second.item) {
        throw ValidationError("superposition needs two distinct shocked sectors");
    }
    const ShockSpec a{{first}};
    const ShockSpec b{{second}};
    const auto combined = ShockSpec::combine(a, b);
    const auto l1 = single_run(params, rules, catalog, config, baseline, a);
    const auto l2 = single_run(params, rules, catalog, config, baseline, b);
    const auto lc = single_run(params, rules, catalog, config, baseline, combined);
    return evaluate_pair(lc, l1, l2, first, second, catalog, all_areas(catalog), all_items(catalog));
}

void summarize_pairs(SuperpositionReport& report)
{
    std::vector<double> items;
    std::vector<double> all;
    for (const auto& p : report.pairs) {
        items.push_back(p.shocked_items.si);
        all.push_back(p.all_items.si);
    }
    report.mean_shocked_items = stats::mean(items);
    report.mean_all_items = stats::mean(all);
    report.p_shocked_items = stats::t_test_greater(items);
    report.p_all_items = stats::t_test_greater(all);
}

namespace {

double availability_per_capita(const Trajectory& baseline, const Catalog& catalog)
{
    const Dims dims = catalog.dims();
    const auto& x = baseline.final_state().x;
    double total = 0.0;
    double persons = 0.0;
    for (std::size_t a = 0; a < dims.areas; ++a) {
        persons += catalog.require_population(a);
        for (std::size_t i = 0; i < dims.items; ++i) {
            total += x[dims.sector(a, i)];
        }
    }
    return persons > 0.0 ? total * kUnitsPerModelUnit / persons : 0.0;
}

} // namespace

SuperpositionReport sample_combined_shocks(const ParameterSet& params, const AdaptationRuleSet& rules,
                                           const Catalog& catalog, const SimulationConfig& config,
                                           const SamplingConfig& sampling)
{
    config.validate();
    if (sampling.n_samples == 0) {
        throw ValidationError("sample_combined_shocks: n_samples must be positive");
    }
    SuperpositionReport report;
    report.seed = sampling.seed;
    report.pool = eligible_shock_pool(params, sampling.pool_size, sampling.phi);
    if (report.pool.size() < 2) {
        throw ValidationError(
            fmt::format("eligibility pool has {} sector(s); at least 2 are needed", report.pool.size()));
    }

    std::vector<std::pair<std::size_t, std::size_t>> candidates;
    for (std::size_t u = 0; u < report.pool.size(); ++u) {
        for (std::size_t v = u + 1; v < report.pool.size(); ++v) {
            if (catalog.same_group(report.pool[u].item, report.pool[v].item)) {
                candidates.emplace_back(u, v);
            }
        }
    }
    if (candidates.empty()) {
        throw ValidationError("eligibility pool has no two sectors in the same product group");
    }

    std::seed_seq seq{static_cast<std::uint32_t>(sampling.seed), static_cast<std::uint32_t>(sampling.seed >> 32)};
    std::mt19937_64 rng(seq);
    std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
    std::vector<std::pair<std::size_t, std::size_t>> draws(sampling.n_samples);
    for (auto& d : draws) {
        d = candidates[pick(rng)];
    }

    const auto baseline = run_baseline(params, config);
    report.availability_per_capita = availability_per_capita(baseline, catalog);

    std::vector<char> used(report.pool.size(), 0);
    for (const auto& [u, v] : draws) {
        used[u] = used[v] = 1;
    }
    std::vector<std::size_t> members;
    for (std::size_t k = 0; k < used.size(); ++k) {
        if (used[k]) {
            members.push_back(k);
        }
    }
    std::vector<LossReport> singles(report.pool.size());
    parallel_for(members.size(), sampling.threads, [&](std::size_t k) {
        const auto m = members[k];
        singles[m] = single_run(params, rules, catalog, config, baseline, ShockSpec{{report.pool[m]}});
    });

    const auto areas = all_areas(catalog);
    const auto items = all_items(catalog);
    report.pairs.resize(draws.size());
    std::mutex progress_mutex;
    std::size_t done = 0;
    parallel_for(draws.size(), sampling.threads, [&](std::size_t k) {
        const auto [u, v] = draws[k];
        const auto& a = report.pool[u];
        const auto& b = report.pool[v];
        const auto combined =
            single_run(params, rules, catalog, config, baseline, ShockSpec::combine(ShockSpec{{a}}, ShockSpec{{b}}));
        report.pairs[k] = evaluate_pair(combined, singles[u], singles[v], a, b, catalog, areas, items);
        if (sampling.progress) {
            std::lock_guard lock(progress_mutex);
            sampling.progress(++done, draws.size());
        }
    });
    summarize_pairs(report);
    return report;
}

} // namespace foodshock
