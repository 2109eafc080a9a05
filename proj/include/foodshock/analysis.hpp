#pragma once

#include "foodshock/calibration.hpp"
#include "foodshock/catalog.hpp"
#include "foodshock/rules.hpp"
#include "foodshock/simulator.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace foodshock {

/// Model quantities are tonnes (or 1000 heads); losses are reported per
/// person in kg (or heads).
inline constexpr double kUnitsPerModelUnit = 1000.0;

/// Per-capita losses of one shocked run against its baseline, at the final
/// step. Negative entries are net gains.
struct LossReport {
    Dims dims;
    std::vector<double> shortfall;  ///< baseline minus shocked availability, model units
    std::vector<double> per_capita; ///< shortfall * 1000 / population
    ShockSpec shock;
    bool adaptive = false;

    double at(std::size_t area, std::size_t item) const { return per_capita[dims.sector(area, item)]; }
};

/// Throws DataError naming the first area without a population.
LossReport loss_per_capita(const Trajectory& baseline, const Trajectory& shocked, const Catalog& catalog,
                           const ShockSpec& shock = {}, bool adaptive = false);

/// Summed shortfall over areas x items divided by the summed population of
/// the areas.
double aggregate_loss(const LossReport& report, std::span<const std::size_t> areas,
                      std::span<const std::size_t> items, const Catalog& catalog);

std::vector<std::size_t> all_areas(const Catalog& catalog);
std::vector<std::size_t> all_items(const Catalog& catalog);

enum class Additivity { sub_additive, neutral, super_additive };

std::string_view additivity_name(Additivity a);

inline constexpr double kAdditivityTolerance = 1e-9;

struct SuperpositionValue {
    double si = 0.0;
    double combined = 0.0;
    double first = 0.0;
    double second = 0.0;
    Additivity kind = Additivity::neutral;
};

/// L_combined - (L_1 + L_2) on the scope (areas, items).
SuperpositionValue superposition_impact(const LossReport& combined, const LossReport& first,
                                        const LossReport& second, std::span<const std::size_t> areas,
                                        std::span<const std::size_t> items, const Catalog& catalog);

struct SamplingConfig {
    std::size_t n_samples = 1000;
    std::size_t pool_size = 100;
    double phi = 1.0;
    std::uint64_t seed = 20240101;
    unsigned threads = 1;
    /// Called after each evaluated sample with (completed, total); may be
    /// invoked from worker threads, one call at a time.
    std::function<void(std::size_t, std::size_t)> progress;
};

/// Exporting primary-product sectors (positive inputless output, positive
/// export share and at least one importer), largest inputless output first.
std::vector<ShockTarget> eligible_shock_pool(const ParameterSet& params, std::size_t pool_size, double phi);

struct PairResult {
    ShockTarget first;
    ShockTarget second;
    SuperpositionValue shocked_items; ///< all areas, the shocked items
    SuperpositionValue all_items;     ///< all areas, all items
};

struct SuperpositionReport {
    std::vector<ShockTarget> pool;
    std::vector<PairResult> pairs;
    double mean_shocked_items = 0.0;
    double mean_all_items = 0.0;
    double p_shocked_items = 1.0; ///< one-sided t-test, H0: mean <= 0
    double p_all_items = 1.0;
    /// Global baseline availability per person at the final step, the
    /// denominator for relative superposition values.
    double availability_per_capita = 0.0;
    std::uint64_t seed = 0;
};

/// Runs both singles and the combined shock for one pair.
PairResult superpose_pair(const ParameterSet& params, const AdaptationRuleSet& rules, const Catalog& catalog,
                          const SimulationConfig& config, const Trajectory& baseline, const ShockTarget& first,
                          const ShockTarget& second);

/// Draws n_samples same-group pairs (with replacement across samples) from
/// the eligibility pool and evaluates each. Bit-reproducible for a seed,
/// independent of the thread count.
SuperpositionReport sample_combined_shocks(const ParameterSet& params, const AdaptationRuleSet& rules,
                                           const Catalog& catalog, const SimulationConfig& config,
                                           const SamplingConfig& sampling);

/// Summary statistics over already evaluated pairs.
void summarize_pairs(SuperpositionReport& report);

struct TradeImpact {
    std::size_t importer = 0;
    std::size_t exporter = 0;
    double multiplier = 0.0;
    double impact = 0.0;
};

struct SubstitutionImpact {
    std::size_t item = 0;
    std::size_t substitute = 0;
    double index = 0.0;
    double impact = 0.0;
};

struct ProductionImpact {
    RuleFamily family{};
    std::size_t item = 0;
    std::size_t process = 0;
    double multiplier = 0.0;
    double impact = 0.0;
};

/// Rule impact estimates, each list sorted by impact, largest first.
struct ImpactReport {
    std::vector<TradeImpact> trade;
    std::vector<SubstitutionImpact> substitution;
    std::vector<ProductionImpact> production;
};

ImpactReport impact_estimators(const ParameterSet& params, const AdaptationRuleSet& rules);

struct HdiGroupChange {
    std::string group;
    std::size_t countries = 0;
    double mean_relative_change = 0.0; ///< (adaptive - static) / static, averaged
};

inline constexpr double kHdiLowBound = 0.6;
inline constexpr double kHdiHighBound = 0.8;

/// Mean relative loss change per HDI band (below 0.6, 0.6 to 0.8, above 0.8)
/// and per catalog HDI category. Countries with zero static loss on the
/// item scope, and those in `excluded_areas`, are left out.
std::vector<HdiGroupChange> hdi_group_losses(const LossReport& static_report, const LossReport& adaptive_report,
                                             const Catalog& catalog, std::span<const std::size_t> items,
                                             std::span<const std::size_t> excluded_areas = {});

struct SectorDistribution {
    std::size_t sector = 0;
    double share_mean = 0.0;
    double share_sd = 0.0;
    double per_capita_mean = 0.0;
    double per_capita_sd = 0.0;
};

struct ReconciliationSeries {
    std::string name;
    std::vector<SectorDistribution> sectors;
    double mean_share_sd = 0.0;
    double mean_per_capita_sd = 0.0;
};

struct ReconciliationConfig {
    int benchmark_first_year = 2011;
    int benchmark_last_year = 2020;
};

struct ReconciliationResult {
    std::vector<Event> shocks;
    std::vector<ReconciliationSeries> series; ///< benchmark, baseline, static, adaptive
    Trajectory baseline;
    Trajectory static_run;
    Trajectory adaptive_run;

    const ReconciliationSeries* find(std::string_view name) const;
};

/// Replays the real events of the first benchmark year as fractional shocks
/// on that year's parameters and compares market-share and per-capita
/// dispersion of the three simulations with the observed benchmark years.
/// `yearly` is the raw (thresholded, not growth-normalized) series; `rules`
/// must have been fitted on years before the benchmark.
ReconciliationResult reconciliation_harness(std::span<const ParameterSet> yearly, const AdaptationRuleSet& rules,
                                            const Catalog& catalog, const CalibrationConfig& calibration,
                                            const SimulationConfig& simulation,
                                            const ReconciliationConfig& reconciliation = {});

} // namespace foodshock

namespace foodshock {

/// losses.csv: area,item,unit,L_static,L_adaptive
void write_losses(const LossReport& static_report, const LossReport& adaptive_report, const Catalog& catalog,
                  const std::filesystem::path& path);
void write_superposition(const SuperpositionReport& report, const Catalog& catalog,
                         const std::filesystem::path& path);
void write_impacts(const ImpactReport& report, const Catalog& catalog, const std::filesystem::path& path);
void write_hdi(std::span<const HdiGroupChange> groups, const std::filesystem::path& path);
void write_reconciliation(const ReconciliationResult& result, const Catalog& catalog,
                          const std::filesystem::path& path);

} // namespace foodshock
