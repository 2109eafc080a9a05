#pragma once

#include "foodshock/calibration.hpp"
#include "foodshock/rules.hpp"
#include "foodshock/statistics.hpp"
#include "foodshock/substitutability.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace foodshock {

/// Everything produced by one calibration pass over growth-normalized years.
struct CalibrationResult {
    std::vector<Event> events;
    std::vector<RuleComponent> components;
    AdaptationRuleSet rules; ///< includes the admitted substitution indices
    std::vector<SubstitutionTest> substitution_tests;
    DetectionLog detection;
    std::size_t excluded_zero_index = 0;
};

/// Detects events and fits adaptation and substitution rules.
CalibrationResult fit_rules(std::span<const ParameterSet> normalized, const Catalog& catalog,
                            const CalibrationConfig& config);

struct FamilyStability {
    std::string family; ///< "W_alpha", "R_trade_import", ..., "S"
    stats::ConfusionCounts counts;
    double mcc = 0.0;
    std::size_t rules_first = 0;
    std::size_t rules_second = 0;
};

struct StabilityReport {
    int split_year = 0;
    double delta_rel = 0.0;
    double delta_abs = 0.0;
    double delta_dev = 0.0;
    std::size_t events_first = 0;
    std::size_t events_second = 0;
    std::vector<FamilyStability> families;

    const FamilyStability* family(std::string_view name) const;
};

inline constexpr int kDefaultSplitYear = 2006;
inline constexpr int kDefaultEdgeWindow = 3;

/// Fits rules independently on [first, split] and [split, last] with the
/// stability window shortened to `edge_window` years and compares rule
/// presence per family with the Matthews correlation.
StabilityReport stability_analysis(std::span<const ParameterSet> normalized, const Catalog& catalog,
                                   const CalibrationConfig& config, int split_year = kDefaultSplitYear,
                                   int edge_window = kDefaultEdgeWindow);

/// Presence comparison of two fitted rule sets.
std::vector<FamilyStability> compare_rule_presence(const AdaptationRuleSet& first, const AdaptationRuleSet& second,
                                                   const Catalog& catalog);

/// One report per grid point: delta_rel varied with delta_dev fixed, then
/// delta_dev varied with delta_rel fixed.
std::vector<StabilityReport> stability_sweep(std::span<const ParameterSet> normalized, const Catalog& catalog,
                                             const CalibrationConfig& config, std::span<const double> rel_grid,
                                             std::span<const double> dev_grid, int split_year = kDefaultSplitYear,
                                             int edge_window = kDefaultEdgeWindow);

void write_stability(std::span<const StabilityReport> reports, const std::filesystem::path& path);

} // namespace foodshock
