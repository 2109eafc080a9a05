#pragma once

#include "foodshock/calibration.hpp"
#include "foodshock/catalog.hpp"
#include "foodshock/rules.hpp"

#include <filesystem>
#include <span>
#include <vector>

namespace foodshock {

/// Test outcome for one ordered pair (lost item -> candidate substitute).
struct SubstitutionTest {
    std::size_t from_item = 0;
    std::size_t to_item = 0;
    double s = 0.0;          ///< mean relative change of the import index
    std::size_t n_events = 0;
    double p_mean = 1.0;     ///< one-sided t-test, H0: s <= 0
    double p_perm = 1.0;     ///< permutation test
    double q_perm = 1.0;     ///< Benjamini-Hochberg adjusted p_perm
    bool admitted = false;
};

struct SubstitutabilityResult {
    SubstitutionMatrix matrix;
    std::vector<SubstitutionTest> tests;
    std::size_t excluded_zero_index = 0; ///< (event, item) pairs with an empty import index at T_E
};

/// Import index of `item` into `area` in `params`, summed over the exporters
/// in `exporters`.
double import_index(const ParameterSet& params, std::size_t area, std::size_t item,
                    std::span<const std::uint32_t> exporters);

/// Fits substitutability indices within commodity groups. Event labels are
/// permuted within each group; every group draws from its own RNG stream
/// seeded by (config.rng_seed, group index), so results do not depend on
/// config.threads.
SubstitutabilityResult derive_substitutability(std::span<const Event> events, std::span<const ParameterSet> yearly,
                                               const Catalog& catalog, const CalibrationConfig& config);

void write_substitution_tests(std::span<const SubstitutionTest> tests, const Catalog& catalog,
                              const std::filesystem::path& path);

} // namespace foodshock
