#pragma once

#include "foodshock/catalog.hpp"
#include "foodshock/parameter_set.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace foodshock {

/// Rows repaired while loading. Every row off by more than the stochastic
/// tolerance is rescaled; rows off by more than `kFlagTolerance` are also
/// listed in `flagged`.
struct LoadReport {
    static constexpr double kFlagTolerance = 1e-6;

    std::size_t renormalized_trade = 0;
    std::size_t renormalized_nu = 0;
    std::size_t renormalized_eta = 0;
    std::vector<std::string> flagged;
};

/// Directory holding one year's parameter files: `<root>/<year>`.
std::filesystem::path year_directory(const std::filesystem::path& root, int year);

/// Loads alpha.csv, beta.csv, nu.csv, eta.csv, x0.csv and either trade.csv or
/// per-item trade_<item>.csv files from `<root>/<year>`.
ParameterSet load_parameter_set(const std::filesystem::path& root, int year, const Catalog& catalog,
                                LoadReport* report = nullptr);

/// Writes the long-form files read by load_parameter_set (single trade.csv).
void write_parameter_set(const ParameterSet& params, const Catalog& catalog, const std::filesystem::path& root);

/// Years with a parameter directory under `root`, ascending.
std::vector<int> available_years(const std::filesystem::path& root);

} // namespace foodshock
