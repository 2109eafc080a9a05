#pragma once

#include "foodshock/calibration.hpp"
#include "foodshock/catalog.hpp"
#include "foodshock/parameter_set.hpp"
#include "foodshock/rules.hpp"
#include "foodshock/simulator.hpp"

#include <filesystem>
#include <random>
#include <vector>

namespace fixtures {

using foodshock::Dims;

/// Catalog with codes A0.., I0.., P0..; items alternate between two groups,
/// populations between 1e6 and 5e7, HDI values spread over all bands.
foodshock::Catalog make_catalog(const Dims& dims, std::uint64_t seed = 1);

struct NetworkShape {
    std::size_t max_areas = 6;
    std::size_t max_items = 5;
    std::size_t max_processes = 3;
};

Dims random_dims(std::mt19937_64& rng, const NetworkShape& shape = {});

/// A parameter set satisfying every invariant, with a mix of inputless and
/// input-driven outputs, partial input-share rows and sparse trade.
foodshock::ParameterSet random_parameters(std::mt19937_64& rng, const Dims& dims, int year = 2020);

/// Sectors with inputless output and no input-driven output.
std::vector<std::size_t> primary_sectors(const foodshock::ParameterSet& params);

/// Every sector an inputless exporter shipping 30 % of its availability,
/// split evenly over the other areas. Output grows with area and item index.
foodshock::ParameterSet trading_network(const Dims& dims, int year = 2020);

/// Rules on random keys of every family, with both branches.
foodshock::AdaptationRuleSet random_rules(std::mt19937_64& rng, const Dims& dims, double density = 0.5);

/// Availability x(t) for t = 0..tau from a dense re-implementation of the
/// output, trade and amount recursion, with a constant shock `phi` per sector.
std::vector<std::vector<double>> dense_trajectory(const foodshock::ParameterSet& params,
                                                  const std::vector<double>& phi, int tau);

/// Yearly parameter sets in [first, last] derived from one random base: every
/// year perturbs shares and rates, and occasionally adds links. Availability
/// follows a stable noisy level per sector.
std::vector<foodshock::ParameterSet> random_years(std::mt19937_64& rng, const Dims& dims, int first, int last,
                                                  double noise = 0.02);

/// Multiplies x0 of `sector` by (1 - loss) from `year` on.
void plant_drop(std::vector<foodshock::ParameterSet>& yearly, std::size_t sector, int year, double loss);

/// Sector series with one planted drop each (occasionally none or two),
/// varying noise, levels and zero runs; years 1992..2020.
foodshock::AvailabilitySeries planted_series(std::mt19937_64& rng, std::size_t sectors);

/// Direct evaluation of the event definition: the largest admissible
/// relative decrease per sector, kept if it passes all three criteria.
std::vector<foodshock::Event> brute_force_events(const foodshock::AvailabilitySeries& series,
                                                 const foodshock::CalibrationConfig& config);

/// Writes catalog/ and years/<year>/ under `root`.
void write_dataset(const std::filesystem::path& root, const foodshock::Catalog& catalog,
                   const std::vector<foodshock::ParameterSet>& yearly);

/// Fresh empty directory under the system temp dir.
std::filesystem::path temp_dir(const std::string& name);

std::string read_file(const std::filesystem::path& path);

} // namespace fixtures
