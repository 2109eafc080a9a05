#pragma once

#include "foodshock/calibration.hpp"
#include "foodshock/simulator.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace foodshock::cli {

struct ShockEntry {
    std::string area; ///< code or name
    std::string item;
    double phi = 1.0;
};

struct ScenarioSpec {
    std::string name;
    std::vector<ShockEntry> shocks;
};

struct SamplingSpec {
    std::size_t n_samples = 1000;
    std::size_t pool_size = 100;
    double phi = 1.0;
    std::optional<std::string> pair; ///< "A1:I1,A2:I2" switches to explicit-pair mode
};

struct ValidationSpec {
    int train_last_year = 2010;
    int benchmark_first_year = 2011;
    int benchmark_last_year = 2020;
    int split_year = 2006;
    int edge_window = 3;
    std::vector<double> rel_grid{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7};
    std::vector<double> dev_grid{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7};
};

/// Everything a command needs; loaded from a JSON file, then overridden from
/// the command line. Defaults reproduce the published setup.
struct RunConfig {
    std::filesystem::path data_dir = "data";
    std::filesystem::path output_dir = "out";
    std::optional<std::filesystem::path> rules_path; ///< defaults to <output_dir>/rules.csv
    std::uint64_t seed = 20240101;
    unsigned threads = 1;

    CalibrationConfig calibration;
    double share_floor = 1e-3;
    int start_year = 1992;
    std::optional<int> end_year; ///< defaults to the last year on disk

    SimulationConfig simulation;
    std::optional<int> simulation_year; ///< defaults to the last year of the range

    std::vector<ScenarioSpec> scenarios;
    SamplingSpec sampling;
    ValidationSpec validation;

    /// Propagates seed and thread count into the sub-configs and validates.
    void finalize();
    nlohmann::ordered_json echo() const;

    std::filesystem::path catalog_dir() const { return data_dir / "catalog"; }
    std::filesystem::path years_dir() const { return data_dir / "years"; }
    std::filesystem::path rules_file() const { return rules_path ? *rules_path : output_dir / "rules.csv"; }
};

/// Parses a configuration document. Unknown keys are rejected so typos do
/// not silently fall back to defaults.
RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig load_run_config(const std::filesystem::path& path);

} // namespace foodshock::cli
