#pragma once

#include "foodshock/cli/run_config.hpp"

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

namespace foodshock::cli {

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// Writes events.csv, rules.csv, substitution_tests.csv, stability.csv (when
/// the year range allows the split) and calibrate_manifest.json under the output dir.
void cmd_calibrate(const RunConfig& config, std::ostream& log);

/// Runs every configured scenario (or only `only`) as a static and an
/// adaptive variant; each variant gets its own directory NAME_stat / NAME_adap.
void cmd_simulate(const RunConfig& config, const std::optional<std::string>& only, std::ostream& log);

/// Explicit-pair or sampling superposition experiment.
void cmd_superpose(const RunConfig& config, std::ostream& log);

/// Reconciliation harness against the benchmark years and the stability
/// sweep over the threshold grids.
void cmd_validate(const RunConfig& config, std::ostream& log);

/// Impact estimates for the fitted rules on the base-year parameters.
void cmd_report(const RunConfig& config, std::ostream& log);

} // namespace foodshock::cli
