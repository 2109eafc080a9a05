#include "foodshock/cli/commands.hpp"
#include "foodshock/cli/run_config.hpp"
#include "foodshock/errors.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace {

enum ExitCode { kSuccess = 0, kValidation = 1, kData = 2 };

int fail(ExitCode code, std::string_view kind, std::string_view message)
{
    nlohmann::json err{{"error", {{"kind", kind}, {"message", message}}}};
    std::cerr << err.dump() << std::endl;
    return code;
}

} // namespace

int main(int argc, char** argv)
{
    using namespace foodshock;

    CLI::App app{"Adaptive shock propagation on a food production and trade network"};
    app.require_subcommand(1);

    std::optional<std::string> config_path;
    std::optional<std::string> data_dir;
    std::optional<std::string> out_dir;
    std::optional<std::string> rules_path;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::optional<std::string> scenario;
    std::optional<std::string> pair;
    std::optional<std::size_t> samples;

    app.add_option("--config", config_path, "JSON run configuration")->envname("FOODSHOCK_CONFIG");
    app.add_option("--data-dir", data_dir, "Input directory holding catalog/ and years/")
        ->envname("FOODSHOCK_DATA_DIR");
    app.add_option("--out", out_dir, "Output directory")->envname("FOODSHOCK_OUT");
    app.add_option("--rules", rules_path, "Rules file (default <out>/rules.csv)")->envname("FOODSHOCK_RULES");
    app.add_option("--seed", seed, "Random seed")->envname("FOODSHOCK_SEED");
    app.add_option("--threads", threads, "Worker threads")->envname("FOODSHOCK_THREADS")->check(CLI::PositiveNumber);

    auto* calibrate = app.add_subcommand("calibrate", "Detect events and fit adaptation rules");
    auto* simulate = app.add_subcommand("simulate", "Run static and adaptive shock scenarios");
    simulate->add_option("--scenario", scenario, "Only run the named scenario");
    auto* superpose = app.add_subcommand("superpose", "Superposition experiment (explicit pair or sampling)");
    superpose->add_option("--pair", pair, "Explicit pair AREA1:ITEM1,AREA2:ITEM2");
    superpose->add_option("--samples", samples, "Number of sampled pairs")->check(CLI::PositiveNumber);
    auto* validate = app.add_subcommand("validate", "Reconciliation harness and stability sweep");
    auto* report = app.add_subcommand("report", "Impact estimates for fitted rules");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail(kValidation, "usage", e.what());
    }

    try {
        cli::RunConfig config = config_path ? cli::load_run_config(*config_path) : cli::RunConfig{};
        if (data_dir) {
            config.data_dir = *data_dir;
        }
        if (out_dir) {
            config.output_dir = *out_dir;
        }
        if (rules_path) {
            config.rules_path = std::filesystem::path(*rules_path);
        }
        if (seed) {
            config.seed = *seed;
        }
        if (threads) {
            config.threads = *threads;
        }
        if (pair) {
            config.sampling.pair = *pair;
        }
        if (samples) {
            config.sampling.n_samples = *samples;
        }
        config.finalize();

        if (calibrate->parsed()) {
            cli::cmd_calibrate(config, std::cerr);
        } else if (simulate->parsed()) {
            cli::cmd_simulate(config, scenario, std::cerr);
        } else if (superpose->parsed()) {
            cli::cmd_superpose(config, std::cerr);
        } else if (validate->parsed()) {
            cli::cmd_validate(config, std::cerr);
        } else if (report->parsed()) {
            cli::cmd_report(config, std::cerr);
        }
    } catch (const ValidationError& e) {
        return fail(kValidation, "validation", e.what());
    } catch (const DataError& e) {
        return fail(kData, "data", e.what());
    } catch (const std::filesystem::filesystem_error& e) {
        return fail(kData, "data", e.what());
    } catch (const std::exception& e) {
        return fail(kValidation, "internal", e.what());
    }
    return kSuccess;
}
