#include "foodshock/cli/commands.hpp"

#include "foodshock/analysis.hpp"
#include "foodshock/csv.hpp"
#include "foodshock/errors.hpp"
#include "foodshock/parallel.hpp"
#include "foodshock/parameter_io.hpp"
#include "foodshock/stability.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <tuple>
#include <mutex>

namespace foodshock::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::string sha256_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError(fmt::format("cannot read {}", path.string()));
    }
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 initialization failed");
    }
    std::array<char, 1 << 16> buffer{};
    while (in) {
        in.read(buffer.data(), buffer.size());
        if (in.gcount() > 0) {
            EVP_DigestUpdate(ctx.get(), buffer.data(), static_cast<std::size_t>(in.gcount()));
        }
    }
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), digest.data(), &len);
    std::string hex;
    for (unsigned int k = 0; k < len; ++k) {
        hex += fmt::format("{:02x}", digest[k]);
    }
    return hex;
}

namespace {

/// Input files whose checksums go into a manifest.
class InputLedger {
public:
    explicit InputLedger(fs::path root) : root_(std::move(root)) {}

    void add_file(const fs::path& path) { files_.insert(path.lexically_normal()); }

    void add_directory(const fs::path& dir)
    {
        for (const auto& entry : fs::directory_iterator(dir)) {
            if (entry.is_regular_file()) {
                add_file(entry.path());
            }
        }
    }

    ojson to_json() const
    {
        ojson out = ojson::array();
        for (const auto& f : files_) {
            out.push_back({{"path", f.lexically_relative(root_).generic_string()}, {"sha256", sha256_file(f)}});
        }
        return out;
    }

private:
    fs::path root_;
    std::set<fs::path> files_;
};

void write_manifest(const fs::path& path, std::string_view command, const RunConfig& config, ojson inputs,
                    ojson summary)
{
    ojson m;
    m["command"] = command;
    m["seed"] = config.seed;
    m["config"] = config.echo();
    m["inputs"] = std::move(inputs);
    m["summary"] = std::move(summary);
    csv::write_file_atomic(path, m.dump(2) + "\n");
}

struct YearData {
    Catalog catalog;
    std::vector<ParameterSet> yearly; ///< thresholded, ascending
    InputLedger inputs;
    ThresholdReport threshold;
    LoadReport load;
};

Catalog load_catalog_tracked(const RunConfig& config, InputLedger& inputs)
{
    const auto dir = config.catalog_dir();
    if (!fs::is_directory(dir)) {
        throw DataError(fmt::format("catalog directory {} not found", dir.string()));
    }
    auto catalog = load_catalog(dir);
    inputs.add_directory(dir);
    return catalog;
}

ParameterSet load_year(const RunConfig& config, int year, const Catalog& catalog, InputLedger& inputs,
                       LoadReport* load, ThresholdReport* threshold)
{
    auto raw = load_parameter_set(config.years_dir(), year, catalog, load);
    inputs.add_directory(year_directory(config.years_dir(), year));
    ThresholdReport local;
    auto out = threshold_small_shares(raw, config.share_floor, &local);
    if (threshold) {
        threshold->zeroed_nu += local.zeroed_nu;
        threshold->zeroed_trade += local.zeroed_trade;
        threshold->zeroed_eta += local.zeroed_eta;
    }
    return out;
}

int last_year(const RunConfig& config)
{
    if (config.end_year) {
        return *config.end_year;
    }
    const auto years = available_years(config.years_dir());
    if (years.empty()) {
        throw DataError(fmt::format("no yearly parameter directories under {}", config.years_dir().string()));
    }
    return years.back();
}

/// Loads every year of [first, last]; any gap is a data error listing all
/// missing years.
YearData load_range(const RunConfig& config, int first, int last, std::ostream& log)
{
    YearData data{{}, {}, InputLedger(config.data_dir), {}, {}};
    data.catalog = load_catalog_tracked(config, data.inputs);
    const auto years = available_years(config.years_dir());
    std::vector<int> missing;
    for (int y = first; y <= last; ++y) {
        if (!std::binary_search(years.begin(), years.end(), y)) {
            missing.push_back(y);
        }
    }
    if (!missing.empty()) {
        throw DataError(fmt::format("yearly data missing for {} year(s) in {}-{}: {}", missing.size(), first, last,
                                    fmt::join(missing, ", ")));
    }
    data.yearly.resize(static_cast<std::size_t>(last - first + 1));
    std::vector<LoadReport> loads(data.yearly.size());
    std::vector<ThresholdReport> thresholds(data.yearly.size());
    std::mutex ledger_mutex;
    parallel_for(data.yearly.size(), config.threads, [&](std::size_t k) {
        const int year = first + static_cast<int>(k);
        auto raw = load_parameter_set(config.years_dir(), year, data.catalog, &loads[k]);
        data.yearly[k] = threshold_small_shares(raw, config.share_floor, &thresholds[k]);
        std::lock_guard lock(ledger_mutex);
        data.inputs.add_directory(year_directory(config.years_dir(), year));
    });
    for (std::size_t k = 0; k < loads.size(); ++k) {
        data.load.renormalized_trade += loads[k].renormalized_trade;
        data.load.renormalized_nu += loads[k].renormalized_nu;
        data.load.renormalized_eta += loads[k].renormalized_eta;
        data.load.flagged.insert(data.load.flagged.end(), loads[k].flagged.begin(), loads[k].flagged.end());
        data.threshold.zeroed_nu += thresholds[k].zeroed_nu;
        data.threshold.zeroed_trade += thresholds[k].zeroed_trade;
        data.threshold.zeroed_eta += thresholds[k].zeroed_eta;
    }
    for (const auto& f : data.load.flagged) {
        log << "warning: renormalized " << f << "\n";
    }
    log << fmt::format("loaded {} year(s) {}-{}\n", data.yearly.size(), first, last);
    return data;
}

ojson load_summary(const YearData& data)
{
    return {{"renormalized_trade_rows", data.load.renormalized_trade},
            {"renormalized_nu_rows", data.load.renormalized_nu},
            {"renormalized_eta_rows", data.load.renormalized_eta},
            {"flagged_rows", data.load.flagged.size()},
            {"thresholded_nu", data.threshold.zeroed_nu},
            {"thresholded_trade", data.threshold.zeroed_trade},
            {"thresholded_eta", data.threshold.zeroed_eta}};
}

std::vector<ParameterSet> normalize(const RunConfig& config, std::span<const ParameterSet> yearly)
{
    if (yearly.empty() || config.calibration.base_year < yearly.front().year ||
        config.calibration.base_year > yearly.back().year) {
        throw ValidationError(fmt::format("base_year {} lies outside the loaded years", config.calibration.base_year));
    }
    return normalize_growth(yearly, config.calibration.base_year);
}

ojson rule_counts(const AdaptationRuleSet& rules)
{
    ojson counts;
    for (auto f : kRuleFamilies) {
        std::size_t weights = 0;
        std::size_t rewires = 0;
        for (const auto& c : rules[f].cells()) {
            weights += c.value.has_weight();
            rewires += c.value.has_rewire();
        }
        counts[fmt::format("W_{}", family_name(f))] = weights;
        counts[fmt::format("R_{}", family_name(f))] = rewires;
    }
    counts["S"] = rules.substitution.size();
    return counts;
}

AdaptationRuleSet load_rules(const RunConfig& config, const Catalog& catalog, InputLedger& inputs)
{
    const auto path = config.rules_file();
    if (!fs::exists(path)) {
        throw DataError(fmt::format("rules file {} not found; run calibrate first", path.string()));
    }
    inputs.add_file(path);
    return read_rules(path, catalog);
}

int simulation_year(const RunConfig& config)
{
    return config.simulation_year ? *config.simulation_year : last_year(config);
}

SimulationConfig adaptive(SimulationConfig c)
{
    c.adaptation_enabled = true;
    c.substitution_enabled = true;
    return c;
}

SimulationConfig static_only(SimulationConfig c)
{
    c.adaptation_enabled = false;
    c.substitution_enabled = false;
    return c;
}

void write_trajectory(const Trajectory& run, const Catalog& catalog, const fs::path& path)
{
    const Dims dims = catalog.dims();
    csv::Writer out(path, {"t", "area", "item", "x", "o", "h"});
    for (std::size_t t = 0; t < run.steps.size(); ++t) {
        const auto& st = run.steps[t];
        for (std::size_t s = 0; s < dims.sectors(); ++s) {
            if (st.x[s] == 0.0 && st.o[s] == 0.0 && st.h[s] == 0.0) {
                continue;
            }
            const auto sec = dims.unpack(s);
            out.field(t)
                .field(catalog.areas()[sec.area].code)
                .field(catalog.items()[sec.item].code)
                .field(st.x[s])
                .field(st.o[s])
                .field(st.h[s]);
            out.end_row();
        }
    }
    out.commit();
}

void write_single_losses(const LossReport& report, const Catalog& catalog, const fs::path& path)
{
    const Dims dims = catalog.dims();
    csv::Writer out(path, {"area", "item", "unit", "shortfall", "L"});
    for (std::size_t s = 0; s < dims.sectors(); ++s) {
        const auto sec = dims.unpack(s);
        out.field(catalog.areas()[sec.area].code)
            .field(catalog.items()[sec.item].code)
            .field(catalog.unit(sec.item) + "/person")
            .field(report.shortfall[s])
            .field(report.per_capita[s]);
        out.end_row();
    }
    out.commit();
}

void write_adaptation_log(const Trajectory& run, const Catalog& catalog, const fs::path& path)
{
    csv::Writer out(path, {"kind", "t", "area", "item", "loss", "shortfall"});
    for (const auto& r : run.responses) {
        out.field(r.kind == ResponseKind::adaptation ? "adaptation" : "substitution")
            .field(r.t)
            .field(catalog.areas()[r.area].code)
            .field(catalog.items()[r.item].code)
            .field(r.loss)
            .field(r.shortfall);
        out.end_row();
    }
    out.commit();
}

ShockSpec resolve_shocks(const ScenarioSpec& scenario, const Catalog& catalog)
{
    ShockSpec spec;
    for (const auto& e : scenario.shocks) {
        const auto area = catalog.find_area(e.area);
        const auto item = catalog.find_item(e.item);
        if (!area || !item) {
            throw ValidationError(fmt::format("scenario '{}': unknown {} '{}'", scenario.name, area ? "item" : "area",
                                              area ? e.item : e.area));
        }
        spec.targets.push_back({*area, *item, e.phi});
    }
    spec.validate(catalog.dims());
    return spec;
}

ShockTarget parse_target(std::string_view text, double phi, const Catalog& catalog)
{
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) {
        throw ValidationError(fmt::format("pair member '{}' must look like AREA:ITEM", text));
    }
    const auto area = catalog.find_area(text.substr(0, colon));
    const auto item = catalog.find_item(text.substr(colon + 1));
    if (!area || !item) {
        throw ValidationError(fmt::format("pair member '{}' names an unknown area or item", text));
    }
    return {*area, *item, phi};
}

} // namespace

void cmd_calibrate(const RunConfig& config, std::ostream& log)
{
    const int last = last_year(config);
    auto data = load_range(config, config.start_year, last, log);
    const auto normalized = normalize(config, data.yearly);
    const auto result = fit_rules(normalized, data.catalog, config.calibration);
    log << fmt::format("{} event(s), {} substitution test(s)\n", result.events.size(),
                       result.substitution_tests.size());

    fs::create_directories(config.output_dir);
    write_events(result.events, data.catalog, config.output_dir / "events.csv");
    write_rules(result.rules, data.catalog, config.rules_file());
    write_substitution_tests(result.substitution_tests, data.catalog, config.output_dir / "substitution_tests.csv");

    ojson stability = nullptr;
    try {
        const auto report = stability_analysis(normalized, data.catalog, config.calibration,
                                               config.validation.split_year, config.validation.edge_window);
        write_stability(std::span(&report, 1), config.output_dir / "stability.csv");
        stability = ojson::object();
        for (const auto& f : report.families) {
            stability[f.family] = f.mcc;
        }
    } catch (const ValidationError& e) {
        log << "stability analysis skipped: " << e.what() << "\n";
        stability = {{"skipped", e.what()}};
    }

    std::set<std::size_t> areas;
    std::set<std::size_t> items;
    for (const auto& e : result.events) {
        areas.insert(e.area);
        items.insert(e.item);
    }
    ojson summary = {{"years", {config.start_year, last}},
                     {"events", result.events.size()},
                     {"event_areas", areas.size()},
                     {"event_items", items.size()},
                     {"skipped_zero_previous", result.detection.skipped_zero_previous},
                     {"substitution_tests", result.substitution_tests.size()},
                     {"excluded_zero_index", result.excluded_zero_index},
                     {"rules", rule_counts(result.rules)},
                     {"stability_mcc", stability},
                     {"load", load_summary(data)}};
    write_manifest(config.output_dir / "calibrate_manifest.json", "calibrate", config, data.inputs.to_json(), std::move(summary));
}

void cmd_simulate(const RunConfig& config, const std::optional<std::string>& only, std::ostream& log)
{
    if (config.scenarios.empty()) {
        throw ValidationError("no scenarios configured");
    }
    std::vector<const ScenarioSpec*> selected;
    for (const auto& s : config.scenarios) {
        if (!only || s.name == *only) {
            selected.push_back(&s);
        }
    }
    if (selected.empty()) {
        throw ValidationError(fmt::format("unknown scenario '{}'", *only));
    }

    InputLedger inputs(config.data_dir);
    const auto catalog = load_catalog_tracked(config, inputs);
    const int year = simulation_year(config);
    const auto params = load_year(config, year, catalog, inputs, nullptr, nullptr);
    const auto rules = load_rules(config, catalog, inputs);

    std::vector<ShockSpec> shocks;
    for (const auto* s : selected) {
        shocks.push_back(resolve_shocks(*s, catalog));
    }
    const auto baseline = run_baseline(params, static_only(config.simulation));
    const auto input_json = inputs.to_json();

    std::mutex log_mutex;
    parallel_for(selected.size(), config.threads, [&](std::size_t k) {
        const auto& scenario = *selected[k];
        const auto stat = run_scenario(params, shocks[k], rules, baseline, static_only(config.simulation));
        const auto adap = run_scenario(params, shocks[k], rules, baseline, adaptive(config.simulation));
        const auto l_stat = loss_per_capita(baseline, stat, catalog, shocks[k], false);
        const auto l_adap = loss_per_capita(baseline, adap, catalog, shocks[k], true);

        std::vector<std::size_t> origins;
        for (const auto& t : shocks[k].targets) {
            origins.push_back(t.area);
        }
        std::vector<std::size_t> shocked_items;
        for (const auto& t : shocks[k].targets) {
            if (std::find(shocked_items.begin(), shocked_items.end(), t.item) == shocked_items.end()) {
                shocked_items.push_back(t.item);
            }
        }
        const auto hdi = hdi_group_losses(l_stat, l_adap, catalog, shocked_items, origins);

        const auto areas = all_areas(catalog);
        for (const auto& [suffix, run, loss] :
             {std::tuple{"stat", &stat, &l_stat}, std::tuple{"adap", &adap, &l_adap}}) {
            const auto dir = config.output_dir / fmt::format("{}_{}", scenario.name, suffix);
            fs::create_directories(dir);
            write_trajectory(*run, catalog, dir / "trajectory.csv");
            write_single_losses(*loss, catalog, dir / "losses.csv");
            write_adaptation_log(*run, catalog, dir / "adaptation_log.csv");
            ojson summary = {{"scenario", scenario.name},
                             {"adaptive", loss->adaptive},
                             {"year", year},
                             {"tau", config.simulation.tau},
                             {"loss_shocked_items", aggregate_loss(*loss, areas, shocked_items, catalog)},
                             {"loss_all_items", aggregate_loss(*loss, areas, all_items(catalog), catalog)},
                             {"responses", run->responses.size()},
                             {"emptied_by_renormalization", run->renormalization.total()}};
            write_manifest(dir / "manifest.json", "simulate", config, input_json, std::move(summary));
        }
        write_losses(l_stat, l_adap, catalog, config.output_dir / fmt::format("{}_losses.csv", scenario.name));
        write_hdi(hdi, config.output_dir / fmt::format("{}_hdi.csv", scenario.name));
        std::lock_guard lock(log_mutex);
        log << fmt::format("scenario {}: {} adaptive response(s)\n", scenario.name, adap.responses.size());
    });
}

void cmd_superpose(const RunConfig& config, std::ostream& log)
{
    InputLedger inputs(config.data_dir);
    const auto catalog = load_catalog_tracked(config, inputs);
    const int year = simulation_year(config);
    const auto params = load_year(config, year, catalog, inputs, nullptr, nullptr);
    const auto rules = load_rules(config, catalog, inputs);
    const auto sim = adaptive(config.simulation);

    SuperpositionReport report;
    if (config.sampling.pair) {
        const std::string_view text = *config.sampling.pair;
        const auto comma = text.find(',');
        if (comma == std::string_view::npos) {
            throw ValidationError("--pair must look like A1:I1,A2:I2");
        }
        const auto a = parse_target(text.substr(0, comma), config.sampling.phi, catalog);
        const auto b = parse_target(text.substr(comma + 1), config.sampling.phi, catalog);
        const auto baseline = run_baseline(params, sim);
        report.seed = config.seed;
        report.pairs.push_back(superpose_pair(params, rules, catalog, sim, baseline, a, b));
        summarize_pairs(report);
        double total = 0.0;
        double persons = 0.0;
        for (std::size_t area = 0; area < catalog.dims().areas; ++area) {
            persons += catalog.require_population(area);
        }
        for (double v : baseline.final_state().x) {
            total += v;
        }
        report.availability_per_capita = total * kUnitsPerModelUnit / persons;
        log << "pair 1/1 done\n";
    } else {
        SamplingConfig sampling;
        sampling.n_samples = config.sampling.n_samples;
        sampling.pool_size = config.sampling.pool_size;
        sampling.phi = config.sampling.phi;
        sampling.seed = config.seed;
        sampling.threads = config.threads;
        sampling.progress = [&log](std::size_t done, std::size_t total) {
            log << fmt::format("pair {}/{} done\n", done, total) << std::flush;
        };
        report = sample_combined_shocks(params, rules, catalog, sim, sampling);
    }

    fs::create_directories(config.output_dir);
    write_superposition(report, catalog, config.output_dir / "superposition.csv");
    ojson summary = {{"mode", config.sampling.pair ? "pair" : "sampling"},
                     {"year", year},
                     {"pairs", report.pairs.size()},
                     {"pool", report.pool.size()},
                     {"mean_SI_items", report.mean_shocked_items},
                     {"mean_SI_all", report.mean_all_items},
                     {"p_SI_items", report.p_shocked_items},
                     {"p_SI_all", report.p_all_items},
                     {"availability_per_capita", report.availability_per_capita},
                     {"relative_denominator", "global baseline availability per person at tau"}};
    write_manifest(config.output_dir / "superpose_manifest.json", "superpose", config, inputs.to_json(), std::move(summary));
}

void cmd_validate(const RunConfig& config, std::ostream& log)
{
    const int last = last_year(config);
    auto data = load_range(config, config.start_year, last, log);
    const auto& v = config.validation;
    if (v.train_last_year < config.start_year || v.train_last_year >= v.benchmark_first_year) {
        throw ValidationError("train_last_year must lie in the loaded range and before the benchmark");
    }

    const auto normalized = normalize(config, data.yearly);
    const auto train_count = static_cast<std::size_t>(v.train_last_year - config.start_year + 1);
    const auto train = normalize(config, std::span(data.yearly).first(train_count));
    const auto trained = fit_rules(train, data.catalog, config.calibration);
    log << fmt::format("trained on {}-{}: {} event(s)\n", config.start_year, v.train_last_year,
                       trained.events.size());

    ReconciliationConfig rc;
    rc.benchmark_first_year = v.benchmark_first_year;
    rc.benchmark_last_year = v.benchmark_last_year;
    const auto recon =
        reconciliation_harness(data.yearly, trained.rules, data.catalog, config.calibration, config.simulation, rc);

    const auto sweep = stability_sweep(normalized, data.catalog, config.calibration, v.rel_grid, v.dev_grid,
                                       v.split_year, v.edge_window);

    fs::create_directories(config.output_dir);
    write_reconciliation(recon, data.catalog, config.output_dir / "reconciliation.csv");
    write_stability(sweep, config.output_dir / "stability.csv");

    ojson series = ojson::object();
    for (const auto& s : recon.series) {
        series[s.name] = {{"mean_share_sd", s.mean_share_sd}, {"mean_per_capita_sd", s.mean_per_capita_sd}};
    }
    ojson summary = {{"train_events", trained.events.size()},
                     {"benchmark_events", recon.shocks.size()},
                     {"series", series},
                     {"stability_grid_points", sweep.size()},
                     {"load", load_summary(data)}};
    write_manifest(config.output_dir / "validate_manifest.json", "validate", config, data.inputs.to_json(), std::move(summary));
}

void cmd_report(const RunConfig& config, std::ostream& log)
{
    InputLedger inputs(config.data_dir);
    const auto catalog = load_catalog_tracked(config, inputs);
    const auto params = load_year(config, config.calibration.base_year, catalog, inputs, nullptr, nullptr);
    const auto rules = load_rules(config, catalog, inputs);
    const auto impacts = impact_estimators(params, rules);

    fs::create_directories(config.output_dir);
    write_impacts(impacts, catalog, config.output_dir / "impacts.csv");
    log << fmt::format("{} trade, {} substitution, {} production impact(s)\n", impacts.trade.size(),
                       impacts.substitution.size(), impacts.production.size());
    ojson summary = {{"year", config.calibration.base_year},
                     {"rules", rule_counts(rules)},
                     {"trade_impacts", impacts.trade.size()},
                     {"substitution_impacts", impacts.substitution.size()},
                     {"production_impacts", impacts.production.size()}};
    write_manifest(config.output_dir / "report_manifest.json", "report", config, inputs.to_json(), std::move(summary));
}

} // namespace foodshock::cli
