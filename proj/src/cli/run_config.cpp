#include "foodshock/cli/run_config.hpp"
#include "foodshock/errors.hpp"

#include <fmt/format.h>

#include <fstream>
#include <initializer_list>
#include <string_view>

namespace foodshock::cli {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, std::string_view section, std::initializer_list<std::string_view> keys)
{
    if (!obj.is_object()) {
        throw ValidationError(fmt::format("config: '{}' must be an object", section));
    }
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (auto k : keys) {
            known = known || key == k;
        }
        if (!known) {
            throw ValidationError(fmt::format("config: unknown key '{}' in '{}'", key, section));
        }
    }
}

template <typename T>
void read(const json& obj, const char* key, T& target)
{
    if (auto it = obj.find(key); it != obj.end() && !it->is_null()) {
        try {
            target = it->get<T>();
        } catch (const json::exception& e) {
            throw ValidationError(fmt::format("config: bad value for '{}': {}", key, e.what()));
        }
    }
}

template <typename T>
void read(const json& obj, const char* key, std::optional<T>& target)
{
    if (auto it = obj.find(key); it != obj.end() && !it->is_null()) {
        T value{};
        read(obj, key, value);
        target = value;
    }
}

void read_path(const json& obj, const char* key, std::filesystem::path& target)
{
    std::string s;
    if (obj.contains(key)) {
        read(obj, key, s);
        target = s;
    }
}

} // namespace

RunConfig parse_run_config(const json& doc)
{
    RunConfig cfg;
    if (doc.is_null()) {
        return cfg;
    }
    reject_unknown(doc, "root",
                   {"data_dir", "output_dir", "rules", "seed", "threads", "calibration", "simulation", "scenarios",
                    "sampling", "validation"});
    read_path(doc, "data_dir", cfg.data_dir);
    read_path(doc, "output_dir", cfg.output_dir);
    if (doc.contains("rules")) {
        std::filesystem::path p;
        read_path(doc, "rules", p);
        cfg.rules_path = p;
    }
    read(doc, "seed", cfg.seed);
    read(doc, "threads", cfg.threads);

    if (auto it = doc.find("calibration"); it != doc.end()) {
        const auto& c = *it;
        reject_unknown(c, "calibration",
                       {"delta_rel", "delta_abs", "delta_dev", "min_window_years", "first_event_year",
                        "last_event_year", "base_year", "n_permutations", "alpha_sig", "importer_relevance",
                        "share_floor", "start_year", "end_year"});
        auto& k = cfg.calibration;
        read(c, "delta_rel", k.delta_rel);
        read(c, "delta_abs", k.delta_abs);
        read(c, "delta_dev", k.delta_dev);
        read(c, "min_window_years", k.min_window_years);
        read(c, "first_event_year", k.first_event_year);
        read(c, "last_event_year", k.last_event_year);
        read(c, "base_year", k.base_year);
        read(c, "n_permutations", k.n_permutations);
        read(c, "alpha_sig", k.alpha_sig);
        read(c, "importer_relevance", k.importer_relevance);
        read(c, "share_floor", cfg.share_floor);
        read(c, "start_year", cfg.start_year);
        read(c, "end_year", cfg.end_year);
    }
    if (auto it = doc.find("simulation"); it != doc.end()) {
        const auto& s = *it;
        reject_unknown(s, "simulation", {"tau", "trigger_delta_rel", "trigger_delta_abs", "year"});
        read(s, "tau", cfg.simulation.tau);
        read(s, "trigger_delta_rel", cfg.simulation.trigger_delta_rel);
        read(s, "trigger_delta_abs", cfg.simulation.trigger_delta_abs);
        read(s, "year", cfg.simulation_year);
    }
    if (auto it = doc.find("scenarios"); it != doc.end()) {
        if (!it->is_object()) {
            throw ValidationError("config: 'scenarios' must map names to shock lists");
        }
        for (const auto& [name, body] : it->items()) {
            ScenarioSpec spec;
            spec.name = name;
            const json& shocks = body.is_object() ? body.value("shocks", json::array()) : body;
            if (body.is_object()) {
                reject_unknown(body, name, {"shocks"});
            }
            if (!shocks.is_array() || shocks.empty()) {
                throw ValidationError(fmt::format("config: scenario '{}' needs a non-empty shock list", name));
            }
            for (const auto& s : shocks) {
                reject_unknown(s, name, {"area", "item", "phi"});
                ShockEntry e;
                read(s, "area", e.area);
                read(s, "item", e.item);
                read(s, "phi", e.phi);
                if (e.area.empty() || e.item.empty()) {
                    throw ValidationError(fmt::format("config: scenario '{}' has a shock without area or item", name));
                }
                spec.shocks.push_back(std::move(e));
            }
            cfg.scenarios.push_back(std::move(spec));
        }
    }
    if (auto it = doc.find("sampling"); it != doc.end()) {
        reject_unknown(*it, "sampling", {"n_samples", "pool_size", "phi", "pair"});
        read(*it, "n_samples", cfg.sampling.n_samples);
        read(*it, "pool_size", cfg.sampling.pool_size);
        read(*it, "phi", cfg.sampling.phi);
        read(*it, "pair", cfg.sampling.pair);
    }
    if (auto it = doc.find("validation"); it != doc.end()) {
        reject_unknown(*it, "validation",
                       {"train_last_year", "benchmark_first_year", "benchmark_last_year", "split_year", "edge_window",
                        "rel_grid", "dev_grid"});
        auto& v = cfg.validation;
        read(*it, "train_last_year", v.train_last_year);
        read(*it, "benchmark_first_year", v.benchmark_first_year);
        read(*it, "benchmark_last_year", v.benchmark_last_year);
        read(*it, "split_year", v.split_year);
        read(*it, "edge_window", v.edge_window);
        read(*it, "rel_grid", v.rel_grid);
        read(*it, "dev_grid", v.dev_grid);
    }
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw DataError(fmt::format("cannot open config file {}", path.string()));
    }
    try {
        return parse_run_config(json::parse(in));
    } catch (const json::parse_error& e) {
        throw ValidationError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

void RunConfig::finalize()
{
    calibration.rng_seed = seed;
    calibration.threads = threads;
    calibration.validate();
    simulation.validate();
    if (threads == 0) {
        throw ValidationError("threads must be at least 1");
    }
    if (!(share_floor >= 0.0 && share_floor < 1.0)) {
        throw ValidationError(fmt::format("share_floor must lie in [0, 1), got {}", share_floor));
    }
    if (end_year && *end_year < start_year) {
        throw ValidationError(fmt::format("end_year {} precedes start_year {}", *end_year, start_year));
    }
    if (sampling.n_samples == 0 || sampling.pool_size < 2) {
        throw ValidationError("sampling needs n_samples >= 1 and pool_size >= 2");
    }
    if (!(sampling.phi >= 0.0 && sampling.phi <= 1.0)) {
        throw ValidationError("sampling.phi must lie in [0, 1]");
    }
}

nlohmann::ordered_json RunConfig::echo() const
{
    nlohmann::ordered_json j;
    j["data_dir"] = data_dir.string();
    j["output_dir"] = output_dir.string();
    j["rules"] = rules_file().string();
    j["seed"] = seed;
    j["threads"] = threads;
    const auto& k = calibration;
    j["calibration"] = {{"delta_rel", k.delta_rel},
                        {"delta_abs", k.delta_abs},
                        {"delta_dev", k.delta_dev},
                        {"min_window_years", k.min_window_years},
                        {"first_event_year", k.first_event_year},
                        {"last_event_year", k.last_event_year},
                        {"base_year", k.base_year},
                        {"n_permutations", k.n_permutations},
                        {"alpha_sig", k.alpha_sig},
                        {"importer_relevance", k.importer_relevance},
                        {"share_floor", share_floor},
                        {"start_year", start_year},
                        {"end_year", end_year ? nlohmann::ordered_json(*end_year) : nullptr}};
    j["simulation"] = {{"tau", simulation.tau},
                       {"trigger_delta_rel", simulation.trigger_delta_rel},
                       {"trigger_delta_abs", simulation.trigger_delta_abs},
                       {"year", simulation_year ? nlohmann::ordered_json(*simulation_year) : nullptr}};
    nlohmann::ordered_json scen = nlohmann::ordered_json::object();
    for (const auto& s : scenarios) {
        auto shocks = nlohmann::ordered_json::array();
        for (const auto& e : s.shocks) {
            shocks.push_back({{"area", e.area}, {"item", e.item}, {"phi", e.phi}});
        }
        scen[s.name] = {{"shocks", shocks}};
    }
    j["scenarios"] = scen;
    j["sampling"] = {{"n_samples", sampling.n_samples},
                     {"pool_size", sampling.pool_size},
                     {"phi", sampling.phi},
                     {"pair", sampling.pair ? nlohmann::ordered_json(*sampling.pair) : nullptr}};
    const auto& v = validation;
    j["validation"] = {{"train_last_year", v.train_last_year},
                       {"benchmark_first_year", v.benchmark_first_year},
                       {"benchmark_last_year", v.benchmark_last_year},
                       {"split_year", v.split_year},
                       {"edge_window", v.edge_window},
                       {"rel_grid", v.rel_grid},
                       {"dev_grid", v.dev_grid}};
    return j;
}

} // namespace foodshock::cli
