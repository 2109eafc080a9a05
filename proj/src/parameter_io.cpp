#include "foodshock/parameter_io.hpp"

#include "foodshock/csv.hpp"
#include "foodshock/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>

namespace foodshock {

namespace fs = std::filesystem;

namespace {

double non_negative(const csv::Reader& reader, const std::string& field, std::string_view column)
{
    const double v = reader.parse_double(field, column);
    if (v < 0.0) {
        throw DataError(reader.where(fmt::format("column '{}': negative value {}", column, v)));
    }
    return v;
}

template <typename Resolve>
std::size_t resolve(const csv::Reader& reader, const std::string& key, std::string_view kind, Resolve&& find)
{
    if (auto k = find(key)) {
        return *k;
    }
    throw DataError(reader.where(fmt::format("unknown {} '{}'", kind, key)));
}

void read_process_table(const fs::path& path, const Catalog& catalog, SectorProcessTable& table)
{
    csv::Reader reader(path);
    const auto area = reader.column("area");
    const auto item = reader.column("item");
    const auto process = reader.column("process");
    const auto value = reader.column("value");
    std::vector<std::string> f;
    while (reader.next(f)) {
        const auto a = resolve(reader, f[area], "area", [&](auto& k) { return catalog.find_area(k); });
        const auto i = resolve(reader, f[item], "item", [&](auto& k) { return catalog.find_item(k); });
        const auto p = resolve(reader, f[process], "process", [&](auto& k) { return catalog.find_process(k); });
        const double v = non_negative(reader, f[value], "value");
        if (table.get(a, i, p) != 0.0) {
            throw DataError(reader.where("duplicate entry"));
        }
        table.set(a, i, p, v);
    }
}

void read_trade_rows(csv::Reader& reader, const Catalog& catalog, std::optional<std::size_t> fixed_item,
                     SparseItemMatrix& trade)
{
    const auto item_col = fixed_item ? std::optional<std::size_t>{} : std::optional<std::size_t>{reader.column("item")};
    const auto importer = reader.column("importer");
    const auto exporter = reader.column("exporter");
    const auto share = reader.column("share");
    std::vector<std::string> f;
    while (reader.next(f)) {
        const auto i = fixed_item ? *fixed_item
                                  : resolve(reader, f[*item_col], "item", [&](auto& k) { return catalog.find_item(k); });
        const auto a = resolve(reader, f[importer], "area", [&](auto& k) { return catalog.find_area(k); });
        const auto b = resolve(reader, f[exporter], "area", [&](auto& k) { return catalog.find_area(k); });
        const double v = non_negative(reader, f[share], "share");
        if (trade.get(i, a, b) != 0.0) {
            throw DataError(reader.where("duplicate trade entry"));
        }
        trade.set(i, a, b, v);
    }
}

void read_trade(const fs::path& dir, const Catalog& catalog, SparseItemMatrix& trade)
{
    if (fs::exists(dir / "trade.csv")) {
        csv::Reader reader(dir / "trade.csv");
        read_trade_rows(reader, catalog, std::nullopt, trade);
        return;
    }
    bool any = false;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const auto name = entry.path().filename().string();
        if (name.starts_with("trade_") && name.ends_with(".csv")) {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    for (const auto& path : files) {
        const auto name = path.stem().string().substr(6);
        const auto i = catalog.find_item(name);
        if (!i) {
            throw DataError(fmt::format("{}: unknown item '{}' in file name", path.string(), name));
        }
        csv::Reader reader(path);
        read_trade_rows(reader, catalog, *i, trade);
        any = true;
    }
    if (!any) {
        throw DataError(fmt::format("{}: neither trade.csv nor trade_<item>.csv present", dir.string()));
    }
}

std::string sector_label(const Catalog& catalog, std::size_t s)
{
    const auto sec = catalog.dims().unpack(s);
    return fmt::format("{}/{}", catalog.areas()[sec.area].code, catalog.items()[sec.item].code);
}

void repair_stochasticity(ParameterSet& params, const Catalog& catalog, LoadReport& report)
{
    const auto& d = params.dims;
    const auto sums = params.trade.exporter_sums();
    for (std::size_t s = 0; s < sums.size(); ++s) {
        if (sums[s] > 0.0 && std::abs(sums[s] - 1.0) > kStochasticTolerance) {
            const auto sec = d.unpack(s);
            params.trade.scale_exporter(sec.item, sec.area, 1.0 / sums[s]);
            ++report.renormalized_trade;
            if (std::abs(sums[s] - 1.0) > LoadReport::kFlagTolerance) {
                report.flagged.push_back(fmt::format("trade exports of {} summed to {}", sector_label(catalog, s), sums[s]));
            }
        }
    }
    for (std::size_t s = 0; s < d.sectors(); ++s) {
        const double nu_sum = row_sum(params.nu.row(s));
        if (nu_sum > 1.0 + kStochasticTolerance) {
            row_scale(params.nu.row(s), 1.0 / nu_sum);
            ++report.renormalized_nu;
            if (nu_sum > 1.0 + LoadReport::kFlagTolerance) {
                report.flagged.push_back(fmt::format("input shares of {} summed to {}", sector_label(catalog, s), nu_sum));
            }
        }
        const double eta_sum = params.eta_exp[s] + params.eta_prod[s];
        if (eta_sum > 1.0 + kStochasticTolerance) {
            params.eta_exp[s] /= eta_sum;
            params.eta_prod[s] /= eta_sum;
            ++report.renormalized_eta;
            if (eta_sum > 1.0 + LoadReport::kFlagTolerance) {
                report.flagged.push_back(
                    fmt::format("allocation shares of {} summed to {}", sector_label(catalog, s), eta_sum));
            }
        }
    }
}

} // namespace

fs::path year_directory(const fs::path& root, int year)
{
    return root / std::to_string(year);
}

std::vector<int> available_years(const fs::path& root)
{
    std::vector<int> years;
    if (!fs::is_directory(root)) {
        return years;
    }
    for (const auto& entry : fs::directory_iterator(root)) {
        if (!entry.is_directory()) {
            continue;
        }
        const auto name = entry.path().filename().string();
        int year = 0;
        auto [ptr, ec] = std::from_chars(name.data(), name.data() + name.size(), year);
        if (ec == std::errc() && ptr == name.data() + name.size()) {
            years.push_back(year);
        }
    }
    std::sort(years.begin(), years.end());
    return years;
}

ParameterSet load_parameter_set(const fs::path& root, int year, const Catalog& catalog, LoadReport* report)
{
    const auto dir = year_directory(root, year);
    if (!fs::is_directory(dir)) {
        throw DataError(fmt::format("no parameter directory for year {} at {}", year, dir.string()));
    }
    ParameterSet params(year, catalog.dims());
    read_process_table(dir / "alpha.csv", catalog, params.alpha);
    read_process_table(dir / "beta.csv", catalog, params.beta);
    read_process_table(dir / "nu.csv", catalog, params.nu);
    read_trade(dir, catalog, params.trade);

    {
        csv::Reader reader(dir / "eta.csv");
        const auto area = reader.column("area");
        const auto item = reader.column("item");
        const auto exp = reader.column("eta_exp");
        const auto prod = reader.column("eta_prod");
        std::vector<std::string> f;
        while (reader.next(f)) {
            const auto a = resolve(reader, f[area], "area", [&](auto& k) { return catalog.find_area(k); });
            const auto i = resolve(reader, f[item], "item", [&](auto& k) { return catalog.find_item(k); });
            const auto s = params.dims.sector(a, i);
            params.eta_exp[s] = non_negative(reader, f[exp], "eta_exp");
            params.eta_prod[s] = non_negative(reader, f[prod], "eta_prod");
        }
    }
    {
        csv::Reader reader(dir / "x0.csv");
        const auto area = reader.column("area");
        const auto item = reader.column("item");
        const auto value = reader.column("value");
        std::vector<std::string> f;
        while (reader.next(f)) {
            const auto a = resolve(reader, f[area], "area", [&](auto& k) { return catalog.find_area(k); });
            const auto i = resolve(reader, f[item], "item", [&](auto& k) { return catalog.find_item(k); });
            params.x0[params.dims.sector(a, i)] = non_negative(reader, f[value], "value");
        }
    }

    for (std::size_t s = 0; s < params.dims.sectors(); ++s) {
        for (const auto& e : params.alpha.row(s)) {
            if (row_get(params.beta.row(s), e.key) > 0.0) {
                throw ValidationError(fmt::format("{}: alpha and beta both positive for {} process {}", dir.string(),
                                                  sector_label(catalog, s), catalog.processes()[e.key].code));
            }
        }
    }

    LoadReport local;
    repair_stochasticity(params, catalog, local);
    validate(params);
    if (report) {
        *report = std::move(local);
    }
    return params;
}

void write_parameter_set(const ParameterSet& params, const Catalog& catalog, const fs::path& root)
{
    const auto dir = year_directory(root, params.year);
    fs::create_directories(dir);
    const auto& d = params.dims;
    const auto& areas = catalog.areas();
    const auto& items = catalog.items();

    auto write_table = [&](const SectorProcessTable& table, const char* file) {
        csv::Writer out(dir / file, {"area", "item", "process", "value"});
        for (std::size_t s = 0; s < d.sectors(); ++s) {
            const auto sec = d.unpack(s);
            for (const auto& e : table.row(s)) {
                out.field(areas[sec.area].code)
                    .field(items[sec.item].code)
                    .field(catalog.processes()[e.key].code)
                    .field(e.value)
                    .end_row();
            }
        }
        out.commit();
    };
    write_table(params.alpha, "alpha.csv");
    write_table(params.beta, "beta.csv");
    write_table(params.nu, "nu.csv");

    {
        csv::Writer out(dir / "trade.csv", {"item", "importer", "exporter", "share"});
        for (std::size_t i = 0; i < d.items; ++i) {
            for (std::size_t a = 0; a < d.areas; ++a) {
                for (const auto& e : params.trade.row(i, a)) {
                    out.field(items[i].code).field(areas[a].code).field(areas[e.key].code).field(e.value).end_row();
                }
            }
        }
        out.commit();
    }
    {
        csv::Writer out(dir / "eta.csv", {"area", "item", "eta_exp", "eta_prod"});
        for (std::size_t s = 0; s < d.sectors(); ++s) {
            if (params.eta_exp[s] != 0.0 || params.eta_prod[s] != 0.0) {
                const auto sec = d.unpack(s);
                out.field(areas[sec.area].code)
                    .field(items[sec.item].code)
                    .field(params.eta_exp[s])
                    .field(params.eta_prod[s])
                    .end_row();
            }
        }
        out.commit();
    }
    {
        csv::Writer out(dir / "x0.csv", {"area", "item", "value"});
        for (std::size_t s = 0; s < d.sectors(); ++s) {
            if (params.x0[s] != 0.0) {
                const auto sec = d.unpack(s);
                out.field(areas[sec.area].code).field(items[sec.item].code).field(params.x0[s]).end_row();
            }
        }
        out.commit();
    }
}

} // namespace foodshock
