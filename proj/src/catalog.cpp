#include "foodshock/catalog.hpp"

#include "foodshock/csv.hpp"
#include "foodshock/errors.hpp"

#include <fmt/format.h>

#include <algorithm>

namespace foodshock {

namespace {

constexpr std::string_view kUngroupedMarker = "-";

void index_entries(const std::vector<Entry>& entries,
                   std::unordered_map<std::string, std::size_t>& index,
                   std::string_view what)
{
    for (std::size_t k = 0; k < entries.size(); ++k) {
        if (entries[k].code.empty()) {
            throw ValidationError(fmt::format("{} #{} has an empty code", what, k));
        }
        if (!index.emplace(entries[k].code, k).second) {
            throw ValidationError(fmt::format("duplicate {} code '{}'", what, entries[k].code));
        }
    }
    // Names resolve too, unless they shadow a code.
    for (std::size_t k = 0; k < entries.size(); ++k) {
        if (!entries[k].name.empty()) {
            index.emplace(entries[k].name, k);
        }
    }
}

std::optional<std::size_t> lookup(const std::unordered_map<std::string, std::size_t>& index, std::string_view key)
{
    auto it = index.find(std::string(key));
    if (it == index.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::vector<Entry> read_entries(const std::filesystem::path& path)
{
    csv::Reader reader(path);
    const auto code = reader.column("code");
    const auto name = reader.find_column("name");
    std::vector<Entry> out;
    std::vector<std::string> fields;
    while (reader.next(fields)) {
        out.push_back({fields[code], name ? fields[*name] : fields[code]});
    }
    return out;
}

} // namespace

Catalog::Catalog(std::vector<Entry> areas,
                 std::vector<Entry> items,
                 std::vector<std::string> item_groups,
                 std::vector<std::string> item_units,
                 std::vector<Entry> processes,
                 std::vector<std::optional<double>> populations,
                 std::vector<HdiRecord> hdi)
    : areas_(std::move(areas)),
      items_(std::move(items)),
      item_groups_(std::move(item_groups)),
      item_units_(std::move(item_units)),
      processes_(std::move(processes)),
      populations_(std::move(populations)),
      hdi_(std::move(hdi))
{
    index_entries(areas_, area_index_, "area");
    index_entries(items_, item_index_, "item");
    index_entries(processes_, process_index_, "process");

    if (item_groups_.size() != items_.size() || item_units_.size() != items_.size()) {
        throw ValidationError("item group/unit tables do not match the item list");
    }
    if (populations_.size() != areas_.size() || hdi_.size() != areas_.size()) {
        throw ValidationError("population/HDI tables do not match the area list");
    }
    for (std::size_t a = 0; a < areas_.size(); ++a) {
        if (populations_[a] && !(*populations_[a] > 0.0)) {
            throw ValidationError(fmt::format("population of area '{}' must be positive, got {}",
                                              areas_[a].code, *populations_[a]));
        }
    }
}

std::optional<std::size_t> Catalog::find_area(std::string_view key) const { return lookup(area_index_, key); }
std::optional<std::size_t> Catalog::find_item(std::string_view key) const { return lookup(item_index_, key); }
std::optional<std::size_t> Catalog::find_process(std::string_view key) const { return lookup(process_index_, key); }

std::size_t Catalog::area(std::string_view key) const
{
    if (auto a = find_area(key)) {
        return *a;
    }
    throw DataError(fmt::format("unknown area '{}'", key));
}

std::size_t Catalog::item(std::string_view key) const
{
    if (auto i = find_item(key)) {
        return *i;
    }
    throw DataError(fmt::format("unknown item '{}'", key));
}

std::size_t Catalog::process(std::string_view key) const
{
    if (auto p = find_process(key)) {
        return *p;
    }
    throw DataError(fmt::format("unknown process '{}'", key));
}

bool Catalog::same_group(std::size_t i, std::size_t j) const
{
    return !item_groups_[i].empty() && item_groups_[i] == item_groups_[j];
}

std::vector<std::string> Catalog::group_names() const
{
    std::vector<std::string> names;
    for (const auto& g : item_groups_) {
        if (!g.empty() && std::find(names.begin(), names.end(), g) == names.end()) {
            names.push_back(g);
        }
    }
    return names;
}

std::vector<std::size_t> Catalog::group_members(std::string_view group) const
{
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < item_groups_.size(); ++i) {
        if (!group.empty() && item_groups_[i] == group) {
            members.push_back(i);
        }
    }
    return members;
}

double Catalog::require_population(std::size_t area) const
{
    if (!populations_[area]) {
        throw DataError(fmt::format("no population recorded for area '{}'", areas_[area].code));
    }
    return *populations_[area];
}

Catalog load_catalog(const std::filesystem::path& dir)
{
    auto areas = read_entries(dir / "areas.csv");
    auto processes = read_entries(dir / "processes.csv");

    std::vector<Entry> items;
    std::vector<std::string> groups;
    std::vector<std::string> units;
    {
        csv::Reader reader(dir / "items.csv");
        const auto code = reader.column("code");
        const auto name = reader.find_column("name");
        const auto group = reader.column("group");
        const auto unit = reader.find_column("unit");
        std::vector<std::string> fields;
        while (reader.next(fields)) {
            const auto& label = name ? fields[*name] : fields[code];
            if (fields[group].empty()) {
                throw ValidationError(reader.where(fmt::format("item '{}' has no commodity group", label)));
            }
            items.push_back({fields[code], label});
            groups.push_back(fields[group] == kUngroupedMarker ? std::string(kUngrouped) : fields[group]);
            units.push_back(unit && !fields[*unit].empty() ? fields[*unit] : std::string("tonnes"));
        }
    }

    // Populations and HDI are keyed by area code or name.
    std::unordered_map<std::string, std::size_t> area_keys;
    for (std::size_t a = 0; a < areas.size(); ++a) {
        area_keys.emplace(areas[a].code, a);
    }
    for (std::size_t a = 0; a < areas.size(); ++a) {
        area_keys.emplace(areas[a].name, a);
    }
    auto resolve_area = [&](const csv::Reader& reader, const std::string& key) {
        auto it = area_keys.find(key);
        if (it == area_keys.end()) {
            throw DataError(reader.where(fmt::format("unknown area '{}'", key)));
        }
        return it->second;
    };

    std::vector<std::optional<double>> populations(areas.size());
    {
        csv::Reader reader(dir / "population.csv");
        const auto area = reader.column("area");
        const auto persons = reader.column("persons");
        std::vector<std::string> fields;
        while (reader.next(fields)) {
            const auto a = resolve_area(reader, fields[area]);
            if (populations[a]) {
                throw ValidationError(reader.where(fmt::format("duplicate population for '{}'", fields[area])));
            }
            populations[a] = reader.parse_double(fields[persons], "persons");
        }
    }

    std::vector<HdiRecord> hdi(areas.size(), HdiRecord{std::string(kNotCategorized), std::nullopt});
    {
        csv::Reader reader(dir / "hdi.csv");
        const auto area = reader.column("area");
        const auto category = reader.column("category");
        const auto value = reader.column("value");
        std::vector<std::string> fields;
        while (reader.next(fields)) {
            const auto a = resolve_area(reader, fields[area]);
            HdiRecord record{fields[category].empty() ? std::string(kNotCategorized) : fields[category], std::nullopt};
            const auto& v = fields[value];
            if (!v.empty() && v != "--" && v != "NA") {
                record.value = reader.parse_double(v, "value");
            }
            hdi[a] = std::move(record);
        }
    }

    return Catalog(std::move(areas), std::move(items), std::move(groups), std::move(units), std::move(processes),
                   std::move(populations), std::move(hdi));
}

void write_catalog(const Catalog& catalog, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    {
        csv::Writer out(dir / "areas.csv", {"code", "name"});
        for (const auto& a : catalog.areas()) {
            out.field(a.code).field(a.name).end_row();
        }
        out.commit();
    }
    {
        csv::Writer out(dir / "items.csv", {"code", "name", "group", "unit"});
        for (std::size_t i = 0; i < catalog.items().size(); ++i) {
            const auto& g = catalog.group(i);
            out.field(catalog.items()[i].code)
                .field(catalog.items()[i].name)
                .field(g.empty() ? kUngroupedMarker : std::string_view(g))
                .field(catalog.unit(i))
                .end_row();
        }
        out.commit();
    }
    {
        csv::Writer out(dir / "processes.csv", {"code", "name"});
        for (const auto& p : catalog.processes()) {
            out.field(p.code).field(p.name).end_row();
        }
        out.commit();
    }
    {
        csv::Writer out(dir / "population.csv", {"area", "persons"});
        for (std::size_t a = 0; a < catalog.areas().size(); ++a) {
            if (auto z = catalog.population(a)) {
                out.field(catalog.areas()[a].code).field(*z).end_row();
            }
        }
        out.commit();
    }
    {
        csv::Writer out(dir / "hdi.csv", {"area", "category", "value"});
        for (std::size_t a = 0; a < catalog.areas().size(); ++a) {
            const auto& h = catalog.hdi(a);
            out.field(catalog.areas()[a].code).field(h.category);
            if (h.value) {
                out.field(*h.value);
            } else {
                out.field(std::string_view{});
            }
            out.end_row();
        }
        out.commit();
    }
}

} // namespace foodshock
