#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace foodshock {

/// A (country, product) pair, the node unit of the network.
struct Sector {
    std::size_t area = 0;
    std::size_t item = 0;

    friend bool operator==(const Sector&, const Sector&) = default;
    friend auto operator<=>(const Sector&, const Sector&) = default;
};

/// Index arithmetic shared by every dense per-sector vector.
struct Dims {
    std::size_t areas = 0;
    std::size_t items = 0;
    std::size_t processes = 0;

    std::size_t sectors() const { return areas * items; }
    std::size_t sector(std::size_t area, std::size_t item) const { return area * items + item; }
    std::size_t sector(Sector s) const { return sector(s.area, s.item); }
    Sector unpack(std::size_t sector_index) const { return {sector_index / items, sector_index % items}; }

    friend bool operator==(const Dims&, const Dims&) = default;
};

struct Entry {
    std::string code;
    std::string name;
};

struct HdiRecord {
    std::string category;
    std::optional<double> value;
};

inline constexpr std::string_view kUngrouped = "";
inline constexpr std::string_view kNotCategorized = "not categorized";

/// Registry of areas, items, processes and per-area metadata. Indices are
/// the row order of the source tables and never change after construction.
class Catalog {
public:
    Catalog() = default;

    /// Builds and validates a catalog. Throws ValidationError on duplicate
    /// codes, a missing group, or a non-positive population.
    Catalog(std::vector<Entry> areas,
            std::vector<Entry> items,
            std::vector<std::string> item_groups,
            std::vector<std::string> item_units,
            std::vector<Entry> processes,
            std::vector<std::optional<double>> populations,
            std::vector<HdiRecord> hdi);

    Dims dims() const { return {areas_.size(), items_.size(), processes_.size()}; }

    const std::vector<Entry>& areas() const { return areas_; }
    const std::vector<Entry>& items() const { return items_; }
    const std::vector<Entry>& processes() const { return processes_; }

    /// Resolves a code or a display name.
    std::optional<std::size_t> find_area(std::string_view key) const;
    std::optional<std::size_t> find_item(std::string_view key) const;
    std::optional<std::size_t> find_process(std::string_view key) const;

    /// Throwing variants used by loaders and the CLI.
    std::size_t area(std::string_view key) const;
    std::size_t item(std::string_view key) const;
    std::size_t process(std::string_view key) const;

    const std::string& group(std::size_t item) const { return item_groups_[item]; }
    bool same_group(std::size_t i, std::size_t j) const;
    /// Distinct group names in first-appearance order (ungrouped excluded).
    std::vector<std::string> group_names() const;
    std::vector<std::size_t> group_members(std::string_view group) const;

    const std::string& unit(std::size_t item) const { return item_units_[item]; }

    std::optional<double> population(std::size_t area) const { return populations_[area]; }
    /// Throws DataError naming the area when no population is recorded.
    double require_population(std::size_t area) const;

    const HdiRecord& hdi(std::size_t area) const { return hdi_[area]; }

private:
    std::vector<Entry> areas_;
    std::vector<Entry> items_;
    std::vector<std::string> item_groups_;
    std::vector<std::string> item_units_;
    std::vector<Entry> processes_;
    std::vector<std::optional<double>> populations_;
    std::vector<HdiRecord> hdi_;

    std::unordered_map<std::string, std::size_t> area_index_;
    std::unordered_map<std::string, std::size_t> item_index_;
    std::unordered_map<std::string, std::size_t> process_index_;
};

/// Reads areas.csv, items.csv, processes.csv, population.csv and hdi.csv
/// from `dir`.
Catalog load_catalog(const std::filesystem::path& dir);

void write_catalog(const Catalog& catalog, const std::filesystem::path& dir);

} // namespace foodshock
