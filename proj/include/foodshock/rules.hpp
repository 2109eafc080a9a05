#pragma once

#include "foodshock/calibration.hpp"
#include "foodshock/catalog.hpp"
#include "foodshock/parameter_set.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace foodshock {

/// Parameter family a rule adjusts. Row/column keys per family:
///   alpha, beta, nu        item x process
///   eta_exp, eta_prod      item x 0
///   trade_import           importer (the adapting area) x exporter
///   trade_export           exporter (the adapting area) x importer
enum class RuleFamily : std::uint8_t { alpha, beta, nu, eta_exp, eta_prod, trade_import, trade_export };

inline constexpr std::array kRuleFamilies{RuleFamily::alpha,        RuleFamily::beta,        RuleFamily::nu,
                                          RuleFamily::eta_exp,      RuleFamily::eta_prod,    RuleFamily::trade_import,
                                          RuleFamily::trade_export};

std::string_view family_name(RuleFamily family);
std::optional<RuleFamily> parse_family(std::string_view name);

/// Mean weight-adjustment and rewiring components for one key. A branch
/// with zero events is absent and leaves the parameter untouched.
struct RuleValue {
    double w = 0.0;
    double r = 0.0;
    std::uint32_t n_weight = 0;
    std::uint32_t n_rewire = 0;

    bool has_weight() const { return n_weight > 0; }
    bool has_rewire() const { return n_rewire > 0; }

    /// l·W·v + l·R, with an absent weight branch keeping v as is and an
    /// absent rewiring branch adding nothing.
    double apply(double value, double loss) const
    {
        const double weighted = has_weight() ? loss * w * value : value;
        return has_rewire() ? weighted + loss * r : weighted;
    }

    friend bool operator==(const RuleValue&, const RuleValue&) = default;
};

/// Sorted (row, col) -> value map; rows are contiguous.
template <typename Value>
class KeyedMatrix {
public:
    struct Cell {
        std::uint32_t row = 0;
        std::uint32_t col = 0;
        Value value{};

        friend bool operator==(const Cell&, const Cell&) = default;
    };

    KeyedMatrix() = default;
    /// Takes unsorted cells; duplicate keys are a logic error.
    explicit KeyedMatrix(std::vector<Cell> cells) : cells_(std::move(cells))
    {
        std::sort(cells_.begin(), cells_.end(), [](const Cell& a, const Cell& b) { return key(a) < key(b); });
    }

    const Value* find(std::size_t row, std::size_t col) const
    {
        const auto k = (static_cast<std::uint64_t>(row) << 32) | static_cast<std::uint64_t>(col);
        auto it = std::lower_bound(cells_.begin(), cells_.end(), k,
                                   [](const Cell& c, std::uint64_t kk) { return key(c) < kk; });
        return (it != cells_.end() && key(*it) == k) ? &it->value : nullptr;
    }

    std::span<const Cell> row(std::size_t r) const
    {
        const auto lo = static_cast<std::uint64_t>(r) << 32;
        const auto hi = static_cast<std::uint64_t>(r + 1) << 32;
        auto first = std::lower_bound(cells_.begin(), cells_.end(), lo,
                                      [](const Cell& c, std::uint64_t kk) { return key(c) < kk; });
        auto last = std::lower_bound(first, cells_.end(), hi,
                                     [](const Cell& c, std::uint64_t kk) { return key(c) < kk; });
        return {first, last};
    }

    std::span<const Cell> cells() const { return cells_; }
    std::size_t size() const { return cells_.size(); }
    bool empty() const { return cells_.empty(); }

    friend bool operator==(const KeyedMatrix&, const KeyedMatrix&) = default;

private:
    static std::uint64_t key(const Cell& c) { return (static_cast<std::uint64_t>(c.row) << 32) | c.col; }

    std::vector<Cell> cells_;
};

using RuleMatrix = KeyedMatrix<RuleValue>;

struct SubstitutionValue {
    double s = 0.0;
    std::uint32_t n_events = 0;

    friend bool operator==(const SubstitutionValue&, const SubstitutionValue&) = default;
};

/// Item x item substitutability indices, broadcast to every area.
using SubstitutionMatrix = KeyedMatrix<SubstitutionValue>;

struct AdaptationRuleSet {
    std::array<RuleMatrix, kRuleFamilies.size()> families;
    SubstitutionMatrix substitution;

    RuleMatrix& operator[](RuleFamily f) { return families[static_cast<std::size_t>(f)]; }
    const RuleMatrix& operator[](RuleFamily f) const { return families[static_cast<std::size_t>(f)]; }

    bool empty() const;

    friend bool operator==(const AdaptationRuleSet&, const AdaptationRuleSet&) = default;
};

enum class Branch : std::uint8_t { weight, rewire };

/// One observed parameter change following an event.
struct RuleComponent {
    RuleFamily family{};
    std::uint32_t row = 0;
    std::uint32_t col = 0;
    Branch branch{};
    double value = 0.0;  ///< w for the weight branch, r for the rewiring branch
    double before = 0.0; ///< v(T_E)
    double after = 0.0;  ///< v(T_E + 1)
    double loss = 0.0;   ///< l_E
    std::size_t event = 0;
};

/// Computes w/r components for every parameter entry touched by each event.
/// `yearly` must contain T_E and T_E + 1 for every event.
std::vector<RuleComponent> derive_rule_components(std::span<const Event> events,
                                                  std::span<const ParameterSet> yearly);

/// Averages components per key, each branch over its own events only.
AdaptationRuleSet aggregate_rules(std::span<const RuleComponent> components);

/// rules.csv: family,row_key,col_key,W,R,n_events,n_weight,n_rewire with
/// catalog codes as keys. Substitution rows use family "S" and the index in W.
void write_rules(const AdaptationRuleSet& rules, const Catalog& catalog, const std::filesystem::path& path);
AdaptationRuleSet read_rules(const std::filesystem::path& path, const Catalog& catalog);

void write_events(std::span<const Event> events, const Catalog& catalog, const std::filesystem::path& path);
std::vector<Event> read_events(const std::filesystem::path& path, const Catalog& catalog);

} // namespace foodshock
