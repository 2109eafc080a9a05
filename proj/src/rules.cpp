#include "foodshock/rules.hpp"

#include "foodshock/csv.hpp"
#include "foodshock/errors.hpp"

#include <fmt/format.h>

#include <unordered_map>

namespace foodshock {

namespace {

constexpr std::array<std::string_view, kRuleFamilies.size()> kFamilyNames{
    "alpha", "beta", "nu", "eta_exp", "eta_prod", "trade_import", "trade_export"};

constexpr std::string_view kSubstitutionFamily = "S";

struct Emitter {
    std::vector<RuleComponent>& out;
    std::size_t event_index;
    double loss;

    void operator()(RuleFamily family, std::size_t row, std::size_t col, double before, double after) const
    {
        RuleComponent c;
        c.family = family;
        c.row = static_cast<std::uint32_t>(row);
        c.col = static_cast<std::uint32_t>(col);
        c.before = before;
        c.after = after;
        c.loss = loss;
        c.event = event_index;
        if (before > 0.0) {
            c.branch = Branch::weight;
            c.value = (1.0 / loss) * (after / before);
        } else if (after > 0.0) {
            c.branch = Branch::rewire;
            c.value = (1.0 / loss) * after;
        } else {
            return;
        }
        out.push_back(c);
    }
};

/// Visits the union of keys of two sparse rows.
template <typename Fn>
void merge_rows(const SparseRow& before, const SparseRow& after, Fn&& fn)
{
    auto b = before.begin();
    auto a = after.begin();
    while (b != before.end() || a != after.end()) {
        if (a == after.end() || (b != before.end() && b->key < a->key)) {
            fn(b->key, b->value, 0.0);
            ++b;
        } else if (b == before.end() || a->key < b->key) {
            fn(a->key, 0.0, a->value);
            ++a;
        } else {
            fn(b->key, b->value, a->value);
            ++a;
            ++b;
        }
    }
}

struct Accumulator {
    double w_sum = 0.0;
    double r_sum = 0.0;
    std::uint32_t n_weight = 0;
    std::uint32_t n_rewire = 0;
};

} // namespace

std::string_view family_name(RuleFamily family)
{
    return kFamilyNames[static_cast<std::size_t>(family)];
}

std::optional<RuleFamily> parse_family(std::string_view name)
{
    for (std::size_t k = 0; k < kFamilyNames.size(); ++k) {
        if (kFamilyNames[k] == name) {
            return kRuleFamilies[k];
        }
    }
    return std::nullopt;
}

bool AdaptationRuleSet::empty() const
{
    return substitution.empty() && std::all_of(families.begin(), families.end(), [](const RuleMatrix& m) {
               return m.empty();
           });
}

std::vector<RuleComponent> derive_rule_components(std::span<const Event> events, std::span<const ParameterSet> yearly)
{
    std::unordered_map<int, const ParameterSet*> by_year;
    for (const auto& p : yearly) {
        by_year.emplace(p.year, &p);
    }
    auto year = [&](int y) -> const ParameterSet& {
        auto it = by_year.find(y);
        if (it == by_year.end()) {
            throw ValidationError(fmt::format("parameters for year {} are required by an event but missing", y));
        }
        return *it->second;
    };

    std::vector<RuleComponent> out;
    for (std::size_t k = 0; k < events.size(); ++k) {
        const auto& e = events[k];
        if (!(e.loss > 0.0)) {
            throw ValidationError("event loss must be positive");
        }
        const auto& p0 = year(e.year);
        const auto& p1 = year(e.year + 1);
        const auto& d = p0.dims;
        const auto s = d.sector(e.area, e.item);
        const Emitter emit{out, k, e.loss};

        auto production = [&](RuleFamily family, const SectorProcessTable& t0, const SectorProcessTable& t1) {
            merge_rows(t0.row(s), t1.row(s), [&](std::uint32_t process, double before, double after) {
                emit(family, e.item, process, before, after);
            });
        };
        production(RuleFamily::alpha, p0.alpha, p1.alpha);
        production(RuleFamily::beta, p0.beta, p1.beta);
        production(RuleFamily::nu, p0.nu, p1.nu);

        emit(RuleFamily::eta_exp, e.item, 0, p0.eta_exp[s], p1.eta_exp[s]);
        emit(RuleFamily::eta_prod, e.item, 0, p0.eta_prod[s], p1.eta_prod[s]);

        merge_rows(p0.trade.row(e.item, e.area), p1.trade.row(e.item, e.area),
                   [&](std::uint32_t exporter, double before, double after) {
                       emit(RuleFamily::trade_import, e.area, exporter, before, after);
                   });
        for (std::size_t importer = 0; importer < d.areas; ++importer) {
            emit(RuleFamily::trade_export, e.area, importer, p0.trade.get(e.item, importer, e.area),
                 p1.trade.get(e.item, importer, e.area));
        }
    }
    return out;
}

AdaptationRuleSet aggregate_rules(std::span<const RuleComponent> components)
{
    std::array<std::map<std::pair<std::uint32_t, std::uint32_t>, Accumulator>, kRuleFamilies.size()> acc;
    for (const auto& c : components) {
        auto& a = acc[static_cast<std::size_t>(c.family)][{c.row, c.col}];
        if (c.branch == Branch::weight) {
            a.w_sum += c.value;
            ++a.n_weight;
        } else {
            a.r_sum += c.value;
            ++a.n_rewire;
        }
    }
    AdaptationRuleSet rules;
    for (std::size_t f = 0; f < acc.size(); ++f) {
        std::vector<RuleMatrix::Cell> cells;
        cells.reserve(acc[f].size());
        for (const auto& [key, a] : acc[f]) {
            RuleValue v;
            v.n_weight = a.n_weight;
            v.n_rewire = a.n_rewire;
            v.w = a.n_weight ? a.w_sum / a.n_weight : 0.0;
            v.r = a.n_rewire ? a.r_sum / a.n_rewire : 0.0;
            cells.push_back({key.first, key.second, v});
        }
        rules.families[f] = RuleMatrix(std::move(cells));
    }
    return rules;
}

namespace {

struct KeyCodec {
    const Catalog& catalog;

    std::pair<std::string, std::string> encode(RuleFamily f, std::uint32_t row, std::uint32_t col) const
    {
        switch (f) {
        case RuleFamily::alpha:
        case RuleFamily::beta:
        case RuleFamily::nu:
            return {catalog.items()[row].code, catalog.processes()[col].code};
        case RuleFamily::eta_exp:
        case RuleFamily::eta_prod:
            return {catalog.items()[row].code, ""};
        case RuleFamily::trade_import:
        case RuleFamily::trade_export:
            return {catalog.areas()[row].code, catalog.areas()[col].code};
        }
        return {};
    }

    std::pair<std::uint32_t, std::uint32_t> decode(const csv::Reader& reader, RuleFamily f, const std::string& row,
                                                   const std::string& col) const
    {
        auto need = [&](std::optional<std::size_t> k, const std::string& key) {
            if (!k) {
                throw DataError(reader.where(fmt::format("unknown key '{}' for family {}", key, family_name(f))));
            }
            return static_cast<std::uint32_t>(*k);
        };
        switch (f) {
        case RuleFamily::alpha:
        case RuleFamily::beta:
        case RuleFamily::nu:
            return {need(catalog.find_item(row), row), need(catalog.find_process(col), col)};
        case RuleFamily::eta_exp:
        case RuleFamily::eta_prod:
            return {need(catalog.find_item(row), row), 0};
        case RuleFamily::trade_import:
        case RuleFamily::trade_export:
            return {need(catalog.find_area(row), row), need(catalog.find_area(col), col)};
        }
        return {};
    }
};

} // namespace

void write_rules(const AdaptationRuleSet& rules, const Catalog& catalog, const std::filesystem::path& path)
{
    const KeyCodec codec{catalog};
    csv::Writer out(path, {"family", "row_key", "col_key", "W", "R", "n_events", "n_weight", "n_rewire"});
    for (auto f : kRuleFamilies) {
        for (const auto& cell : rules[f].cells()) {
            const auto [row, col] = codec.encode(f, cell.row, cell.col);
            const auto& v = cell.value;
            out.field(family_name(f)).field(row).field(col);
            v.has_weight() ? out.field(v.w) : out.field(std::string_view{});
            v.has_rewire() ? out.field(v.r) : out.field(std::string_view{});
            out.field(static_cast<long long>(v.n_weight + v.n_rewire))
                .field(static_cast<long long>(v.n_weight))
                .field(static_cast<long long>(v.n_rewire))
                .end_row();
        }
    }
    for (const auto& cell : rules.substitution.cells()) {
        out.field(kSubstitutionFamily)
            .field(catalog.items()[cell.row].code)
            .field(catalog.items()[cell.col].code)
            .field(cell.value.s)
            .field(std::string_view{})
            .field(static_cast<long long>(cell.value.n_events))
            .field(static_cast<long long>(cell.value.n_events))
            .field(0LL)
            .end_row();
    }
    out.commit();
}

AdaptationRuleSet read_rules(const std::filesystem::path& path, const Catalog& catalog)
{
    const KeyCodec codec{catalog};
    csv::Reader reader(path);
    const auto family = reader.column("family");
    const auto row_key = reader.column("row_key");
    const auto col_key = reader.column("col_key");
    const auto w = reader.column("W");
    const auto r = reader.column("R");
    const auto n_events = reader.column("n_events");
    const auto n_weight = reader.find_column("n_weight");
    const auto n_rewire = reader.find_column("n_rewire");

    std::array<std::vector<RuleMatrix::Cell>, kRuleFamilies.size()> cells;
    std::vector<SubstitutionMatrix::Cell> subst;
    std::vector<std::string> f;
    while (reader.next(f)) {
        const auto total = static_cast<std::uint32_t>(reader.parse_long(f[n_events], "n_events"));
        if (f[family] == kSubstitutionFamily) {
            const auto i = catalog.find_item(f[row_key]);
            const auto j = catalog.find_item(f[col_key]);
            if (!i || !j) {
                throw DataError(reader.where("unknown item in substitution rule"));
            }
            if (*i == *j || !catalog.same_group(*i, *j)) {
                throw ValidationError(reader.where("substitution rule outside a commodity group"));
            }
            subst.push_back({static_cast<std::uint32_t>(*i), static_cast<std::uint32_t>(*j),
                             {reader.parse_double(f[w], "W"), total}});
            continue;
        }
        const auto fam = parse_family(f[family]);
        if (!fam) {
            throw DataError(reader.where(fmt::format("unknown rule family '{}'", f[family])));
        }
        const auto [row, col] = codec.decode(reader, *fam, f[row_key], f[col_key]);
        RuleValue v;
        if (!f[w].empty()) {
            v.w = reader.parse_double(f[w], "W");
            v.n_weight = n_weight ? static_cast<std::uint32_t>(reader.parse_long(f[*n_weight], "n_weight")) : 1;
        }
        if (!f[r].empty()) {
            v.r = reader.parse_double(f[r], "R");
            v.n_rewire = n_rewire ? static_cast<std::uint32_t>(reader.parse_long(f[*n_rewire], "n_rewire")) : 1;
        }
        if (v.w < 0.0 || v.r < 0.0) {
            throw ValidationError(reader.where("rule components must be non-negative"));
        }
        cells[static_cast<std::size_t>(*fam)].push_back({row, col, v});
    }
    AdaptationRuleSet rules;
    for (std::size_t k = 0; k < cells.size(); ++k) {
        rules.families[k] = RuleMatrix(std::move(cells[k]));
    }
    rules.substitution = SubstitutionMatrix(std::move(subst));
    return rules;
}

void write_events(std::span<const Event> events, const Catalog& catalog, const std::filesystem::path& path)
{
    csv::Writer out(path, {"area", "item", "year", "loss"});
    for (const auto& e : events) {
        out.field(catalog.areas()[e.area].code)
            .field(catalog.items()[e.item].code)
            .field(e.year)
            .field(e.loss)
            .end_row();
    }
    out.commit();
}

std::vector<Event> read_events(const std::filesystem::path& path, const Catalog& catalog)
{
    csv::Reader reader(path);
    const auto area = reader.column("area");
    const auto item = reader.column("item");
    const auto year = reader.column("year");
    const auto loss = reader.column("loss");
    std::vector<Event> out;
    std::vector<std::string> f;
    while (reader.next(f)) {
        const auto a = catalog.find_area(f[area]);
        const auto i = catalog.find_item(f[item]);
        if (!a || !i) {
            throw DataError(reader.where("unknown area or item"));
        }
        out.push_back({*a, *i, static_cast<int>(reader.parse_long(f[year], "year")), reader.parse_double(f[loss], "loss")});
    }
    return out;
}

} // namespace foodshock
