#include "foodshock/analysis.hpp"
#include "foodshock/csv.hpp"
#include "foodshock/errors.hpp"

namespace foodshock {

void write_losses(const LossReport& static_report, const LossReport& adaptive_report, const Catalog& catalog,
                  const std::filesystem::path& path)
{
    const Dims dims = catalog.dims();
    if (!(static_report.dims == dims) || !(adaptive_report.dims == dims)) {
        throw ValidationError("write_losses: loss reports do not match the catalog");
    }
    csv::Writer out(path, {"area", "item", "unit", "L_static", "L_adaptive"});
    for (std::size_t a = 0; a < dims.areas; ++a) {
        for (std::size_t i = 0; i < dims.items; ++i) {
            out.field(catalog.areas()[a].code)
                .field(catalog.items()[i].code)
                .field(catalog.unit(i) + "/person")
                .field(static_report.at(a, i))
                .field(adaptive_report.at(a, i));
            out.end_row();
        }
    }
    out.commit();
}

void write_superposition(const SuperpositionReport& report, const Catalog& catalog,
                         const std::filesystem::path& path)
{
    csv::Writer out(path, {"sample", "area_1", "item_1", "area_2", "item_2", "phi_1", "phi_2", "L_combined_items",
                           "L_1_items", "L_2_items", "SI_items", "L_combined_all", "L_1_all", "L_2_all", "SI_all",
                           "SI_all_relative", "kind_all"});
    std::size_t k = 0;
    for (const auto& p : report.pairs) {
        out.field(k++)
            .field(catalog.areas()[p.first.area].code)
            .field(catalog.items()[p.first.item].code)
            .field(catalog.areas()[p.second.area].code)
            .field(catalog.items()[p.second.item].code)
            .field(p.first.phi)
            .field(p.second.phi)
            .field(p.shocked_items.combined)
            .field(p.shocked_items.first)
            .field(p.shocked_items.second)
            .field(p.shocked_items.si)
            .field(p.all_items.combined)
            .field(p.all_items.first)
            .field(p.all_items.second)
            .field(p.all_items.si)
            .field(report.availability_per_capita > 0.0 ? p.all_items.si / report.availability_per_capita : 0.0)
            .field(additivity_name(p.all_items.kind));
        out.end_row();
    }
    out.commit();
}

void write_impacts(const ImpactReport& report, const Catalog& catalog, const std::filesystem::path& path)
{
    csv::Writer out(path, {"kind", "row_key", "col_key", "multiplier", "impact"});
    for (const auto& t : report.trade) {
        out.field("trade_import")
            .field(catalog.areas()[t.importer].code)
            .field(catalog.areas()[t.exporter].code)
            .field(t.multiplier)
            .field(t.impact);
        out.end_row();
    }
    for (const auto& s : report.substitution) {
        out.field("S")
            .field(catalog.items()[s.item].code)
            .field(catalog.items()[s.substitute].code)
            .field(s.index)
            .field(s.impact);
        out.end_row();
    }
    for (const auto& p : report.production) {
        out.field(family_name(p.family))
            .field(catalog.items()[p.item].code)
            .field(catalog.processes()[p.process].code)
            .field(p.multiplier)
            .field(p.impact);
        out.end_row();
    }
    out.commit();
}

void write_hdi(std::span<const HdiGroupChange> groups, const std::filesystem::path& path)
{
    csv::Writer out(path, {"group", "countries", "mean_relative_change"});
    for (const auto& g : groups) {
        out.field(g.group).field(g.countries).field(g.mean_relative_change);
        out.end_row();
    }
    out.commit();
}

void write_reconciliation(const ReconciliationResult& result, const Catalog& catalog,
                          const std::filesystem::path& path)
{
    const Dims dims = catalog.dims();
    csv::Writer out(path, {"series", "area", "item", "share_mean", "share_sd", "per_capita_mean", "per_capita_sd"});
    for (const auto& series : result.series) {
        for (const auto& s : series.sectors) {
            const auto sec = dims.unpack(s.sector);
            out.field(series.name)
                .field(catalog.areas()[sec.area].code)
                .field(catalog.items()[sec.item].code)
                .field(s.share_mean)
                .field(s.share_sd)
                .field(s.per_capita_mean)
                .field(s.per_capita_sd);
            out.end_row();
        }
    }
    out.commit();
}

} // namespace foodshock
