#include "foodshock/simulator.hpp"

#include <algorithm>
#include <vector>

namespace foodshock {

namespace {

/// Rewrites `row` as rule(v) over the union of its keys and the rule row's
/// columns. Keys without a rule keep their value.
void adapt_row(SparseRow& row, std::span<const RuleMatrix::Cell> rule_row, double loss)
{
    if (rule_row.empty()) {
        return;
    }
    SparseRow out;
    out.reserve(row.size() + rule_row.size());
    auto r = row.begin();
    auto c = rule_row.begin();
    auto push = [&](std::uint32_t key, double value) {
        if (value != 0.0) {
            out.push_back({key, value});
        }
    };
    while (r != row.end() || c != rule_row.end()) {
        if (c == rule_row.end() || (r != row.end() && r->key < c->col)) {
            push(r->key, r->value);
            ++r;
        } else if (r == row.end() || c->col < r->key) {
            push(c->col, c->value.apply(0.0, loss));
            ++c;
        } else {
            push(r->key, c->value.apply(r->value, loss));
            ++r;
            ++c;
        }
    }
    row = std::move(out);
}

/// Keeps a process either input-driven or inputless for a sector. A rewired
/// entry that would coexist with an entry of the other kind is dropped; if
/// both kinds were rewired onto the same fresh process, the inputless one
/// stays.
void keep_exclusive(SparseRow& alpha, SparseRow& beta, const SparseRow& alpha_before)
{
    auto had = [](const SparseRow& row, std::uint32_t key) { return row_get(row, key) != 0.0; };
    std::vector<std::uint32_t> drop_alpha;
    std::vector<std::uint32_t> drop_beta;
    for (const auto& e : alpha) {
        if (row_get(beta, e.key) == 0.0) {
            continue;
        }
        if (had(alpha_before, e.key)) {
            drop_beta.push_back(e.key);
        } else {
            drop_alpha.push_back(e.key);
        }
    }
    for (auto k : drop_alpha) {
        row_set(alpha, k, 0.0);
    }
    for (auto k : drop_beta) {
        row_set(beta, k, 0.0);
    }
}

double adapt_value(double value, const RuleValue* rule, double loss)
{
    return rule ? rule->apply(value, loss) : value;
}

} // namespace

void apply_adaptation(ParameterSet& params, std::span<const Trigger> triggers, const AdaptationRuleSet& rules)
{
    const auto& d = params.dims;
    for (const auto& t : triggers) {
        const auto s = d.sector(t.area, t.item);
        const SparseRow alpha_before = params.alpha.row(s);
        adapt_row(params.alpha.row(s), rules[RuleFamily::alpha].row(t.item), t.loss);
        adapt_row(params.beta.row(s), rules[RuleFamily::beta].row(t.item), t.loss);
        keep_exclusive(params.alpha.row(s), params.beta.row(s), alpha_before);
        adapt_row(params.nu.row(s), rules[RuleFamily::nu].row(t.item), t.loss);
        params.eta_exp[s] = adapt_value(params.eta_exp[s], rules[RuleFamily::eta_exp].find(t.item, 0), t.loss);
        params.eta_prod[s] = adapt_value(params.eta_prod[s], rules[RuleFamily::eta_prod].find(t.item, 0), t.loss);

        // Imports of the adapting area: row (item, area), keyed by exporter.
        adapt_row(params.trade.row(t.item, t.area), rules[RuleFamily::trade_import].row(t.area), t.loss);

        // Exports of the adapting area: column (item, area), keyed by importer.
        const auto export_rules = rules[RuleFamily::trade_export].row(t.area);
        if (!export_rules.empty()) {
            for (const auto& cell : export_rules) {
                const auto importer = cell.col;
                const double v = params.trade.get(t.item, importer, t.area);
                params.trade.set(t.item, importer, t.area, cell.value.apply(v, t.loss));
            }
        }
    }
}

void apply_substitution(ParameterSet& params, std::span<const Trigger> triggers, const AdaptationRuleSet& rules)
{
    for (const auto& t : triggers) {
        for (const auto& cell : rules.substitution.row(t.item)) {
            row_scale(params.trade.row(cell.col, t.area), 1.0 + cell.value.s);
        }
    }
}

ParameterSet renormalize_constraints(const ParameterSet& params, const ParameterSet& originals,
                                     RenormalizationLog* log, RenormalizeScope scope)
{
    ParameterSet out = params;
    RenormalizationLog counts;
    const auto& d = out.dims;

    const auto target = originals.trade.exporter_sums();
    const auto current = out.trade.exporter_sums();
    for (std::size_t s = 0; s < d.sectors(); ++s) {
        if (current[s] == target[s]) {
            continue;
        }
        const auto sec = d.unpack(s);
        if (current[s] > 0.0) {
            out.trade.scale_exporter(sec.item, sec.area, target[s] / current[s]);
            if (target[s] == 0.0) {
                ++counts.emptied_trade_columns;
            }
        } else {
            ++counts.emptied_trade_columns;
        }
    }

    if (scope == RenormalizeScope::all) {
        for (std::size_t s = 0; s < d.sectors(); ++s) {
            auto& row = out.nu.row(s);
            const double want = row_sum(originals.nu.row(s));
            const double have = row_sum(row);
            if (have != want) {
                if (have > 0.0) {
                    row_scale(row, want / have);
                }
                if (have == 0.0 || want == 0.0) {
                    ++counts.emptied_nu_rows;
                }
            }

            double& exp = out.eta_exp[s];
            double& prod = out.eta_prod[s];
            if (exp != originals.eta_exp[s] || prod != originals.eta_prod[s]) {
                const double other = std::max(0.0, 1.0 - originals.eta_exp[s] - originals.eta_prod[s]);
                const double total = exp + prod + other;
                if (total > 0.0) {
                    exp /= total;
                    prod /= total;
                } else {
                    ++counts.emptied_eta_rows;
                }
            }
        }

        auto conserve = [&](SectorProcessTable& table, const SectorProcessTable& orig, std::size_t& emptied) {
            const auto want = orig.process_totals();
            const auto have = table.process_totals();
            std::vector<double> factor(want.size(), 1.0);
            bool any = false;
            for (std::size_t k = 0; k < want.size(); ++k) {
                if (have[k] != want[k]) {
                    any = true;
                    if (have[k] > 0.0) {
                        factor[k] = want[k] / have[k];
                    }
                    if (have[k] == 0.0 || want[k] == 0.0) {
                        ++emptied;
                    }
                }
            }
            if (!any) {
                return;
            }
            for (std::size_t s = 0; s < d.sectors(); ++s) {
                const auto base = (s / d.items) * d.processes;
                auto& row = table.row(s);
                for (auto& e : row) {
                    e.value *= factor[base + e.key];
                }
                std::erase_if(row, [](const SparseEntry& e) { return e.value == 0.0; });
            }
        };
        conserve(out.alpha, originals.alpha, counts.emptied_alpha_columns);
        conserve(out.beta, originals.beta, counts.emptied_beta_columns);
    }

    if (log) {
        log->emptied_trade_columns += counts.emptied_trade_columns;
        log->emptied_nu_rows += counts.emptied_nu_rows;
        log->emptied_eta_rows += counts.emptied_eta_rows;
        log->emptied_alpha_columns += counts.emptied_alpha_columns;
        log->emptied_beta_columns += counts.emptied_beta_columns;
    }
    return out;
}

} // namespace foodshock
