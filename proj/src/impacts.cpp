#include "foodshock/analysis.hpp"

#include <algorithm>

namespace foodshock {

namespace {

template <typename T>
void sort_by_impact(std::vector<T>& v)
{
    std::stable_sort(v.begin(), v.end(), [](const T& a, const T& b) { return a.impact > b.impact; });
}

} // namespace

ImpactReport impact_estimators(const ParameterSet& params, const AdaptationRuleSet& rules)
{
    const Dims& dims = params.dims;
    ImpactReport report;

    // Export volume of each sector at the initial state.
    std::vector<double> exported(dims.sectors());
    std::vector<double> to_production(dims.sectors());
    for (std::size_t s = 0; s < dims.sectors(); ++s) {
        exported[s] = params.eta_exp[s] * params.x0[s];
        to_production[s] = params.eta_prod[s] * params.x0[s];
    }

    for (const auto& cell : rules[RuleFamily::trade_import].cells()) {
        if (!cell.value.has_weight()) {
            continue;
        }
        const std::size_t a = cell.row;
        const std::size_t b = cell.col;
        double sum = 0.0;
        std::size_t n = 0;
        for (std::size_t i = 0; i < dims.items; ++i) {
            const double t = params.trade.get(i, a, b);
            if (t > 0.0) {
                sum += t * exported[dims.sector(a, i)];
                ++n;
            }
        }
        if (n > 0) {
            report.trade.push_back({a, b, cell.value.w, cell.value.w * sum / static_cast<double>(n)});
        }
    }

    for (const auto& cell : rules.substitution.cells()) {
        const std::size_t j = cell.col;
        double sum = 0.0;
        std::size_t n = 0;
        for (std::size_t a = 0; a < dims.areas; ++a) {
            const double imports = row_sum(params.trade.row(j, a));
            if (imports > 0.0) {
                sum += imports * exported[dims.sector(a, j)];
                ++n;
            }
        }
        if (n > 0) {
            report.substitution.push_back(
                {cell.row, j, cell.value.s, (1.0 + cell.value.s) * sum / static_cast<double>(n)});
        }
    }

    // Input volume entering each (area, process) at the initial state.
    std::vector<double> process_input(dims.areas * dims.processes, 0.0);
    for (std::size_t s = 0; s < dims.sectors(); ++s) {
        const auto area = dims.unpack(s).area;
        for (const auto& e : params.nu.row(s)) {
            process_input[area * dims.processes + e.key] += e.value * to_production[s];
        }
    }

    auto production = [&](RuleFamily family, auto&& term) {
        for (const auto& cell : rules[family].cells()) {
            if (!cell.value.has_weight()) {
                continue;
            }
            const std::size_t i = cell.row;
            const std::size_t k = cell.col;
            double sum = 0.0;
            std::size_t n = 0;
            for (std::size_t a = 0; a < dims.areas; ++a) {
                if (const auto v = term(a, i, k); v) {
                    sum += *v;
                    ++n;
                }
            }
            if (n > 0) {
                report.production.push_back({family, i, k, cell.value.w, cell.value.w * sum / static_cast<double>(n)});
            }
        }
    };
    production(RuleFamily::alpha, [&](std::size_t a, std::size_t i, std::size_t k) -> std::optional<double> {
        const double alpha = params.alpha.get(a, i, k);
        if (alpha <= 0.0) {
            return std::nullopt;
        }
        return alpha * process_input[a * dims.processes + k];
    });
    production(RuleFamily::beta, [&](std::size_t a, std::size_t i, std::size_t k) -> std::optional<double> {
        const double beta = params.beta.get(a, i, k);
        return beta > 0.0 ? std::optional<double>(beta) : std::nullopt;
    });
    production(RuleFamily::nu, [&](std::size_t a, std::size_t i, std::size_t k) -> std::optional<double> {
        const double nu = params.nu.get(a, i, k);
        if (nu <= 0.0) {
            return std::nullopt;
        }
        return nu * to_production[dims.sector(a, i)];
    });

    sort_by_impact(report.trade);
    sort_by_impact(report.substitution);
    sort_by_impact(report.production);
    return report;
}

} // namespace foodshock
