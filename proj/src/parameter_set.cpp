#include "foodshock/parameter_set.hpp"

#include "foodshock/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace foodshock {

namespace {

auto lower(const SparseRow& row, std::uint32_t key)
{
    return std::lower_bound(row.begin(), row.end(), key,
                            [](const SparseEntry& e, std::uint32_t k) { return e.key < k; });
}

auto lower(SparseRow& row, std::uint32_t key)
{
    return std::lower_bound(row.begin(), row.end(), key,
                            [](const SparseEntry& e, std::uint32_t k) { return e.key < k; });
}

bool near_stochastic(double sum, double tolerance)
{
    return sum == 0.0 || std::abs(sum - 1.0) <= tolerance;
}

} // namespace

double row_get(const SparseRow& row, std::uint32_t key)
{
    auto it = lower(row, key);
    return (it != row.end() && it->key == key) ? it->value : 0.0;
}

void row_set(SparseRow& row, std::uint32_t key, double value)
{
    auto it = lower(row, key);
    const bool present = it != row.end() && it->key == key;
    if (value == 0.0) {
        if (present) {
            row.erase(it);
        }
    } else if (present) {
        it->value = value;
    } else {
        row.insert(it, SparseEntry{key, value});
    }
}

double row_sum(const SparseRow& row)
{
    double sum = 0.0;
    for (const auto& e : row) {
        sum += e.value;
    }
    return sum;
}

void row_scale(SparseRow& row, double factor)
{
    if (factor == 0.0) {
        row.clear();
        return;
    }
    for (auto& e : row) {
        e.value *= factor;
    }
}

double SectorProcessTable::get(std::size_t area, std::size_t item, std::size_t process) const
{
    return row_get(row(area, item), static_cast<std::uint32_t>(process));
}

void SectorProcessTable::set(std::size_t area, std::size_t item, std::size_t process, double value)
{
    row_set(row(area, item), static_cast<std::uint32_t>(process), value);
}

std::vector<double> SectorProcessTable::process_totals() const
{
    std::vector<double> totals(dims_.areas * dims_.processes, 0.0);
    for (std::size_t s = 0; s < rows_.size(); ++s) {
        const auto area = s / dims_.items;
        for (const auto& e : rows_[s]) {
            totals[area * dims_.processes + e.key] += e.value;
        }
    }
    return totals;
}

std::size_t SectorProcessTable::nnz() const
{
    std::size_t n = 0;
    for (const auto& r : rows_) {
        n += r.size();
    }
    return n;
}

double SparseItemMatrix::get(std::size_t item, std::size_t importer, std::size_t exporter) const
{
    return row_get(row(item, importer), static_cast<std::uint32_t>(exporter));
}

void SparseItemMatrix::set(std::size_t item, std::size_t importer, std::size_t exporter, double value)
{
    row_set(row(item, importer), static_cast<std::uint32_t>(exporter), value);
}

std::vector<double> SparseItemMatrix::exporter_sums() const
{
    std::vector<double> sums(dims_.sectors(), 0.0);
    for (std::size_t s = 0; s < rows_.size(); ++s) {
        const auto item = s % dims_.items;
        for (const auto& e : rows_[s]) {
            sums[dims_.sector(e.key, item)] += e.value;
        }
    }
    return sums;
}

void SparseItemMatrix::scale_exporter(std::size_t item, std::size_t exporter, double factor)
{
    const auto key = static_cast<std::uint32_t>(exporter);
    for (std::size_t importer = 0; importer < dims_.areas; ++importer) {
        auto& r = row(item, importer);
        auto it = lower(r, key);
        if (it != r.end() && it->key == key) {
            if (factor == 0.0) {
                r.erase(it);
            } else {
                it->value *= factor;
            }
        }
    }
}

std::size_t SparseItemMatrix::nnz() const
{
    std::size_t n = 0;
    for (const auto& r : rows_) {
        n += r.size();
    }
    return n;
}

ParameterSet::ParameterSet(int year_, const Dims& dims_)
    : year(year_),
      dims(dims_),
      alpha(dims_),
      beta(dims_),
      nu(dims_),
      trade(dims_),
      eta_exp(dims_.sectors(), 0.0),
      eta_prod(dims_.sectors(), 0.0),
      x0(dims_.sectors(), 0.0)
{
}

std::vector<std::string> invariant_violations(const ParameterSet& params, double tolerance)
{
    std::vector<std::string> out;
    const auto& d = params.dims;

    auto check_nonneg_finite = [&](const SectorProcessTable& table, std::string_view name) {
        for (std::size_t s = 0; s < d.sectors(); ++s) {
            for (const auto& e : table.row(s)) {
                if (!std::isfinite(e.value) || e.value < 0.0) {
                    const auto sec = d.unpack(s);
                    out.push_back(fmt::format("{}[{},{},{}] = {} is negative or not finite", name, sec.area,
                                              sec.item, e.key, e.value));
                }
            }
        }
    };
    check_nonneg_finite(params.alpha, "alpha");
    check_nonneg_finite(params.beta, "beta");
    check_nonneg_finite(params.nu, "nu");

    for (std::size_t s = 0; s < d.sectors(); ++s) {
        for (const auto& e : params.alpha.row(s)) {
            if (e.value > 0.0 && row_get(params.beta.row(s), e.key) > 0.0) {
                const auto sec = d.unpack(s);
                out.push_back(fmt::format("alpha and beta both positive at ({},{},{})", sec.area, sec.item, e.key));
            }
        }
        const double nu_sum = row_sum(params.nu.row(s));
        if (nu_sum > 1.0 + tolerance) {
            const auto sec = d.unpack(s);
            out.push_back(fmt::format("input shares of ({},{}) sum to {}", sec.area, sec.item, nu_sum));
        }
        const double ee = params.eta_exp[s];
        const double ep = params.eta_prod[s];
        if (!(ee >= 0.0) || !(ep >= 0.0) || ee + ep > 1.0 + tolerance) {
            const auto sec = d.unpack(s);
            out.push_back(fmt::format("allocation shares of ({},{}) invalid: exp={} prod={}", sec.area, sec.item, ee, ep));
        }
        if (!(params.x0[s] >= 0.0) || !std::isfinite(params.x0[s])) {
            const auto sec = d.unpack(s);
            out.push_back(fmt::format("x0 of ({},{}) = {} is negative or not finite", sec.area, sec.item, params.x0[s]));
        }
    }

    for (std::size_t item = 0; item < d.items; ++item) {
        for (std::size_t importer = 0; importer < d.areas; ++importer) {
            for (const auto& e : params.trade.row(item, importer)) {
                if (!std::isfinite(e.value) || e.value < 0.0 || e.value > 1.0 + tolerance) {
                    out.push_back(fmt::format("trade share item {} {}<-{} = {} out of range", item, importer, e.key,
                                              e.value));
                }
            }
        }
    }
    const auto sums = params.trade.exporter_sums();
    for (std::size_t s = 0; s < sums.size(); ++s) {
        if (!near_stochastic(sums[s], tolerance)) {
            const auto sec = d.unpack(s);
            out.push_back(fmt::format("exports of ({},{}) sum to {}", sec.area, sec.item, sums[s]));
        }
    }
    return out;
}

void validate(const ParameterSet& params, double tolerance)
{
    const auto violations = invariant_violations(params, tolerance);
    if (violations.empty()) {
        return;
    }
    std::string message = fmt::format("parameter set for year {} violates {} invariant(s):", params.year,
                                      violations.size());
    for (std::size_t k = 0; k < std::min<std::size_t>(violations.size(), 10); ++k) {
        message += "\n  " + violations[k];
    }
    throw ValidationError(message);
}

ParameterSet threshold_small_shares(const ParameterSet& params, double floor, ThresholdReport* report)
{
    ParameterSet out = params;
    ThresholdReport counts;
    const auto& d = out.dims;

    for (std::size_t s = 0; s < d.sectors(); ++s) {
        auto& row = out.nu.row(s);
        const double before = row_sum(row);
        const auto n = row.size();
        std::erase_if(row, [floor](const SparseEntry& e) { return e.value < floor; });
        if (row.size() != n) {
            counts.zeroed_nu += n - row.size();
            const double after = row_sum(row);
            if (after > 0.0) {
                row_scale(row, before / after);
            }
        }
    }

    const auto before = out.trade.exporter_sums();
    std::vector<char> touched(d.sectors(), 0);
    for (std::size_t item = 0; item < d.items; ++item) {
        for (std::size_t importer = 0; importer < d.areas; ++importer) {
            auto& row = out.trade.row(item, importer);
            for (const auto& e : row) {
                if (e.value < floor) {
                    touched[d.sector(e.key, item)] = 1;
                    ++counts.zeroed_trade;
                }
            }
            std::erase_if(row, [floor](const SparseEntry& e) { return e.value < floor; });
        }
    }
    const auto after = out.trade.exporter_sums();
    for (std::size_t s = 0; s < d.sectors(); ++s) {
        if (touched[s] && after[s] > 0.0) {
            const auto sec = d.unpack(s);
            out.trade.scale_exporter(sec.item, sec.area, before[s] / after[s]);
        }
    }

    for (std::size_t s = 0; s < d.sectors(); ++s) {
        for (double* share : {&out.eta_exp[s], &out.eta_prod[s]}) {
            if (*share > 0.0 && *share < floor) {
                *share = 0.0;
                ++counts.zeroed_eta;
            }
        }
    }

    if (report) {
        *report = counts;
    }
    return out;
}

} // namespace foodshock
