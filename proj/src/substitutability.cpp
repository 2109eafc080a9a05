#include "foodshock/substitutability.hpp"

#include "foodshock/csv.hpp"
#include "foodshock/errors.hpp"
#include "foodshock/parallel.hpp"
#include "foodshock/statistics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <random>
#include <unordered_map>

namespace foodshock {

namespace {

/// Relative import-index change of every group member for one event.
struct EventResponses {
    std::size_t event = 0;
    std::size_t item = 0;
    std::vector<std::optional<double>> change; ///< indexed by position in the group
};

struct GroupWork {
    std::vector<std::size_t> members;
    std::vector<EventResponses> events;
    std::vector<SubstitutionTest> tests;
};

std::size_t position(const std::vector<std::size_t>& members, std::size_t item)
{
    return static_cast<std::size_t>(std::find(members.begin(), members.end(), item) - members.begin());
}

void permutation_tests(GroupWork& group, const CalibrationConfig& config, std::uint64_t stream)
{
    const auto m = group.members.size();
    const auto n_events = group.events.size();
    std::vector<std::size_t> labels(n_events);
    for (std::size_t e = 0; e < n_events; ++e) {
        labels[e] = position(group.members, group.events[e].item);
    }

    std::seed_seq seq{static_cast<std::uint32_t>(config.rng_seed), static_cast<std::uint32_t>(config.rng_seed >> 32),
                      static_cast<std::uint32_t>(stream)};
    std::mt19937_64 rng(seq);

    std::vector<std::size_t> exceed(group.tests.size(), 0);
    std::vector<std::size_t> valid(group.tests.size(), 0);
    std::vector<double> sum(m * m);
    std::vector<std::size_t> count(m * m);
    for (int r = 0; r < config.n_permutations; ++r) {
        std::shuffle(labels.begin(), labels.end(), rng);
        std::fill(sum.begin(), sum.end(), 0.0);
        std::fill(count.begin(), count.end(), 0);
        for (std::size_t e = 0; e < n_events; ++e) {
            const auto& change = group.events[e].change;
            for (std::size_t j = 0; j < m; ++j) {
                if (change[j]) {
                    sum[labels[e] * m + j] += *change[j];
                    ++count[labels[e] * m + j];
                }
            }
        }
        for (std::size_t t = 0; t < group.tests.size(); ++t) {
            const auto& test = group.tests[t];
            const auto cell = position(group.members, test.from_item) * m + position(group.members, test.to_item);
            if (count[cell] == 0) {
                continue;
            }
            ++valid[t];
            if (sum[cell] / static_cast<double>(count[cell]) >= test.s) {
                ++exceed[t];
            }
        }
    }
    for (std::size_t t = 0; t < group.tests.size(); ++t) {
        group.tests[t].p_perm = valid[t] ? static_cast<double>(exceed[t]) / static_cast<double>(valid[t]) : 1.0;
    }
}

} // namespace

double import_index(const ParameterSet& params, std::size_t area, std::size_t item,
                    std::span<const std::uint32_t> exporters)
{
    double total = 0.0;
    const auto& row = params.trade.row(item, area);
    for (auto b : exporters) {
        total += row_get(row, b);
    }
    return total;
}

SubstitutabilityResult derive_substitutability(std::span<const Event> events, std::span<const ParameterSet> yearly,
                                               const Catalog& catalog, const CalibrationConfig& config)
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

    const auto group_names = catalog.group_names();
    std::vector<GroupWork> groups(group_names.size());
    std::unordered_map<std::string, std::size_t> group_index;
    for (std::size_t g = 0; g < group_names.size(); ++g) {
        groups[g].members = catalog.group_members(group_names[g]);
        group_index.emplace(group_names[g], g);
    }

    SubstitutabilityResult result;
    for (std::size_t k = 0; k < events.size(); ++k) {
        const auto& e = events[k];
        const auto it = group_index.find(catalog.group(e.item));
        if (it == group_index.end()) {
            continue;
        }
        auto& group = groups[it->second];
        if (group.members.size() < 2) {
            continue;
        }
        const auto& p0 = year(e.year);
        const auto& p1 = year(e.year + 1);
        EventResponses responses{k, e.item, std::vector<std::optional<double>>(group.members.size())};
        for (std::size_t jj = 0; jj < group.members.size(); ++jj) {
            const auto j = group.members[jj];
            std::vector<std::uint32_t> relevant;
            for (const auto& entry : p0.trade.row(j, e.area)) {
                if (entry.value >= config.importer_relevance) {
                    relevant.push_back(entry.key);
                }
            }
            const double before = import_index(p0, e.area, j, relevant);
            if (!(before > 0.0)) {
                if (j != e.item) {
                    ++result.excluded_zero_index;
                }
                continue;
            }
            const double after = import_index(p1, e.area, j, relevant);
            responses.change[jj] = (after - before) / before;
        }
        group.events.push_back(std::move(responses));
    }

    for (auto& group : groups) {
        for (std::size_t ii = 0; ii < group.members.size(); ++ii) {
            for (std::size_t jj = 0; jj < group.members.size(); ++jj) {
                if (ii == jj) {
                    continue;
                }
                std::vector<double> values;
                for (const auto& ev : group.events) {
                    if (ev.item == group.members[ii] && ev.change[jj]) {
                        values.push_back(*ev.change[jj]);
                    }
                }
                if (values.empty()) {
                    continue;
                }
                SubstitutionTest test;
                test.from_item = group.members[ii];
                test.to_item = group.members[jj];
                test.s = stats::mean(values);
                test.n_events = values.size();
                test.p_mean = stats::t_test_greater(values);
                group.tests.push_back(test);
            }
        }
    }

    parallel_for(groups.size(), config.threads, [&](std::size_t g) {
        if (!groups[g].tests.empty()) {
            permutation_tests(groups[g], config, g);
        }
    });

    for (auto& group : groups) {
        result.tests.insert(result.tests.end(), group.tests.begin(), group.tests.end());
    }
    std::vector<double> p(result.tests.size());
    std::transform(result.tests.begin(), result.tests.end(), p.begin(), [](const auto& t) { return t.p_perm; });
    const auto q = stats::benjamini_hochberg(p);

    std::vector<SubstitutionMatrix::Cell> cells;
    for (std::size_t t = 0; t < result.tests.size(); ++t) {
        auto& test = result.tests[t];
        test.q_perm = q[t];
        test.admitted = test.p_mean < config.alpha_sig && test.q_perm < config.alpha_sig;
        if (test.admitted) {
            cells.push_back({static_cast<std::uint32_t>(test.from_item), static_cast<std::uint32_t>(test.to_item),
                             {test.s, static_cast<std::uint32_t>(test.n_events)}});
        }
    }
    result.matrix = SubstitutionMatrix(std::move(cells));
    return result;
}

void write_substitution_tests(std::span<const SubstitutionTest> tests, const Catalog& catalog,
                              const std::filesystem::path& path)
{
    csv::Writer out(path, {"item", "substitute", "s", "n_events", "p_mean", "p_perm", "q_perm", "admitted"});
    for (const auto& t : tests) {
        out.field(catalog.items()[t.from_item].code)
            .field(catalog.items()[t.to_item].code)
            .field(t.s)
            .field(t.n_events)
            .field(t.p_mean)
            .field(t.p_perm)
            .field(t.q_perm)
            .field(t.admitted ? 1 : 0)
            .end_row();
    }
    out.commit();
}

} // namespace foodshock
