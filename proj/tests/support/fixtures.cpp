#include "fixtures.hpp"

#include "foodshock/parameter_io.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <unistd.h>

namespace fixtures {

using namespace foodshock;

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi)
{
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

bool chance(std::mt19937_64& rng, double p)
{
    return uniform(rng, 0.0, 1.0) < p;
}

std::size_t pick(std::mt19937_64& rng, std::size_t lo, std::size_t hi)
{
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

/// Random weights on `n` slots, each present with probability p, summing to 1.
std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t n, double p)
{
    std::vector<double> w(n, 0.0);
    double sum = 0.0;
    for (auto& v : w) {
        if (chance(rng, p)) {
            v = uniform(rng, 0.05, 1.0);
            sum += v;
        }
    }
    if (sum == 0.0) {
        w[pick(rng, 0, n - 1)] = 1.0;
        return w;
    }
    for (auto& v : w) {
        v /= sum;
    }
    return w;
}

} // namespace

Catalog make_catalog(const Dims& dims, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::vector<Entry> areas;
    std::vector<std::optional<double>> pops;
    std::vector<HdiRecord> hdi;
    for (std::size_t a = 0; a < dims.areas; ++a) {
        areas.push_back({fmt::format("A{}", a), fmt::format("Area {}", a)});
        pops.emplace_back(std::round(uniform(rng, 1e6, 5e7)));
        const double v = 0.4 + 0.55 * static_cast<double>(a % 5) / 4.0;
        hdi.push_back({v < 0.6 ? "low" : (v > 0.8 ? "very high" : "medium"), v});
    }
    std::vector<Entry> items;
    std::vector<std::string> groups;
    std::vector<std::string> units;
    for (std::size_t i = 0; i < dims.items; ++i) {
        items.push_back({fmt::format("I{}", i), fmt::format("Item {}", i)});
        groups.push_back(i % 2 == 0 ? "cereals" : "oilcrops");
        units.push_back("tonnes");
    }
    std::vector<Entry> processes;
    for (std::size_t p = 0; p < dims.processes; ++p) {
        processes.push_back({fmt::format("P{}", p), fmt::format("Process {}", p)});
    }
    return Catalog(std::move(areas), std::move(items), std::move(groups), std::move(units), std::move(processes),
                   std::move(pops), std::move(hdi));
}

Dims random_dims(std::mt19937_64& rng, const NetworkShape& shape)
{
    return {pick(rng, 2, shape.max_areas), pick(rng, 2, shape.max_items), pick(rng, 1, shape.max_processes)};
}

ParameterSet random_parameters(std::mt19937_64& rng, const Dims& dims, int year)
{
    ParameterSet p(year, dims);
    for (std::size_t a = 0; a < dims.areas; ++a) {
        for (std::size_t i = 0; i < dims.items; ++i) {
            // Roughly half the sectors are inputless producers.
            const bool primary = chance(rng, 0.5);
            for (std::size_t k = 0; k < dims.processes; ++k) {
                if (primary) {
                    if (chance(rng, 0.7)) {
                        p.beta.set(a, i, k, uniform(rng, 1000.0, 50000.0));
                    }
                } else if (chance(rng, 0.5)) {
                    p.alpha.set(a, i, k, uniform(rng, 0.1, 1.5));
                }
            }
            if (chance(rng, 0.7)) {
                const auto w = random_simplex(rng, dims.processes, 0.6);
                const double total = chance(rng, 0.5) ? 1.0 : uniform(rng, 0.3, 1.0);
                for (std::size_t k = 0; k < dims.processes; ++k) {
                    p.nu.set(a, i, k, w[k] * total);
                }
            }
            const double e = uniform(rng, 0.0, 1.0);
            const double q = uniform(rng, 0.0, 1.0);
            const double o = uniform(rng, 0.0, 1.0);
            const double sum = e + q + o;
            const auto s = dims.sector(a, i);
            p.eta_exp[s] = e / sum;
            p.eta_prod[s] = q / sum;
            p.x0[s] = chance(rng, 0.9) ? uniform(rng, 2000.0, 80000.0) : 0.0;
        }
    }
    for (std::size_t i = 0; i < dims.items; ++i) {
        for (std::size_t b = 0; b < dims.areas; ++b) {
            if (!chance(rng, 0.75)) {
                continue;
            }
            const auto w = random_simplex(rng, dims.areas, 0.6);
            for (std::size_t a = 0; a < dims.areas; ++a) {
                p.trade.set(i, a, b, w[a]);
            }
        }
    }
    return p;
}

ParameterSet trading_network(const Dims& dims, int year)
{
    ParameterSet p(year, dims);
    for (std::size_t a = 0; a < dims.areas; ++a) {
        for (std::size_t i = 0; i < dims.items; ++i) {
            const auto s = dims.sector(a, i);
            const double out = 1000.0 * static_cast<double>(1 + a + 2 * i);
            p.beta.set(a, i, 0, out);
            p.eta_exp[s] = 0.3;
            p.x0[s] = out;
            for (std::size_t b = 0; b < dims.areas; ++b) {
                if (b != a) {
                    p.trade.set(i, b, a, 1.0 / static_cast<double>(dims.areas - 1));
                }
            }
        }
    }
    return p;
}

std::vector<std::size_t> primary_sectors(const ParameterSet& params)
{
    std::vector<std::size_t> out;
    for (std::size_t s = 0; s < params.dims.sectors(); ++s) {
        if (!params.beta.row(s).empty() && params.alpha.row(s).empty()) {
            out.push_back(s);
        }
    }
    return out;
}

AdaptationRuleSet random_rules(std::mt19937_64& rng, const Dims& dims, double density)
{
    AdaptationRuleSet rules;
    auto value = [&] {
        RuleValue v;
        if (chance(rng, 0.8)) {
            v.w = uniform(rng, 0.0, 4.0);
            v.n_weight = static_cast<std::uint32_t>(pick(rng, 1, 5));
        }
        if (chance(rng, 0.4) || v.n_weight == 0) {
            v.r = uniform(rng, 0.0, 0.5);
            v.n_rewire = static_cast<std::uint32_t>(pick(rng, 1, 5));
        }
        return v;
    };
    auto fill = [&](RuleFamily f, std::size_t rows, std::size_t cols, double r_scale) {
        std::vector<RuleMatrix::Cell> cells;
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < cols; ++c) {
                if (chance(rng, density)) {
                    auto v = value();
                    v.r *= r_scale;
                    cells.push_back({static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(c), v});
                }
            }
        }
        rules[f] = RuleMatrix(std::move(cells));
    };
    fill(RuleFamily::alpha, dims.items, dims.processes, 1.0);
    fill(RuleFamily::beta, dims.items, dims.processes, 5000.0);
    fill(RuleFamily::nu, dims.items, dims.processes, 1.0);
    fill(RuleFamily::eta_exp, dims.items, 1, 1.0);
    fill(RuleFamily::eta_prod, dims.items, 1, 1.0);
    fill(RuleFamily::trade_import, dims.areas, dims.areas, 1.0);
    fill(RuleFamily::trade_export, dims.areas, dims.areas, 1.0);
    std::vector<SubstitutionMatrix::Cell> subs;
    for (std::size_t i = 0; i < dims.items; ++i) {
        for (std::size_t j = 0; j < dims.items; ++j) {
            if (i != j && i % 2 == j % 2 && chance(rng, density)) {
                subs.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j),
                                {uniform(rng, 0.01, 0.5), static_cast<std::uint32_t>(pick(rng, 2, 9))}});
            }
        }
    }
    rules.substitution = SubstitutionMatrix(std::move(subs));
    return rules;
}

std::vector<std::vector<double>> dense_trajectory(const ParameterSet& params, const std::vector<double>& phi, int tau)
{
    const Dims& d = params.dims;
    const std::size_t A = d.areas, I = d.items, K = d.processes;
    // Dense copies: alpha[a][i][k], beta[a][i][k], nu[a][i][k], T[i][a][b].
    std::vector<double> alpha(A * I * K), beta(A * I * K), nu(A * I * K), T(I * A * A);
    for (std::size_t a = 0; a < A; ++a) {
        for (std::size_t i = 0; i < I; ++i) {
            for (std::size_t k = 0; k < K; ++k) {
                alpha[(a * I + i) * K + k] = params.alpha.get(a, i, k);
                beta[(a * I + i) * K + k] = params.beta.get(a, i, k);
                nu[(a * I + i) * K + k] = params.nu.get(a, i, k);
            }
        }
    }
    for (std::size_t i = 0; i < I; ++i) {
        for (std::size_t a = 0; a < A; ++a) {
            for (std::size_t b = 0; b < A; ++b) {
                T[(i * A + a) * A + b] = params.trade.get(i, a, b);
            }
        }
    }

    std::vector<std::vector<double>> xs;
    xs.push_back(params.x0);
    for (int t = 1; t <= tau; ++t) {
        const auto& prev = xs.back();
        std::vector<double> x(A * I, 0.0);
        for (std::size_t a = 0; a < A; ++a) {
            std::vector<double> input(K, 0.0);
            for (std::size_t j = 0; j < I; ++j) {
                const double to_production = params.eta_prod[a * I + j] * prev[a * I + j];
                for (std::size_t k = 0; k < K; ++k) {
                    if (nu[(a * I + j) * K + k] != 0.0) {
                        input[k] += nu[(a * I + j) * K + k] * to_production;
                    }
                }
            }
            for (std::size_t i = 0; i < I; ++i) {
                double output = 0.0;
                for (std::size_t k = 0; k < K; ++k) {
                    if (alpha[(a * I + i) * K + k] != 0.0) {
                        output += alpha[(a * I + i) * K + k] * input[k];
                    }
                }
                for (std::size_t k = 0; k < K; ++k) {
                    if (beta[(a * I + i) * K + k] != 0.0) {
                        output += beta[(a * I + i) * K + k];
                    }
                }
                output *= 1.0 - phi[a * I + i];
                double inflow = 0.0;
                for (std::size_t b = 0; b < A; ++b) {
                    if (T[(i * A + a) * A + b] != 0.0) {
                        inflow += T[(i * A + a) * A + b] * (params.eta_exp[b * I + i] * prev[b * I + i]);
                    }
                }
                x[a * I + i] = output + inflow;
            }
        }
        xs.push_back(std::move(x));
    }
    return xs;
}

std::vector<ParameterSet> random_years(std::mt19937_64& rng, const Dims& dims, int first, int last, double noise)
{
    const auto base = random_parameters(rng, dims, first);
    std::vector<ParameterSet> out;
    for (int y = first; y <= last; ++y) {
        ParameterSet p = base;
        p.year = y;
        auto jitter = [&] { return 1.0 + uniform(rng, -noise, noise); };
        for (std::size_t s = 0; s < dims.sectors(); ++s) {
            for (auto& e : p.alpha.row(s)) {
                e.value *= jitter();
            }
            for (auto& e : p.beta.row(s)) {
                e.value *= jitter();
            }
            const double nu_sum = row_sum(p.nu.row(s));
            if (nu_sum > 0.0) {
                // Occasionally add a link, then restore the row sum.
                if (chance(rng, 0.1)) {
                    const auto k = pick(rng, 0, dims.processes - 1);
                    p.nu.set(s / dims.items, s % dims.items, k,
                             row_get(p.nu.row(s), static_cast<std::uint32_t>(k)) + uniform(rng, 0.01, 0.2));
                }
                for (auto& e : p.nu.row(s)) {
                    e.value *= jitter();
                }
                row_scale(p.nu.row(s), nu_sum / row_sum(p.nu.row(s)));
            }
            const double e = p.eta_exp[s] * jitter();
            const double q = p.eta_prod[s] * jitter();
            const double scale = std::max(1.0, e + q);
            p.eta_exp[s] = e / scale;
            p.eta_prod[s] = q / scale;
            p.x0[s] *= jitter();
        }
        for (std::size_t i = 0; i < dims.items; ++i) {
            for (std::size_t b = 0; b < dims.areas; ++b) {
                bool any = false;
                for (std::size_t a = 0; a < dims.areas; ++a) {
                    const double t = p.trade.get(i, a, b);
                    if (t > 0.0) {
                        any = true;
                        p.trade.set(i, a, b, t * jitter());
                    }
                }
                if (!any) {
                    continue;
                }
                if (chance(rng, 0.1)) {
                    const auto a = pick(rng, 0, dims.areas - 1);
                    p.trade.set(i, a, b, p.trade.get(i, a, b) + uniform(rng, 0.01, 0.2));
                }
                double sum = 0.0;
                for (std::size_t a = 0; a < dims.areas; ++a) {
                    sum += p.trade.get(i, a, b);
                }
                p.trade.scale_exporter(i, b, 1.0 / sum);
            }
        }
        out.push_back(std::move(p));
    }
    return out;
}

void plant_drop(std::vector<ParameterSet>& yearly, std::size_t sector, int year, double loss)
{
    for (auto& p : yearly) {
        if (p.year >= year) {
            p.x0[sector] *= 1.0 - loss;
        }
    }
}

AvailabilitySeries planted_series(std::mt19937_64& rng, std::size_t sectors)
{
    std::vector<int> years;
    for (int y = 1992; y <= 2020; ++y) {
        years.push_back(y);
    }
    AvailabilitySeries series(Dims{sectors, 1, 1}, years);
    for (std::size_t s = 0; s < sectors; ++s) {
        auto x = series.sector(s);
        const double level = std::exp(uniform(rng, std::log(200.0), std::log(2e5)));
        const double noise = chance(rng, 0.3) ? 0.0 : uniform(rng, 0.0, 0.4);
        const int drops = chance(rng, 0.1) ? 0 : (chance(rng, 0.15) ? 2 : 1);
        std::vector<std::pair<int, double>> planted;
        for (int d = 0; d < drops; ++d) {
            planted.emplace_back(static_cast<int>(pick(rng, 1990, 2022)), uniform(rng, 0.0, 0.95));
        }
        for (std::size_t k = 0; k < years.size(); ++k) {
            double v = level * (1.0 + uniform(rng, -noise, noise));
            for (const auto& [year, loss] : planted) {
                if (years[k] >= year) {
                    v *= 1.0 - loss;
                }
            }
            x[k] = v;
        }
        if (chance(rng, 0.05)) {
            const auto k = pick(rng, 0, years.size() - 1);
            for (std::size_t j = k; j < std::min(years.size(), k + 3); ++j) {
                x[j] = 0.0;
            }
        }
        if (chance(rng, 0.03)) {
            std::fill(x.begin(), x.end(), 0.0);
        }
    }
    return series;
}

namespace {

double cv(const std::vector<double>& v)
{
    if (v.empty()) {
        return std::numeric_limits<double>::infinity();
    }
    double mean = 0.0;
    for (double a : v) {
        mean += a;
    }
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double a : v) {
        ss += (a - mean) * (a - mean);
    }
    const double sd = std::sqrt(ss / static_cast<double>(v.size()));
    if (mean == 0.0) {
        return sd == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    return sd / mean;
}

} // namespace

std::vector<Event> brute_force_events(const AvailabilitySeries& series, const CalibrationConfig& config)
{
    std::vector<Event> out;
    const auto& years = series.years();
    const int n = static_cast<int>(years.size());
    for (std::size_t s = 0; s < series.dims().sectors(); ++s) {
        const auto x = series.sector(s);
        int best = -1;
        double best_loss = -1.0;
        for (int k = 1; k < n; ++k) {
            const bool in_range = years[k] >= config.first_event_year && years[k] <= config.last_event_year;
            const bool windows = k >= config.min_window_years && n - 1 - k >= config.min_window_years;
            if (!in_range || !windows || x[k - 1] <= 0.0 || x[k] >= x[k - 1]) {
                continue;
            }
            const double loss = (x[k - 1] - x[k]) / x[k - 1];
            if (loss > best_loss) {
                best = k;
                best_loss = loss;
            }
        }
        if (best < 0) {
            continue;
        }
        const double drop = x[best - 1] - x[best];
        const std::vector<double> before(x.begin(), x.begin() + best);
        const std::vector<double> after(x.begin() + best + 1, x.end());
        if (best_loss > config.delta_rel && drop > config.delta_abs && cv(before) < config.delta_dev &&
            cv(after) < config.delta_dev) {
            const auto sec = series.dims().unpack(s);
            out.push_back({sec.area, sec.item, years[best], best_loss});
        }
    }
    return out;
}

void write_dataset(const std::filesystem::path& root, const Catalog& catalog, const std::vector<ParameterSet>& yearly)
{
    std::filesystem::create_directories(root / "catalog");
    write_catalog(catalog, root / "catalog");
    for (const auto& p : yearly) {
        write_parameter_set(p, catalog, root / "years");
    }
}

std::filesystem::path temp_dir(const std::string& name)
{
    const auto dir = std::filesystem::temp_directory_path() / fmt::format("foodshock_test_{}_{}", name, ::getpid());
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace fixtures
