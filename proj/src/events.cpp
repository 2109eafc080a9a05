#include "foodshock/calibration.hpp"

#include "foodshock/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace foodshock {

void CalibrationConfig::validate() const
{
    if (!(delta_rel > 0.0) || !(delta_abs > 0.0) || !(delta_dev > 0.0)) {
        throw ValidationError("event thresholds must be positive");
    }
    if (first_event_year > last_event_year) {
        throw ValidationError(fmt::format("first_event_year {} is after last_event_year {}", first_event_year,
                                          last_event_year));
    }
    if (min_window_years < 1) {
        throw ValidationError("min_window_years must be at least 1");
    }
    if (n_permutations < 100) {
        throw ValidationError(fmt::format("n_permutations must be at least 100, got {}", n_permutations));
    }
    if (!(alpha_sig > 0.0 && alpha_sig < 1.0)) {
        throw ValidationError("alpha_sig must lie in (0, 1)");
    }
    if (importer_relevance < 0.0) {
        throw ValidationError("importer_relevance must be non-negative");
    }
}

AvailabilitySeries::AvailabilitySeries(const Dims& dims, std::vector<int> years)
    : dims_(dims), years_(std::move(years)), values_(dims.sectors() * years_.size(), 0.0)
{
    if (!std::is_sorted(years_.begin(), years_.end()) ||
        std::adjacent_find(years_.begin(), years_.end()) != years_.end()) {
        throw ValidationError("availability years must be strictly increasing");
    }
}

AvailabilitySeries AvailabilitySeries::from_parameters(std::span<const ParameterSet> yearly)
{
    if (yearly.empty()) {
        throw ValidationError("no yearly parameter sets");
    }
    std::vector<int> years;
    for (const auto& p : yearly) {
        years.push_back(p.year);
    }
    AvailabilitySeries series(yearly.front().dims, std::move(years));
    const auto n = yearly.size();
    for (std::size_t k = 0; k < n; ++k) {
        const auto& x0 = yearly[k].x0;
        for (std::size_t s = 0; s < x0.size(); ++s) {
            series.values_[s * n + k] = x0[s];
        }
    }
    return series;
}

std::optional<std::size_t> AvailabilitySeries::year_index(int year) const
{
    auto it = std::lower_bound(years_.begin(), years_.end(), year);
    if (it == years_.end() || *it != year) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(it - years_.begin());
}

double coefficient_of_variation(std::span<const double> window)
{
    if (window.empty()) {
        return std::numeric_limits<double>::infinity();
    }
    double mean = 0.0;
    for (double v : window) {
        mean += v;
    }
    mean /= static_cast<double>(window.size());
    double ss = 0.0;
    for (double v : window) {
        ss += (v - mean) * (v - mean);
    }
    const double sd = std::sqrt(ss / static_cast<double>(window.size()));
    if (mean == 0.0) {
        return sd == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    return sd / mean;
}

namespace {

bool admissible_index(const AvailabilitySeries& series, std::size_t k, const CalibrationConfig& config)
{
    const auto& years = series.years();
    const auto n = years.size();
    if (k == 0 || years[k - 1] != years[k] - 1) {
        return false;
    }
    const auto window = static_cast<std::size_t>(config.min_window_years);
    return years[k] >= config.first_event_year && years[k] <= config.last_event_year && k >= window &&
           n - 1 - k >= window;
}

std::optional<Event> check_candidate(std::span<const double> x, std::size_t k, const Sector& sector, int year,
                                     const CalibrationConfig& config)
{
    const double prev = x[k - 1];
    const double drop = prev - x[k];
    if (!(prev > 0.0) || !(drop > 0.0)) {
        return std::nullopt;
    }
    const double loss = drop / prev;
    if (!(loss > config.delta_rel) || !(drop > config.delta_abs)) {
        return std::nullopt;
    }
    if (!(coefficient_of_variation(x.subspan(0, k)) < config.delta_dev) ||
        !(coefficient_of_variation(x.subspan(k + 1)) < config.delta_dev)) {
        return std::nullopt;
    }
    return Event{sector.area, sector.item, year, loss};
}

} // namespace

std::vector<Event> detect_events(const AvailabilitySeries& series, const CalibrationConfig& config, DetectionLog* log)
{
    std::vector<Event> events;
    DetectionLog counts;
    const auto& years = series.years();
    for (std::size_t s = 0; s < series.dims().sectors(); ++s) {
        const auto x = series.sector(s);
        std::optional<std::size_t> best;
        double best_loss = 0.0;
        for (std::size_t k = 0; k < years.size(); ++k) {
            if (!admissible_index(series, k, config)) {
                continue;
            }
            if (!(x[k - 1] > 0.0)) {
                if (x[k] > 0.0) {
                    ++counts.skipped_zero_previous;
                }
                continue;
            }
            if (!(x[k] < x[k - 1])) {
                continue;
            }
            const double loss = (x[k - 1] - x[k]) / x[k - 1];
            if (!best || loss > best_loss) {
                best = k;
                best_loss = loss;
            }
        }
        if (best) {
            if (auto e = check_candidate(x, *best, series.dims().unpack(s), years[*best], config)) {
                events.push_back(*e);
            }
        }
    }
    if (log) {
        *log = counts;
    }
    return events;
}

std::optional<Event> evaluate_event_at(const AvailabilitySeries& series, std::size_t sector, int year,
                                       const CalibrationConfig& config)
{
    const auto k = series.year_index(year);
    if (!k || *k == 0 || series.years()[*k - 1] != year - 1) {
        return std::nullopt;
    }
    const auto window = static_cast<std::size_t>(config.min_window_years);
    const auto n = series.years().size();
    if (*k < window || n - 1 - *k < window) {
        return std::nullopt;
    }
    return check_candidate(series.sector(sector), *k, series.dims().unpack(sector), year, config);
}

} // namespace foodshock
