#pragma once

#include "foodshock/catalog.hpp"
#include "foodshock/parameter_set.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace foodshock {

/// Thresholds and bounds for event detection and rule fitting.
struct CalibrationConfig {
    double delta_rel = 0.26;     ///< minimum relative year-over-year drop
    double delta_abs = 1000.0;   ///< minimum absolute drop, tonnes
    double delta_dev = 0.32;     ///< maximum coefficient of variation on either side
    int min_window_years = 5;    ///< years required strictly before and strictly after
    int first_event_year = 1997;
    int last_event_year = 2015;
    int base_year = 1992;
    int n_permutations = 1000;
    double alpha_sig = 0.05;
    double importer_relevance = 1e-3; ///< minimum export share for an import link to count
    std::uint64_t rng_seed = 20240101;
    unsigned threads = 1;

    /// Throws ValidationError when a field is out of range.
    void validate() const;
};

struct Event {
    std::size_t area = 0;
    std::size_t item = 0;
    int year = 0;
    double loss = 0.0; ///< relative drop, in (0, 1]

    friend bool operator==(const Event&, const Event&) = default;
};

struct GrowthReport {
    /// (year, area, process) columns whose base-year total was zero while the
    /// year's total was positive; their entries are set to zero.
    std::size_t zeroed_alpha_columns = 0;
    std::size_t zeroed_beta_columns = 0;
};

/// Rescales output rates per (area, process) and the availability vector
/// globally so that totals match `base_year`. Share parameters pass through.
/// `yearly` must be ordered by year and contain the base year.
std::vector<ParameterSet> normalize_growth(std::span<const ParameterSet> yearly, int base_year,
                                           GrowthReport* report = nullptr);

/// Sector-major availability table: value(sector, k) is the amount of the
/// sector in years[k].
class AvailabilitySeries {
public:
    AvailabilitySeries() = default;
    AvailabilitySeries(const Dims& dims, std::vector<int> years);

    /// Takes x0 of every (growth-normalized) parameter set.
    static AvailabilitySeries from_parameters(std::span<const ParameterSet> yearly);

    const Dims& dims() const { return dims_; }
    const std::vector<int>& years() const { return years_; }
    std::span<const double> sector(std::size_t s) const { return {values_.data() + s * years_.size(), years_.size()}; }
    std::span<double> sector(std::size_t s) { return {values_.data() + s * years_.size(), years_.size()}; }
    std::optional<std::size_t> year_index(int year) const;

private:
    Dims dims_;
    std::vector<int> years_;
    std::vector<double> values_;
};

struct DetectionLog {
    std::size_t skipped_zero_previous = 0; ///< candidate years with x(T-1) = 0
};

/// Coefficient of variation with the population standard deviation. An
/// all-zero window counts as perfectly stable (0).
double coefficient_of_variation(std::span<const double> window);

/// Finds at most one event per sector: the admissible year with the largest
/// relative decrease (earliest on ties), kept only if it also passes the
/// absolute and stability criteria.
std::vector<Event> detect_events(const AvailabilitySeries& series, const CalibrationConfig& config,
                                 DetectionLog* log = nullptr);

/// Evaluates the three event criteria for one sector at a fixed year.
std::optional<Event> evaluate_event_at(const AvailabilitySeries& series, std::size_t sector, int year,
                                       const CalibrationConfig& config);

} // namespace foodshock
