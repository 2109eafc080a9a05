#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace foodshock::stats {

double mean(std::span<const double> values);
/// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
double sample_sd(std::span<const double> values);

/// One-sample t-test of H0: mean <= 0 against mean > 0. Returns the upper
/// tail p-value; 1 when fewer than two values. A zero-variance sample gives
/// 0 for a positive mean and 1 otherwise.
double t_test_greater(std::span<const double> values);

/// Benjamini-Hochberg adjusted p-values (step-up, monotone, capped at 1),
/// in input order.
std::vector<double> benjamini_hochberg(std::span<const double> p_values);

struct ConfusionCounts {
    std::size_t tp = 0;
    std::size_t tn = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
};

/// Matthews correlation coefficient. A degenerate table (a zero marginal)
/// scores 1 when both classifications agree everywhere and 0 otherwise.
double matthews_correlation(const ConfusionCounts& counts);

} // namespace foodshock::stats
