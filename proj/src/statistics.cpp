#include "foodshock/statistics.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace foodshock::stats {

double mean(std::span<const double> values)
{
    if (values.empty()) {
        return 0.0;
    }
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double sample_sd(std::span<const double> values)
{
    if (values.size() < 2) {
        return 0.0;
    }
    const double m = mean(values);
    double ss = 0.0;
    for (double v : values) {
        ss += (v - m) * (v - m);
    }
    return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

double t_test_greater(std::span<const double> values)
{
    if (values.size() < 2) {
        return 1.0;
    }
    const double m = mean(values);
    const double sd = sample_sd(values);
    if (sd == 0.0) {
        return m > 0.0 ? 0.0 : 1.0;
    }
    const double n = static_cast<double>(values.size());
    const double t = m / (sd / std::sqrt(n));
    const boost::math::students_t dist(n - 1.0);
    return boost::math::cdf(boost::math::complement(dist, t));
}

std::vector<double> benjamini_hochberg(std::span<const double> p_values)
{
    const auto n = p_values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });

    std::vector<double> adjusted(n, 1.0);
    double running = 1.0;
    for (std::size_t rank = n; rank-- > 0;) {
        const auto k = order[rank];
        const double q = p_values[k] * static_cast<double>(n) / static_cast<double>(rank + 1);
        running = std::min(running, q);
        adjusted[k] = std::min(running, 1.0);
    }
    return adjusted;
}

double matthews_correlation(const ConfusionCounts& c)
{
    const double tp = static_cast<double>(c.tp);
    const double tn = static_cast<double>(c.tn);
    const double fp = static_cast<double>(c.fp);
    const double fn = static_cast<double>(c.fn);
    const double denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
    if (denom == 0.0) {
        return (c.fp == 0 && c.fn == 0) ? 1.0 : 0.0;
    }
    return (tp * tn - fp * fn) / std::sqrt(denom);
}

} // namespace foodshock::stats
