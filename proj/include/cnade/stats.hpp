#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "cnade/error.hpp"

namespace cnade {

inline double mean_of(std::span<const double> v) {
    if (v.empty()) throw Error(ErrorCode::empty_input, "mean of empty sample");
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

/// Population standard deviation.
inline double stddev_of(std::span<const double> v) {
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size()));
}

/// Empirical quantile of an ascending-sorted sample, linear interpolation
/// between order statistics (Hyndman-Fan type 7).
inline double quantile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw Error(ErrorCode::empty_input, "quantile of empty sample");
    const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

inline double quantile(std::vector<double> values, double q) {
    std::sort(values.begin(), values.end());
    return quantile_sorted(values, q);
}

}  // namespace cnade
