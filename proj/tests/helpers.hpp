#pragma once

// Shared test oracles. These deliberately avoid the library's own code paths
// where they are used to cross-check it.

#include <algorithm>
#include <cmath>
#include <vector>

namespace testutil {

// One-sample Kolmogorov-Smirnov test against U(0,1); returns the asymptotic
// p-value (Stephens' approximation for the effective sample size).
inline double ks_uniform_pvalue(std::vector<double> xs) {
    const std::size_t n = xs.size();
    std::sort(xs.begin(), xs.end());
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double lo = static_cast<double>(i) / n;
        const double hi = static_cast<double>(i + 1) / n;
        d = std::max(d, std::max(xs[i] - lo, hi - xs[i]));
    }
    const double sn = std::sqrt(static_cast<double>(n));
    const double lambda = (sn + 0.12 + 0.11 / sn) * d;
    double p = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = 2.0 * std::exp(-2.0 * k * k * lambda * lambda);
        p += (k % 2 == 1) ? term : -term;
    }
    return std::clamp(p, 0.0, 1.0);
}

inline double mean_of(const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

inline double population_stddev_of(const std::vector<double>& xs) {
    const double m = mean_of(xs);
    double s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(xs.size()));
}

}  // namespace testutil
