// Independent reference implementations used to cross-check the library.
// Everything here is intentionally brute force and kept free of any
// include/sdmm implementation detail beyond plain data types.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace oracle {

// Mann-Kendall S by direct enumeration of every pair in the suffix.
inline long long mann_kendall_s(std::span<const double> series, double eta) {
    const auto q = static_cast<std::size_t>(
        std::ceil(eta * static_cast<double>(series.size())));
    const std::size_t start = series.size() - q;
    long long s = 0;
    for (std::size_t i = start; i < series.size(); ++i) {
        for (std::size_t j = i + 1; j < series.size(); ++j) {
            if (series[j] > series[i]) ++s;
            if (series[j] < series[i]) --s;
        }
    }
    return s;
}

// Within-cluster sum of squares for points assigned to their nearest
// centroid (ties to the lower index).
inline double wcss(std::span<const double> values, std::span<const double> centroids) {
    double acc = 0.0;
    for (double v : values) {
        double best = std::numeric_limits<double>::infinity();
        for (double c : centroids) {
            const double d = (v - c) * (v - c);
            best = std::min(best, d);
        }
        acc += best;
    }
    return acc;
}

// Optimal 1-D partition into two contiguous groups of the sorted values:
// exhaustive scan over every split point.
inline double best_two_cluster_wcss(std::span<const double> values) {
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    std::vector<double> pre(n + 1, 0.0), pre2(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        pre[i + 1] = pre[i] + v[i];
        pre2[i + 1] = pre2[i] + v[i] * v[i];
    }
    auto sse = [&](std::size_t a, std::size_t b) {  // [a, b)
        const auto cnt = static_cast<double>(b - a);
        if (cnt <= 0.0) return 0.0;
        const double sum = pre[b] - pre[a];
        return (pre2[b] - pre2[a]) - sum * sum / cnt;
    };
    double best = sse(0, n);  // split at 0 or n = single cluster
    for (std::size_t cut = 1; cut < n; ++cut) {
        best = std::min(best, sse(0, cut) + sse(cut, n));
    }
    return best;
}

// Sum per blob of points assigned by nearest blob center.
inline std::vector<std::size_t> assign_counts(std::span<const double> points_1d,
                                              std::span<const double> centers) {
    std::vector<std::size_t> counts(centers.size(), 0);
    for (double p : points_1d) {
        std::size_t best = 0;
        double best_d = std::abs(p - centers[0]);
        for (std::size_t c = 1; c < centers.size(); ++c) {
            const double d = std::abs(p - centers[c]);
            if (d < best_d) {
                best_d = d;
                best = c;
            }
        }
        ++counts[best];
    }
    return counts;
}

}  // namespace oracle
