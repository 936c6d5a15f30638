#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <iostream>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdmm/discrepancy.hpp"

namespace sdmm {

// One group of discrepancy quanta: centroid, distance to the farthest
// member, and member count.
struct QuantaCluster {
    double centroid = 0.0;
    double radius = 0.0;
    std::size_t cardinality = 0;
};

namespace detail {

// Interval sum-of-squared-deviations over sorted values via prefix sums.
class IntervalCost {
public:
    explicit IntervalCost(std::span<const double> sorted)
        : sum_(sorted.size() + 1, 0.0), sq_(sorted.size() + 1, 0.0) {
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            sum_[i + 1] = sum_[i] + sorted[i];
            sq_[i + 1] = sq_[i] + sorted[i] * sorted[i];
        }
    }

    // SSE of sorted[a, b)
    double operator()(std::size_t a, std::size_t b) const {
        const auto cnt = static_cast<double>(b - a);
        if (cnt <= 0.0) return 0.0;
        const double s = sum_[b] - sum_[a];
        return std::max(0.0, (sq_[b] - sq_[a]) - s * s / cnt);
    }

private:
    std::vector<double> sum_;
    std::vector<double> sq_;
};

// One DP layer with the classic divide-and-conquer speedup: the optimal
// split point is monotone in the right endpoint.
inline void kmeans_layer(const IntervalCost& cost, const std::vector<double>& prev,
                         std::vector<double>& cur, std::vector<std::size_t>& cut,
                         std::size_t lo, std::size_t hi, std::size_t opt_lo,
                         std::size_t opt_hi) {
    if (lo > hi) return;
    const std::size_t mid = lo + (hi - lo) / 2;
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_j = opt_lo;
    const std::size_t j_hi = std::min(opt_hi, mid);
    for (std::size_t j = opt_lo; j <= j_hi; ++j) {
        const double c = prev[j] + cost(j, mid);
        if (c < best) {  // strict: ties keep the smallest split
            best = c;
            best_j = j;
        }
    }
    cur[mid] = best;
    cut[mid] = best_j;
    if (mid > lo) kmeans_layer(cost, prev, cur, cut, lo, mid - 1, opt_lo, best_j);
    if (mid < hi) kmeans_layer(cost, prev, cur, cut, mid + 1, hi, best_j, opt_hi);
}

}  // namespace detail

// Clusters the window's quanta values (their order is irrelevant: the
// window is treated as a value distribution). In one dimension the optimal
// k-means partition is contiguous over the sorted values, so it is computed
// exactly by dynamic programming; the result is deterministic and at most k
// non-empty clusters, sorted by centroid. Duplicated values may collapse
// clusters, so fewer than k can come back.
inline std::vector<QuantaCluster> cluster_quanta(std::span<const double> quanta,
                                                 std::size_t k) {
    if (k == 0) throw std::invalid_argument("cluster count must be positive");
    const std::size_t n = quanta.size();
    if (n == 0) throw std::invalid_argument("cannot cluster an empty window");
    k = std::min(k, n);

    std::vector<double> sorted(quanta.begin(), quanta.end());
    std::sort(sorted.begin(), sorted.end());
    const detail::IntervalCost cost(sorted);

    // layer c holds the best cost of splitting sorted[0, i) into c+1 groups
    std::vector<double> prev(n + 1), cur(n + 1);
    std::vector<std::vector<std::size_t>> cuts(k, std::vector<std::size_t>(n + 1, 0));
    for (std::size_t i = 0; i <= n; ++i) prev[i] = cost(0, i);
    for (std::size_t layer = 1; layer < k; ++layer) {
        detail::kmeans_layer(cost, prev, cur, cuts[layer], 0, n, 0, n);
        std::swap(prev, cur);
    }

    std::vector<std::size_t> bounds;  // interval ends, innermost first
    std::size_t end = n;
    for (std::size_t layer = k; layer-- > 1;) {
        bounds.push_back(end);
        end = cuts[layer][end];
    }
    bounds.push_back(end);

    std::vector<QuantaCluster> out;
    std::size_t begin = 0;
    for (auto it = bounds.rbegin(); it != bounds.rend(); ++it) {
        const std::size_t stop = *it;
        if (stop == begin) continue;  // empty interval from duplicate values
        QuantaCluster qc;
        qc.cardinality = stop - begin;
        double sum = 0.0;
        for (std::size_t i = begin; i < stop; ++i) sum += sorted[i];
        qc.centroid = sum / static_cast<double>(qc.cardinality);
        qc.radius = std::max(qc.centroid - sorted[begin], sorted[stop - 1] - qc.centroid);
        out.push_back(qc);
        begin = stop;
    }
    return out;
}

inline std::vector<QuantaCluster> cluster_quanta(const DiscrepancyWindow& window,
                                                 std::size_t k) {
    const auto v = window.values();
    return cluster_quanta(std::span<const double>(v), k);
}

// Collapses a clustering into one discrepancy value: centroids weighted by
// cardinality over radius, so tight well-populated clusters dominate. The
// radius floor keeps singleton clusters influential but finite.
inline double aggregate_discrepancy(std::span<const QuantaCluster> clusters,
                                    double radius_floor = 1e-6) {
    if (clusters.empty()) throw std::invalid_argument("no clusters to aggregate");
    double weight_total = 0.0;
    for (const auto& c : clusters) {
        weight_total += static_cast<double>(c.cardinality) / std::max(c.radius, radius_floor);
    }
    double acc = 0.0;
    for (const auto& c : clusters) {
        const double w =
            static_cast<double>(c.cardinality) / std::max(c.radius, radius_floor);
        acc += c.centroid * (w / weight_total);
    }
    return acc;
}

namespace detail {
inline double clamped_exp(double x) { return std::exp(std::clamp(x, -700.0, 700.0)); }
}  // namespace detail

// Sigmoid map from aggregated discrepancy to similarity in (0,1):
// 1 / (1 + e^(xi*agg - zeta)). Strictly decreasing in the aggregate.
inline double similarity_score(double aggregated, double xi, double zeta) {
    return 1.0 / (1.0 + detail::clamped_exp(xi * aggregated - zeta));
}

struct TrendResult {
    long long s = 0;    // concordant-minus-discordant pair count
    double z = 0.0;     // normalized statistic; positive means rising quanta
    std::size_t q = 0;  // analyzed suffix length
};

// Mann-Kendall trend test over the most recent ceil(eta * length) quanta,
// with the tie-corrected variance. With literal_z the normalization divides
// by the variance itself instead of its square root; the sign is unchanged.
inline TrendResult mann_kendall(std::span<const double> series, double eta,
                                bool literal_z = false) {
    if (!(eta > 0.0) || eta > 1.0) throw std::invalid_argument("eta must be in (0, 1]");
    const auto q = static_cast<std::size_t>(
        std::ceil(eta * static_cast<double>(series.size())));
    if (q < 3) throw std::domain_error("insufficient trend data: need at least 3 quanta");
    const std::span<const double> suffix = series.subspan(series.size() - q);

    long long s = 0;
    for (std::size_t i = 0; i + 1 < q; ++i) {
        for (std::size_t j = i + 1; j < q; ++j) {
            if (suffix[j] > suffix[i])
                ++s;
            else if (suffix[j] < suffix[i])
                --s;
        }
    }

    std::vector<double> sorted(suffix.begin(), suffix.end());
    std::sort(sorted.begin(), sorted.end());
    double tie_term = 0.0;
    for (std::size_t i = 0; i < q;) {
        std::size_t j = i + 1;
        while (j < q && sorted[j] == sorted[i]) ++j;
        const auto t = static_cast<double>(j - i);
        if (t > 1.0) tie_term += t * (t - 1.0) * (2.0 * t + 5.0);
        i = j;
    }
    const auto qd = static_cast<double>(q);
    const double variance = (qd * (qd - 1.0) * (2.0 * qd + 5.0) - tie_term) / 18.0;

    TrendResult r;
    r.s = s;
    r.q = q;
    if (s != 0) {
        assert(variance > 0.0);  // zero variance requires all-tied values, i.e. s == 0
        const double denom = literal_z ? variance : std::sqrt(variance);
        r.z = (s > 0 ? static_cast<double>(s) - 1.0 : static_cast<double>(s) + 1.0) / denom;
    }
    return r;
}

inline TrendResult mann_kendall(const DiscrepancyWindow& window, double eta,
                                bool literal_z = false) {
    const auto v = window.values();
    return mann_kendall(std::span<const double>(v), eta, literal_z);
}

// Trend correction factor: e^(-zeta_hat * z). Above 1 for falling quanta,
// below 1 for rising ones, exactly 1 with no trend.
inline double trend_factor(double z, double zeta_hat) {
    return detail::clamped_exp(-zeta_hat * z);
}

// Final ranking score. Deliberately not clipped to [0,1]: the score is only
// compared, and clipping would merge high-similarity falling-trend peers.
inline double trend_adjusted_score(double similarity, double factor) {
    return factor * similarity;
}

struct SimilarityParams {
    double xi = 2.0;
    double zeta = 35.0;
    double zeta_hat = 35.0;
    double eta = 1.0;
    std::size_t cluster_count = 3;
    bool mkm_literal = false;
    double radius_floor = 1e-6;
};

struct PeerSimilarity {
    int peer = 0;
    double aggregated = 0.0;    // cluster-weighted window discrepancy
    double similarity = 0.0;    // sigmoid of the aggregate, in (0,1)
    double trend_z = 0.0;       // Mann-Kendall statistic on the window suffix
    double trend_factor = 1.0;  // e^(-zeta_hat * trend_z)
    double score = 0.0;         // trend_factor * similarity, the ranking key
};

struct SimilarityMap {
    int owner = 0;
    std::size_t epoch = 0;
    std::vector<PeerSimilarity> ranked;  // score descending, peer id ascending on ties
};

inline PeerSimilarity score_window(int peer, const DiscrepancyWindow& window,
                                   const SimilarityParams& p) {
    const auto values = window.values();
    const auto clusters = cluster_quanta(std::span<const double>(values), p.cluster_count);
    PeerSimilarity ps;
    ps.peer = peer;
    ps.aggregated = aggregate_discrepancy(clusters, p.radius_floor);
    ps.similarity = similarity_score(ps.aggregated, p.xi, p.zeta);
    const TrendResult trend =
        mann_kendall(std::span<const double>(values), p.eta, p.mkm_literal);
    ps.trend_z = trend.z;
    ps.trend_factor = sdmm::trend_factor(trend.z, p.zeta_hat);
    ps.score = trend_adjusted_score(ps.similarity, ps.trend_factor);
    return ps;
}

// Scores every warm peer and sorts. Peers whose window cannot be analyzed
// yet are left out; scoring failures skip the peer rather than the map.
inline SimilarityMap build_similarity_map(int owner, std::size_t epoch,
                                          const std::map<int, DiscrepancyWindow>& windows,
                                          const SimilarityParams& p) {
    SimilarityMap map;
    map.owner = owner;
    map.epoch = epoch;
    for (const auto& [peer, window] : windows) {
        if (!window.warm(p.eta)) continue;
        try {
            map.ranked.push_back(score_window(peer, window, p));
        } catch (const std::exception& e) {
            std::clog << "similarity: skipping peer " << peer << " for node " << owner
                      << " at epoch " << epoch << ": " << e.what() << '\n';
        }
    }
    std::sort(map.ranked.begin(), map.ranked.end(),
              [](const PeerSimilarity& a, const PeerSimilarity& b) {
                  if (a.score != b.score) return a.score > b.score;
                  return a.peer < b.peer;
              });
    return map;
}

}  // namespace sdmm
