#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sdmm {

inline void validate_data_vector(std::span<const double> x, std::size_t dim) {
    if (x.size() != dim) {
        throw std::invalid_argument("data vector dimension mismatch: got " +
                                    std::to_string(x.size()) + ", expected " +
                                    std::to_string(dim));
    }
    for (double v : x) {
        if (!std::isfinite(v)) throw std::invalid_argument("data vector has non-finite entry");
    }
}

// Additive micro-cluster summary: point count, per-dimension linear sum and
// per-dimension square sum.
struct ClusterFeature {
    std::size_t count = 0;
    std::vector<double> linear_sum;
    std::vector<double> square_sum;

    explicit ClusterFeature(std::size_t dim = 0)
        : linear_sum(dim, 0.0), square_sum(dim, 0.0) {}

    std::size_t dim() const { return linear_sum.size(); }

    void absorb(std::span<const double> x) {
        ++count;
        for (std::size_t d = 0; d < x.size(); ++d) {
            linear_sum[d] += x[d];
            square_sum[d] += x[d] * x[d];
        }
    }

    void merge(const ClusterFeature& other) {
        count += other.count;
        for (std::size_t d = 0; d < linear_sum.size(); ++d) {
            linear_sum[d] += other.linear_sum[d];
            square_sum[d] += other.square_sum[d];
        }
    }

    std::vector<double> centroid() const {
        std::vector<double> c(linear_sum.size());
        for (std::size_t d = 0; d < c.size(); ++d)
            c[d] = linear_sum[d] / static_cast<double>(count);
        return c;
    }

    // Root of the summed per-dimension variance; tiny negative variances from
    // cancellation are clamped to zero.
    double radius() const {
        double var = 0.0;
        const auto n = static_cast<double>(count);
        for (std::size_t d = 0; d < linear_sum.size(); ++d) {
            const double mean = linear_sum[d] / n;
            var += std::max(0.0, square_sum[d] / n - mean * mean);
        }
        return std::sqrt(var);
    }

    double centroid_distance(std::span<const double> x) const {
        double acc = 0.0;
        const auto n = static_cast<double>(count);
        for (std::size_t d = 0; d < x.size(); ++d) {
            const double diff = x[d] - linear_sum[d] / n;
            acc += diff * diff;
        }
        return std::sqrt(acc);
    }
};

// Cardinality floor for dominant clusters: median(sizes) - 3 * MAD(sizes).
inline double dominance_threshold_raw(std::span<const std::size_t> sizes) {
    if (sizes.empty()) throw std::invalid_argument("no clusters");
    std::vector<double> v(sizes.begin(), sizes.end());
    auto median = [](std::vector<double>& w) {
        std::sort(w.begin(), w.end());
        const std::size_t n = w.size();
        return n % 2 == 1 ? w[n / 2] : 0.5 * (w[n / 2 - 1] + w[n / 2]);
    };
    const double med = median(v);
    std::vector<double> dev(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) dev[i] = std::abs(v[i] - med);
    const double mad = median(dev);
    return med - 3.0 * mad;
}

// Floored to a valid count: a non-positive raw threshold selects every
// cluster anyway, and ceil() keeps the "at least this many points" reading
// exact for integer cardinalities.
inline std::size_t dominance_threshold(std::span<const std::size_t> sizes) {
    const double raw = dominance_threshold_raw(sizes);
    if (raw <= 1.0) return 1;
    return static_cast<std::size_t>(std::ceil(raw));
}

enum class SynopsisMode {
    DominantMean,     // count-weighted mean of dominant centroids, l = M
    DominantMeanStd,  // per-dimension mean then std over dominant clusters, l = 2M
};

struct Synopsis {
    std::vector<double> values;
    std::size_t epoch = 0;
};

// Flat-leaf micro-cluster tree. A point is absorbed into the nearest leaf if
// the leaf's radius stays within the absorb threshold, otherwise it opens a
// new leaf. With threshold <= 0 the tree calibrates itself from a warm-up
// batch: 0.1 times the root summed per-dimension variance of the first
// warmup_points points.
class CfTree {
public:
    explicit CfTree(std::size_t dim, double absorb_threshold = 0.0,
                    std::size_t warmup_points = 50, std::size_t branching_factor = 50)
        : dim_(dim),
          threshold_(absorb_threshold),
          threshold_fixed_(absorb_threshold > 0.0),
          warmup_points_(std::max<std::size_t>(2, warmup_points)),
          branching_factor_(branching_factor) {
        if (dim == 0) throw std::invalid_argument("tree dimension must be positive");
    }

    void insert(std::span<const double> x) {
        validate_data_vector(x, dim_);
        if (!threshold_fixed_) {
            pending_.insert(pending_.end(), x.begin(), x.end());
            if (pending_.size() / dim_ >= warmup_points_) flush_pending();
            return;
        }
        insert_into_leaves(x);
    }

    std::size_t total_points() const {
        return total_ + (threshold_fixed_ ? 0 : pending_.size() / dim_);
    }

    std::size_t dim() const { return dim_; }
    std::size_t branching_factor() const { return branching_factor_; }
    bool threshold_known() const { return threshold_fixed_; }
    double absorb_threshold() const { return threshold_; }

    // Leaves absorbed so far; forces warm-up calibration if still pending.
    const std::vector<ClusterFeature>& leaves() {
        if (!threshold_fixed_ && !pending_.empty()) flush_pending();
        return leaves_;
    }

    Synopsis extract(std::size_t epoch, SynopsisMode mode = SynopsisMode::DominantMean) {
        if (!threshold_fixed_ && !pending_.empty()) flush_pending();
        if (leaves_.empty()) throw std::logic_error("cannot extract synopsis from an empty tree");

        std::vector<std::size_t> sizes(leaves_.size());
        for (std::size_t i = 0; i < leaves_.size(); ++i) sizes[i] = leaves_[i].count;
        const std::size_t alpha = dominance_threshold(sizes);

        ClusterFeature merged(dim_);
        for (const auto& leaf : leaves_) {
            if (leaf.count >= alpha) merged.merge(leaf);
        }
        if (merged.count == 0) {
            // unreachable when alpha <= max leaf count; keep the largest leaf
            const auto it = std::max_element(
                leaves_.begin(), leaves_.end(),
                [](const ClusterFeature& a, const ClusterFeature& b) { return a.count < b.count; });
            merged = *it;
        }

        Synopsis s;
        s.epoch = epoch;
        const auto n = static_cast<double>(merged.count);
        s.values.resize(mode == SynopsisMode::DominantMean ? dim_ : 2 * dim_);
        for (std::size_t d = 0; d < dim_; ++d) {
            const double mean = merged.linear_sum[d] / n;
            s.values[d] = mean;
            if (mode == SynopsisMode::DominantMeanStd) {
                s.values[dim_ + d] =
                    std::sqrt(std::max(0.0, merged.square_sum[d] / n - mean * mean));
            }
        }
        return s;
    }

private:
    void insert_into_leaves(std::span<const double> x) {
        ++total_;
        if (leaves_.empty()) {
            new_leaf(x);
            return;
        }
        std::size_t best = 0;
        double best_dist = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < leaves_.size(); ++i) {
            const double d = leaves_[i].centroid_distance(x);
            if (d < best_dist) {
                best_dist = d;
                best = i;
            }
        }
        ClusterFeature probe = leaves_[best];
        probe.absorb(x);
        if (probe.radius() <= threshold_) {
            leaves_[best] = std::move(probe);
        } else {
            new_leaf(x);
        }
    }

    void new_leaf(std::span<const double> x) {
        ClusterFeature cf(dim_);
        cf.absorb(x);
        leaves_.push_back(std::move(cf));
    }

    void flush_pending() {
        const std::size_t n = pending_.size() / dim_;
        if (n == 0) {
            threshold_fixed_ = true;
            return;
        }
        // summed per-dimension sample variance of the warm-up batch
        double var_total = 0.0;
        for (std::size_t d = 0; d < dim_; ++d) {
            double sum = 0.0, sq = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double v = pending_[i * dim_ + d];
                sum += v;
                sq += v * v;
            }
            const double mean = sum / static_cast<double>(n);
            if (n > 1) {
                var_total += std::max(
                    0.0, (sq - mean * sum) / static_cast<double>(n - 1));
            }
        }
        threshold_ = 0.1 * std::sqrt(var_total);
        if (!(threshold_ > 0.0)) threshold_ = 1e-12;  // constant warm-up batch
        threshold_fixed_ = true;
        for (std::size_t i = 0; i < n; ++i) {
            insert_into_leaves(std::span<const double>(pending_.data() + i * dim_, dim_));
        }
        pending_.clear();
        pending_.shrink_to_fit();
    }

    std::size_t dim_;
    double threshold_;
    bool threshold_fixed_;
    std::size_t warmup_points_;
    std::size_t branching_factor_;  // reserved for a hierarchical layout
    std::vector<double> pending_;   // row-major warm-up buffer
    std::vector<ClusterFeature> leaves_;
    std::size_t total_ = 0;
};

}  // namespace sdmm
