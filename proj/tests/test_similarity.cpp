#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "sdmm/similarity.hpp"

using Catch::Approx;
using namespace sdmm;

TEST_CASE("clustering a constant window is a single tight cluster") {
    const std::vector<double> w{5.0, 5.0, 5.0, 5.0};
    const auto clusters = cluster_quanta(std::span<const double>(w), 1);
    REQUIRE(clusters.size() == 1);
    CHECK(clusters[0].centroid == 5.0);
    CHECK(clusters[0].radius == 0.0);
    CHECK(clusters[0].cardinality == 4);
}

TEST_CASE("perfectly separated values split cleanly") {
    const std::vector<double> w{0.0, 0.0, 10.0, 10.0};
    const auto clusters = cluster_quanta(std::span<const double>(w), 2);
    REQUIRE(clusters.size() == 2);
    CHECK(clusters[0].centroid == 0.0);
    CHECK(clusters[0].cardinality == 2);
    CHECK(clusters[0].radius == 0.0);
    CHECK(clusters[1].centroid == 10.0);
    CHECK(clusters[1].cardinality == 2);
}

TEST_CASE("bimodal mixture recovers both modes") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> low(1.0, 0.1), high(9.0, 0.1);
    std::vector<double> w;
    for (int i = 0; i < 100; ++i) w.push_back(i % 2 == 0 ? low(rng) : high(rng));
    const auto clusters = cluster_quanta(std::span<const double>(w), 2);
    REQUIRE(clusters.size() == 2);
    CHECK(std::abs(clusters[0].centroid - 1.0) < 0.2);
    CHECK(std::abs(clusters[1].centroid - 9.0) < 0.2);
    CHECK(clusters[0].cardinality == 50);
    CHECK(clusters[1].cardinality == 50);

    // and the fit is as good as the exhaustive optimal two-way split
    const std::vector<double> centroids{clusters[0].centroid, clusters[1].centroid};
    CHECK(oracle::wcss(w, centroids) <= 1.05 * oracle::best_two_cluster_wcss(w) + 1e-9);
}

TEST_CASE("requesting more clusters than points degrades to singletons") {
    const std::vector<double> w{3.0, 1.0};
    const auto clusters = cluster_quanta(std::span<const double>(w), 5);
    REQUIRE(clusters.size() == 2);
    CHECK(clusters[0].centroid == 1.0);
    CHECK(clusters[1].centroid == 3.0);
    CHECK(clusters[0].cardinality == 1);
    CHECK(clusters[1].cardinality == 1);
}

TEST_CASE("clustering invariants hold on random windows") {
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> u(0.0, 50.0);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng() % 30;
        const std::size_t k = 1 + rng() % 5;
        std::vector<double> w(n);
        for (auto& v : w) v = u(rng);
        const auto clusters = cluster_quanta(std::span<const double>(w), k);

        std::size_t total = 0;
        for (const auto& c : clusters) total += c.cardinality;
        CHECK(total == n);
        CHECK(clusters.size() <= std::min(k, n));

        // every value lies within the radius of its nearest centroid, and
        // centroids sit inside their members' range
        for (double v : w) {
            std::size_t best = 0;
            double best_d = std::abs(v - clusters[0].centroid);
            for (std::size_t c = 1; c < clusters.size(); ++c) {
                const double d = std::abs(v - clusters[c].centroid);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            CHECK(best_d <= clusters[best].radius + 1e-9);
        }
    }
}

TEST_CASE("aggregation collapses clusters into one value") {
    SECTION("a single cluster is passed through") {
        const std::vector<QuantaCluster> cs{{0.5, 0.2, 7}};
        CHECK(aggregate_discrepancy(cs) == Approx(0.5));
    }
    SECTION("equal weights average the centroids") {
        const std::vector<QuantaCluster> cs{{1.0, 1.0, 5}, {3.0, 1.0, 5}};
        CHECK(aggregate_discrepancy(cs) == Approx(2.0));
    }
    SECTION("tight populated clusters dominate") {
        const std::vector<QuantaCluster> cs{{2.0, 0.5, 8}, {10.0, 2.0, 2}};
        // weights 16 and 1
        CHECK(aggregate_discrepancy(cs) == Approx(42.0 / 17.0).epsilon(0.0).margin(1e-12));
    }
    SECTION("result stays inside the centroid hull") {
        std::mt19937_64 rng(29);
        std::uniform_real_distribution<double> u(0.0, 20.0);
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<QuantaCluster> cs(1 + rng() % 4);
            double lo = 1e18, hi = -1e18;
            for (auto& c : cs) {
                c.centroid = u(rng);
                c.radius = u(rng) /
                           (trial % 3 == 0 ? 1e9 : 10.0);  // exercise the radius floor
                c.cardinality = 1 + rng() % 20;
                lo = std::min(lo, c.centroid);
                hi = std::max(hi, c.centroid);
            }
            const double agg = aggregate_discrepancy(cs);
            CHECK(agg >= lo - 1e-9);
            CHECK(agg <= hi + 1e-9);
        }
    }
    SECTION("no clusters is an error") {
        CHECK_THROWS_AS(aggregate_discrepancy(std::vector<QuantaCluster>{}),
                        std::invalid_argument);
    }
}

TEST_CASE("similarity sigmoid") {
    CHECK(similarity_score(17.5, 2.0, 35.0) == 0.5);  // midpoint: exponent is 0
    CHECK(similarity_score(0.0, 2.0, 35.0) == Approx(1.0).margin(1e-15));
    CHECK(similarity_score(25.0, 2.0, 35.0) == Approx(1.0 / (1.0 + std::exp(15.0))));
    // strictly decreasing
    double prev = similarity_score(0.0, 2.0, 35.0);
    for (double b = 1.0; b < 40.0; b += 1.0) {
        const double cur = similarity_score(b, 2.0, 35.0);
        CHECK(cur < prev);
        prev = cur;
    }
    // extreme aggregates stay finite
    CHECK(std::isfinite(similarity_score(1e9, 2.0, 35.0)));
    CHECK(similarity_score(1e9, 2.0, 35.0) >= 0.0);
}

TEST_CASE("mann-kendall on simple series") {
    SECTION("strictly increasing saturates S") {
        const std::vector<double> w{1.0, 2.0, 3.0, 4.0, 5.0};
        const auto r = mann_kendall(std::span<const double>(w), 1.0);
        CHECK(r.s == 10);
        CHECK(r.q == 5);
        CHECK(r.z > 0.0);
    }
    SECTION("all ties are trendless") {
        const std::vector<double> w{4.0, 4.0, 4.0, 4.0};
        const auto r = mann_kendall(std::span<const double>(w), 1.0);
        CHECK(r.s == 0);
        CHECK(r.z == 0.0);
    }
    SECTION("mixed series with a repeated value matches pair enumeration") {
        const std::vector<double> w{3.0, 1.0, 4.0, 1.0, 5.0};
        const auto r = mann_kendall(std::span<const double>(w), 1.0);
        CHECK(r.s == oracle::mann_kendall_s(w, 1.0));
        CHECK(r.s == 3);  // hand count over the ten pairs
    }
    SECTION("eta selects a suffix of the current length") {
        const std::vector<double> w{9.0, 1.0, 2.0, 3.0};
        const auto r = mann_kendall(std::span<const double>(w), 0.75);
        CHECK(r.q == 3);
        CHECK(r.s == 3);  // suffix {1,2,3}
    }
    SECTION("too little data is an error") {
        const std::vector<double> w{1.0, 2.0};
        CHECK_THROWS_AS(mann_kendall(std::span<const double>(w), 1.0), std::domain_error);
        const std::vector<double> longer{1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
        CHECK_THROWS_AS(mann_kendall(std::span<const double>(longer), 0.1),
                        std::domain_error);
    }
}

TEST_CASE("mann-kendall equals brute force on random tied windows") {
    std::mt19937_64 rng(37);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = 3 + rng() % 48;
        std::vector<double> w(n);
        for (auto& v : w) v = static_cast<double>(rng() % 8);  // plenty of ties
        const double eta = (trial % 2 == 0) ? 1.0 : 0.5 + (rng() % 50) / 100.0;
        if (static_cast<std::size_t>(std::ceil(eta * static_cast<double>(n))) < 3) continue;

        const auto r = mann_kendall(std::span<const double>(w), eta);
        const long long expected = oracle::mann_kendall_s(w, eta);
        CHECK(r.s == expected);
        // the continuity correction maps |S| <= 1 to Z = 0, so Z may be zero
        // for a non-zero S but never carries the opposite sign
        if (r.z > 0.0) CHECK(r.s > 0);
        if (r.z < 0.0) CHECK(r.s < 0);
        if (r.s == 0) CHECK(r.z == 0.0);
        if (std::abs(r.s) > 1) CHECK(r.z != 0.0);

        const auto literal = mann_kendall(std::span<const double>(w), eta, true);
        CHECK(literal.s == r.s);
        CHECK(((literal.z > 0) == (r.z > 0)));
        CHECK(((literal.z < 0) == (r.z < 0)));
    }
}

TEST_CASE("trend factor") {
    CHECK(trend_factor(0.0, 35.0) == 1.0);
    CHECK(trend_factor(0.02, 35.0) == Approx(std::exp(-0.7)));
    CHECK(trend_factor(-0.02, 35.0) == Approx(std::exp(0.7)));
    SECTION("reciprocal symmetry") {
        std::mt19937_64 rng(41);
        std::uniform_real_distribution<double> u(-5.0, 5.0);
        for (int i = 0; i < 200; ++i) {
            const double z = u(rng);
            CHECK(trend_factor(z, 35.0) * trend_factor(-z, 35.0) ==
                  Approx(1.0).epsilon(0.0).margin(1e-12));
        }
    }
    SECTION("huge trends stay finite") {
        CHECK(std::isfinite(trend_factor(-1e6, 35.0)));
        CHECK(std::isfinite(trend_factor(1e6, 35.0)));
    }
}

TEST_CASE("trend-adjusted score") {
    CHECK(trend_adjusted_score(0.5, 1.0) == 0.5);
    CHECK(trend_adjusted_score(0.5, 2.01375) == Approx(1.006875));  // may exceed 1
    CHECK(trend_adjusted_score(0.0, 123.0) == 0.0);
}

namespace {

DiscrepancyWindow window_from(const std::vector<double>& values, std::size_t capacity,
                              int local = 0, int peer = 0) {
    DiscrepancyWindow w(capacity, local, peer);
    for (double v : values) w.push(v);
    return w;
}

}  // namespace

TEST_CASE("similarity map construction") {
    SimilarityParams params;  // xi=2, zeta=35, zeta_hat=35, eta=1, C=3
    const std::size_t w_cap = 20;

    SECTION("identical windows tie and break by peer id") {
        std::map<int, DiscrepancyWindow> windows;
        const std::vector<double> values(w_cap, 2.5);
        windows.emplace(7, window_from(values, w_cap, 1, 7));
        windows.emplace(3, window_from(values, w_cap, 1, 3));
        const auto map = build_similarity_map(1, 5, windows, params);
        REQUIRE(map.ranked.size() == 2);
        CHECK(map.ranked[0].peer == 3);
        CHECK(map.ranked[1].peer == 7);
        CHECK(map.ranked[0].score == map.ranked[1].score);
        CHECK(map.owner == 1);
        CHECK(map.epoch == 5);
    }

    SECTION("low constant discrepancy beats high constant discrepancy") {
        std::map<int, DiscrepancyWindow> windows;
        windows.emplace(2, window_from(std::vector<double>(w_cap, 1.0), w_cap));
        windows.emplace(3, window_from(std::vector<double>(w_cap, 30.0), w_cap));
        const auto map = build_similarity_map(1, 1, windows, params);
        REQUIRE(map.ranked.size() == 2);
        CHECK(map.ranked[0].peer == 2);
        CHECK(map.ranked[0].similarity > 0.99);
        CHECK(map.ranked[1].similarity < 1e-6);
        CHECK(map.ranked[0].trend_factor == 1.0);  // constant series has no trend
    }

    SECTION("falling quanta outrank rising quanta of the same mean") {
        std::vector<double> rising, falling;
        for (std::size_t i = 0; i < w_cap; ++i) {
            const double v = 1.0 + 29.0 * static_cast<double>(i) / (w_cap - 1);
            rising.push_back(v);
            falling.push_back(31.0 - v);
        }
        std::map<int, DiscrepancyWindow> windows;
        windows.emplace(2, window_from(rising, w_cap));
        windows.emplace(3, window_from(falling, w_cap));
        const auto map = build_similarity_map(1, 1, windows, params);
        REQUIRE(map.ranked.size() == 2);
        CHECK(map.ranked[0].peer == 3);
        CHECK(map.ranked[0].trend_z < 0.0);
        CHECK(map.ranked[0].trend_factor > 1.0);
        CHECK(map.ranked[1].trend_z > 0.0);
    }

    SECTION("cold peers are omitted") {
        std::map<int, DiscrepancyWindow> windows;
        windows.emplace(2, window_from(std::vector<double>(w_cap, 1.0), w_cap));
        windows.emplace(3, window_from(std::vector<double>(3, 1.0), w_cap));
        const auto map = build_similarity_map(1, 1, windows, params);
        REQUIRE(map.ranked.size() == 1);
        CHECK(map.ranked[0].peer == 2);
    }

    SECTION("identical inputs build identical maps") {
        std::map<int, DiscrepancyWindow> windows;
        std::mt19937_64 rng(43);
        std::uniform_real_distribution<double> u(0.0, 10.0);
        for (int peer = 2; peer <= 6; ++peer) {
            std::vector<double> vals(w_cap);
            for (auto& v : vals) v = u(rng);
            windows.emplace(peer, window_from(vals, w_cap));
        }
        const auto a = build_similarity_map(1, 9, windows, params);
        const auto b = build_similarity_map(1, 9, windows, params);
        REQUIRE(a.ranked.size() == b.ranked.size());
        for (std::size_t i = 0; i < a.ranked.size(); ++i) {
            CHECK(a.ranked[i].peer == b.ranked[i].peer);
            CHECK(a.ranked[i].score == b.ranked[i].score);
            CHECK(a.ranked[i].trend_z == b.ranked[i].trend_z);
        }
    }
}

TEST_CASE("scaling all quanta up never increases similarity") {
    SimilarityParams params;
    params.cluster_count = 1;
    std::mt19937_64 rng(47);
    std::uniform_real_distribution<double> u(0.1, 5.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> vals(12);
        for (auto& v : vals) v = u(rng);
        const double lambda = 1.0 + u(rng);
        std::vector<double> scaled(vals);
        for (auto& v : scaled) v *= lambda;

        const auto base = cluster_quanta(std::span<const double>(vals), 1);
        const auto big = cluster_quanta(std::span<const double>(scaled), 1);
        const double agg_base = aggregate_discrepancy(base);
        const double agg_big = aggregate_discrepancy(big);
        CHECK(agg_big == Approx(lambda * agg_base));
        CHECK(similarity_score(agg_big, params.xi, params.zeta) <=
              similarity_score(agg_base, params.xi, params.zeta) + 1e-15);
    }
}
