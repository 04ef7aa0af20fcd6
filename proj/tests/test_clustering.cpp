#include "kbbbc/clustering.hpp"
#include "support/reference.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <limits>
#include <numeric>

using namespace kbbbc;

namespace {

PointSet line(std::initializer_list<double> xs) {
    PointSet p(1);
    for (double x : xs) {
        p.push_back(Point{x});
    }
    return p;
}

}  // namespace

TEST(KMeans, SeparatedPairs) {
    const auto pts = line({0.1, 0.11, 0.9, 0.91});
    RngStream r(1);
    const auto a = kmeans(pts, 2, r);
    EXPECT_TRUE(a.converged);
    EXPECT_EQ(a.labels[0], a.labels[1]);
    EXPECT_EQ(a.labels[2], a.labels[3]);
    EXPECT_NE(a.labels[0], a.labels[2]);
    std::vector<double> centers = {a.centers.row(0)[0], a.centers.row(1)[0]};
    std::sort(centers.begin(), centers.end());
    EXPECT_NEAR(centers[0], 0.105, 1e-12);
    EXPECT_NEAR(centers[1], 0.905, 1e-12);
}

TEST(KMeans, SingletonPartition) {
    const auto pts = line({0.3, 0.1, 0.7, 0.2, 0.9});
    RngStream r(4);
    const auto a = kmeans(pts, 5, r);
    auto sizes = a.cluster_sizes();
    EXPECT_TRUE(std::all_of(sizes.begin(), sizes.end(), [](std::size_t s) { return s == 1; }));
}

TEST(KMeans, RejectsBadK) {
    const auto pts = line({0.0, 1.0});
    RngStream r(0);
    EXPECT_THROW(kmeans(pts, 0, r), ConfigError);
    EXPECT_THROW(kmeans(pts, 3, r), ConfigError);
    EXPECT_THROW(kmedoids(pts, 3, r), ConfigError);
}

TEST(KMeans, RecoversTightBlobs) {
    ref::Gen g(2024);
    std::vector<std::size_t> truth;
    const auto pts = g.blobs(ref::unit_square_corners(), 50, 0.01, truth);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        RngStream r(seed);
        const auto a = kmeans(pts, 4, r);
        EXPECT_TRUE(ref::same_partition(a.labels, truth)) << "seed " << seed;
    }
}

TEST(KMeans, MatchesNaiveLloydFromSameSeeds) {
    ref::Gen g(99);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t dim = std::vector<std::size_t>{1, 2, 3, 4}[trial % 4];
        const std::size_t k = g.size(2, 6);
        std::vector<Point> centers = g.point_list(k, dim, -10.0, 10.0);
        std::vector<std::size_t> truth;
        const auto pts = g.blobs(centers, g.size(5, 40), 0.8, truth);

        RngStream r(trial);
        RngStream seed_copy = r;
        const auto seeds = detail::plus_plus_seeds(pts, k, seed_copy);
        PointSet start(dim);
        for (auto s : seeds) {
            start.push_back(pts.row(s));
        }
        const auto expected = ref::naive_lloyd(pts, start, default_max_iters);
        const auto got = kmeans(pts, k, r);
        // The reference has no empty-cluster repair; only compare when it kept all k clusters.
        std::vector<std::size_t> used(expected.begin(), expected.end());
        std::sort(used.begin(), used.end());
        used.erase(std::unique(used.begin(), used.end()), used.end());
        if (used.size() == k) {
            EXPECT_EQ(got.labels, expected) << "trial " << trial;
        }
    }
}

TEST(KMeans, CentersAreExactMeansProperty) {
    ref::Gen g(5);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t dim = g.size(1, 5);
        const std::size_t n = g.size(2, 120);
        const std::size_t k = g.size(1, std::min<std::size_t>(n, 12));
        const auto pts = g.points(n, dim);
        RngStream r(trial);
        const auto a = kmeans(pts, k, r);
        ASSERT_EQ(a.labels.size(), n);
        const auto sizes = a.cluster_sizes();
        for (std::size_t c = 0; c < k; ++c) {
            ASSERT_GE(sizes[c], 1u) << "trial " << trial;
            for (std::size_t t = 0; t < dim; ++t) {
                double sum = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    if (a.labels[i] == c) {
                        sum += pts.row(i)[t];
                    }
                }
                const double mean = sum / static_cast<double>(sizes[c]);
                EXPECT_NEAR(a.centers.row(c)[t], mean, 1e-12 * std::max(1.0, std::abs(mean)));
            }
        }
    }
}

TEST(KMeans, DuplicatePointsStillFillEveryCluster) {
    const auto pts = line({0.5, 0.5, 0.5, 0.5, 0.2});
    RngStream r(8);
    const auto a = kmeans(pts, 3, r);
    for (auto s : a.cluster_sizes()) {
        EXPECT_GE(s, 1u);
    }
}

TEST(KMeans, PermutedInputSamePartition) {
    ref::Gen g(31);
    std::vector<std::size_t> truth;
    const auto pts = g.blobs({{0.0, 0.0}, {5.0, 0.0}, {0.0, 5.0}}, 30, 0.3, truth);
    std::vector<std::size_t> perm(pts.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), g.eng);
    PointSet shuffled(2);
    for (auto i : perm) {
        shuffled.push_back(pts.row(i));
    }
    RngStream r1(3);
    RngStream r2(3);
    const auto a = kmeans(pts, 3, r1);
    const auto b = kmeans(shuffled, 3, r2);
    std::vector<std::size_t> back(pts.size());
    for (std::size_t j = 0; j < perm.size(); ++j) {
        back[perm[j]] = b.labels[j];
    }
    EXPECT_TRUE(ref::same_partition(a.labels, back));
}

TEST(KMedoids, MedoidsAreDataPoints) {
    const auto pts = line({0.0, 0.1, 1.0});
    RngStream r(2);
    const auto a = kmedoids(pts, 2, r);
    ASSERT_EQ(a.medoid_indices.size(), 2u);
    for (std::size_t c = 0; c < 2; ++c) {
        EXPECT_EQ(a.centers.point(c), pts.point(a.medoid_indices[c]));
    }
    RngStream r2(2);
    const auto all = kmedoids(pts, 3, r2);
    std::vector<std::size_t> idx = all.medoid_indices;
    std::sort(idx.begin(), idx.end());
    EXPECT_EQ(idx, (std::vector<std::size_t>{0, 1, 2}));
}

TEST(KMedoids, BlobMedoidsInsideTheirBlob) {
    ref::Gen g(7);
    std::vector<std::size_t> truth;
    const auto corners = ref::unit_square_corners();
    const auto pts = g.blobs(corners, 50, 0.01, truth);
    RngStream r(1);
    const auto a = kmedoids(pts, 4, r);
    EXPECT_TRUE(ref::same_partition(a.labels, truth));
    for (std::size_t c = 0; c < 4; ++c) {
        const auto blob = truth[a.medoid_indices[c]];
        EXPECT_LT(ref::sq(a.centers.row(c), corners[blob]), 0.05 * 0.05);
    }
}

TEST(KMedoids, PairsMatchExhaustivePartition) {
    const auto pts = line({0.05, 0.07, 0.31, 0.34, 0.52, 0.55, 0.90, 0.93});
    std::vector<std::size_t> best;
    const double best_cost = ref::brute_kmedoids_cost(pts, 4, &best);
    EXPECT_TRUE(ref::same_partition(best, {0, 0, 1, 1, 2, 2, 3, 3}));
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        RngStream r(seed);
        const auto a = kmedoids(pts, 4, r);
        EXPECT_TRUE(ref::same_partition(a.labels, best)) << "seed " << seed;
        double cost = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            cost += ref::sq(pts.row(i), a.centers.row(a.labels[i]));
        }
        EXPECT_NEAR(cost, best_cost, 1e-15);
    }
}

TEST(KMedoids, CentersInInputSetProperty) {
    ref::Gen g(13);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = g.size(1, 60);
        const auto pts = g.points(n, g.size(1, 4));
        const std::size_t k = g.size(1, std::min<std::size_t>(n, 8));
        RngStream r(trial);
        const auto a = kmedoids(pts, k, r);
        for (std::size_t c = 0; c < k; ++c) {
            ASSERT_EQ(a.centers.point(c), pts.point(a.medoid_indices[c]));
            ASSERT_EQ(a.labels[a.medoid_indices[c]], c);
        }
        for (auto s : a.cluster_sizes()) {
            ASSERT_GE(s, 1u);
        }
    }
}

TEST(KMedoids, NoSingleSwapImprovesProperty) {
    ref::Gen g(23);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t n = g.size(3, 30);
        const auto pts = g.points(n, g.size(1, 3));
        const std::size_t k = g.size(1, std::min<std::size_t>(n - 1, 6));
        RngStream r(trial);
        const auto a = kmedoids(pts, k, r);
        auto cost = [&](const std::vector<std::size_t>& med) {
            double total = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double best = std::numeric_limits<double>::infinity();
                for (auto m : med) {
                    best = std::min(best, ref::sq(pts.row(i), pts.row(m)));
                }
                total += best;
            }
            return total;
        };
        const double current = cost(a.medoid_indices);
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t c = 0; c < n; ++c) {
                auto med = a.medoid_indices;
                med[i] = c;
                ASSERT_GE(cost(med), current * (1.0 - 1e-9)) << "trial " << trial;
            }
        }
    }
}

TEST(Silhouette, WellSeparated) {
    const auto pts = line({0.0, 0.01, 10.0, 10.01});
    EXPECT_GT(silhouette_score(pts, std::vector<std::size_t>{0, 0, 1, 1}), 0.99);
}

TEST(Silhouette, IdenticalPointsScoreZero) {
    const auto pts = line({0.5, 0.5, 0.5, 0.5});
    EXPECT_DOUBLE_EQ(silhouette_score(pts, std::vector<std::size_t>{0, 0, 1, 1}), 0.0);
}

TEST(Silhouette, NaturalPairsBeatShiftedPairs) {
    PointSet pts(1);
    std::vector<std::size_t> natural;
    std::vector<std::size_t> shifted;
    for (std::size_t i = 0; i < 24; ++i) {
        // pairs of close points separated by wider gaps
        pts.push_back(Point{static_cast<double>(i / 2) + 0.2 * static_cast<double>(i % 2)});
        natural.push_back(i / 2);
        shifted.push_back(((i + 1) / 2) % 12);
    }
    const double a = silhouette_score(pts, natural);
    const double b = silhouette_score(pts, shifted);
    EXPECT_GT(a, b);
    EXPECT_NEAR(a, ref::brute_silhouette(pts, natural), 1e-12);
    EXPECT_NEAR(b, ref::brute_silhouette(pts, shifted), 1e-12);
}

TEST(Silhouette, SingleClusterRejected) {
    const auto pts = line({0.0, 1.0});
    EXPECT_THROW(silhouette_score(pts, std::vector<std::size_t>{0, 0}), ContractViolation);
}

TEST(Silhouette, MatchesDefinitionAndStaysInRangeProperty) {
    ref::Gen g(17);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = g.size(2, 40);
        const auto pts = g.points(n, g.size(1, 4), -5.0, 5.0);
        const std::size_t k = g.size(2, n);
        std::vector<std::size_t> labels(n);
        for (std::size_t i = 0; i < n; ++i) {
            labels[i] = i < k ? i : g.size(0, k - 1);
        }
        const double s = silhouette_score(pts, labels);
        ASSERT_GE(s, -1.0);
        ASSERT_LE(s, 1.0);
        ASSERT_NEAR(s, ref::brute_silhouette(pts, labels), 1e-12) << "trial " << trial;
    }
}

TEST(SilhouetteCurve, PeaksAtMForSeparatedPoints) {
    const auto pts = line({0.1, 0.4, 0.7, 0.95});
    const auto curve = silhouette_curve(pts, 4, RngStream(3));
    ASSERT_EQ(curve.scores.size(), 3u);
    EXPECT_EQ(curve.best_k(), 4u);
}

TEST(SilhouetteCurve, NearCoincidentPairGivesPlateau) {
    const auto pts = line({0.1, 0.4, 0.7, 0.7 + 1e-9});
    const auto curve = silhouette_curve(pts, 4, RngStream(3));
    EXPECT_NEAR(curve.at(3), curve.at(4), 1e-6);
    EXPECT_GT(curve.at(3), curve.at(2));
}

TEST(SilhouetteCurve, TwoPointRange) {
    const auto pts = line({0.1, 0.9, 0.95});
    const auto curve = silhouette_curve(pts, 2, RngStream(1));
    EXPECT_EQ(curve.scores.size(), 1u);
    EXPECT_THROW(silhouette_curve(pts, 1, RngStream(1)), ConfigError);
    EXPECT_THROW(silhouette_curve(pts, 4, RngStream(1)), ConfigError);
}
