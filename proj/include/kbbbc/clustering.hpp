#pragma once

#include "kbbbc/core.hpp"
#include "kbbbc/rng.hpp"

#include <algorithm>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

namespace kbbbc {

/// Partition of a point set. `centers` holds means (k-means) or medoids
/// (k-medoids); for k-medoids `medoid_indices[c]` is the input row of center c.
struct ClusterAssignment {
    std::size_t k = 0;
    std::vector<std::size_t> labels;
    PointSet centers;
    std::vector<std::size_t> medoid_indices;
    std::size_t iterations = 0;
    bool converged = false;

    std::vector<std::size_t> cluster_sizes() const {
        std::vector<std::size_t> sizes(k, 0);
        for (auto label : labels) {
            ++sizes[label];
        }
        return sizes;
    }

    std::vector<std::vector<std::size_t>> members() const {
        std::vector<std::vector<std::size_t>> out(k);
        for (std::size_t i = 0; i < labels.size(); ++i) {
            out[labels[i]].push_back(i);
        }
        return out;
    }
};

inline constexpr std::size_t default_max_iters = 200;

namespace detail {

inline void check_cluster_request(const PointSet& points, std::size_t k, const char* who) {
    if (k == 0) {
        throw ConfigError(std::string(who) + ": k must be >= 1");
    }
    if (k > points.size()) {
        throw ConfigError(std::string(who) + ": k = " + std::to_string(k) + " exceeds the " +
                          std::to_string(points.size()) + " available points");
    }
}

/// k-means++ seeding; returns k distinct row indices.
inline std::vector<std::size_t> plus_plus_seeds(const PointSet& points, std::size_t k, RngStream& rng) {
    const std::size_t n = points.size();
    std::vector<std::size_t> seeds;
    seeds.reserve(k);
    std::vector<char> chosen(n, 0);
    std::vector<double> nearest(n, std::numeric_limits<double>::infinity());

    auto take = [&](std::size_t idx) {
        seeds.push_back(idx);
        chosen[idx] = 1;
        const auto c = points.row(idx);
        for (std::size_t i = 0; i < n; ++i) {
            nearest[i] = std::min(nearest[i], squared_distance(points.row(i), c));
        }
    };

    take(static_cast<std::size_t>(rng.index(n)));
    while (seeds.size() < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!chosen[i]) {
                total += nearest[i];
            }
        }
        std::size_t pick = n;
        if (total > 0.0) {
            const double target = rng.uniform01() * total;
            double acc = 0.0;
            std::size_t last_positive = n;
            for (std::size_t i = 0; i < n; ++i) {
                if (chosen[i] || nearest[i] <= 0.0) {
                    continue;
                }
                last_positive = i;
                acc += nearest[i];
                if (acc > target) {
                    pick = i;
                    break;
                }
            }
            if (pick == n) {
                pick = last_positive;  // rounding in the running sum
            }
        } else {
            // Fewer distinct locations than k: fall back to a uniform draw.
            std::vector<std::size_t> rest;
            for (std::size_t i = 0; i < n; ++i) {
                if (!chosen[i]) {
                    rest.push_back(i);
                }
            }
            pick = rest[static_cast<std::size_t>(rng.index(rest.size()))];
        }
        take(pick);
    }
    return seeds;
}

/// Nearest-center labels; ties go to the lowest center index.
inline void assign_nearest(const PointSet& points, const PointSet& centers, std::vector<std::size_t>& labels,
                           std::vector<double>& dist) {
    const std::size_t n = points.size();
    const std::size_t k = centers.size();
    const std::size_t dim = points.dim();
    const double* c = centers.values().data();
    const double* p = points.values().data();
    labels.resize(n);
    dist.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* pi = p + i * dim;
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_c = 0;
        for (std::size_t j = 0; j < k; ++j) {
            const double* cj = c + j * dim;
            double d2 = 0.0;
            for (std::size_t t = 0; t < dim; ++t) {
                const double diff = pi[t] - cj[t];
                d2 += diff * diff;
            }
            if (d2 < best) {
                best = d2;
                best_c = j;
            }
        }
        labels[i] = best_c;
        dist[i] = best;
    }
}

/// Moves the point farthest from its own center into each empty cluster.
/// Returns the rows that were moved, in cluster order.
inline std::vector<std::size_t> repair_empty_clusters(const PointSet& points, PointSet& centers,
                                                      std::vector<std::size_t>& labels, std::vector<double>& dist) {
    const std::size_t k = centers.size();
    std::vector<std::size_t> sizes(k, 0);
    for (auto label : labels) {
        ++sizes[label];
    }
    std::vector<std::size_t> moved;
    for (std::size_t c = 0; c < k; ++c) {
        if (sizes[c] != 0) {
            continue;
        }
        std::size_t far = points.size();
        double far_dist = -1.0;
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (sizes[labels[i]] > 1 && dist[i] > far_dist) {
                far_dist = dist[i];
                far = i;
            }
        }
        --sizes[labels[far]];
        labels[far] = c;
        sizes[c] = 1;
        dist[far] = 0.0;
        std::copy_n(points.row(far).begin(), points.dim(), centers.row(c).begin());
        moved.push_back(far);
    }
    return moved;
}

inline void compute_means(const PointSet& points, const std::vector<std::size_t>& labels, PointSet& centers) {
    const std::size_t k = centers.size();
    const std::size_t dim = points.dim();
    std::vector<double> sums(k * dim, 0.0);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto row = points.row(i);
        double* s = sums.data() + labels[i] * dim;
        for (std::size_t t = 0; t < dim; ++t) {
            s[t] += row[t];
        }
        ++counts[labels[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] == 0) {
            continue;
        }
        auto out = centers.row(c);
        for (std::size_t t = 0; t < dim; ++t) {
            out[t] = sums[c * dim + t] / static_cast<double>(counts[c]);
        }
    }
}

}  // namespace detail

namespace detail {

/// Body of kmeans; `Dim` fixes the dimension at compile time (0 = runtime).
template <std::size_t Dim>
ClusterAssignment kmeans_impl(const PointSet& points, std::size_t k, RngStream& rng, std::size_t max_iters) {
    const std::size_t n = points.size();
    const std::size_t dim = Dim == 0 ? points.dim() : Dim;
    ClusterAssignment out;
    out.k = k;
    out.centers = PointSet(dim);
    for (auto idx : plus_plus_seeds(points, k, rng)) {
        out.centers.push_back(points.row(idx));
    }

    const double* p = points.values().data();
    std::vector<double> upper(n);
    std::vector<double> lower(n);
    std::vector<double> half_gap(k);
    std::vector<double> shift(k);
    std::vector<double> sq(n);

    auto dist = [&](std::size_t i, std::size_t j) {
        const double* a = p + i * dim;
        const double* c = out.centers.values().data() + j * dim;
        double d2 = 0.0;
        for (std::size_t t = 0; t < dim; ++t) {
            const double diff = a[t] - c[t];
            d2 += diff * diff;
        }
        return d2;
    };
    // Half the distance from each center to its nearest other center.
    auto refresh_gaps = [&] {
        const double* c = out.centers.values().data();
        std::fill(half_gap.begin(), half_gap.end(), std::numeric_limits<double>::infinity());
        for (std::size_t j = 0; j < k; ++j) {
            for (std::size_t o = j + 1; o < k; ++o) {
                double d2 = 0.0;
                for (std::size_t t = 0; t < dim; ++t) {
                    const double diff = c[j * dim + t] - c[o * dim + t];
                    d2 += diff * diff;
                }
                half_gap[j] = std::min(half_gap[j], d2);
                half_gap[o] = std::min(half_gap[o], d2);
            }
        }
        for (auto& h : half_gap) {
            h = 0.5 * std::sqrt(h);
        }
    };
    // Full scan: nearest center (lowest index on ties) and the distance to
    // the second nearest.
    auto scan = [&](std::size_t i) {
        double best = std::numeric_limits<double>::infinity();
        double second = best;
        std::size_t best_c = 0;
        for (std::size_t j = 0; j < k; ++j) {
            const double d2 = dist(i, j);
            if (d2 < best) {
                second = best;
                best = d2;
                best_c = j;
            } else if (d2 < second) {
                second = d2;
            }
        }
        out.labels[i] = best_c;
        upper[i] = std::sqrt(best);
        lower[i] = std::sqrt(second);
    };
    // Refill empty clusters; moved points get bounds that force a rescan.
    auto repair = [&] {
        std::vector<std::size_t> sizes(k, 0);
        for (auto label : out.labels) {
            ++sizes[label];
        }
        if (std::find(sizes.begin(), sizes.end(), std::size_t{0}) == sizes.end()) {
            return;
        }
        for (std::size_t i = 0; i < n; ++i) {
            sq[i] = dist(i, out.labels[i]);
        }
        for (auto i : repair_empty_clusters(points, out.centers, out.labels, sq)) {
            upper[i] = std::numeric_limits<double>::infinity();
            lower[i] = 0.0;
        }
    };

    out.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        scan(i);
    }
    repair();

    PointSet previous = out.centers;
    while (out.iterations < max_iters) {
        ++out.iterations;
        previous = out.centers;
        compute_means(points, out.labels, out.centers);

        double max_shift = 0.0;
        double second_shift = 0.0;
        std::size_t max_c = 0;
        for (std::size_t j = 0; j < k; ++j) {
            shift[j] = euclidean_distance(previous.row(j), out.centers.row(j));
            if (shift[j] > max_shift) {
                second_shift = max_shift;
                max_shift = shift[j];
                max_c = j;
            } else if (shift[j] > second_shift) {
                second_shift = shift[j];
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            upper[i] += shift[out.labels[i]];
            lower[i] -= out.labels[i] == max_c ? second_shift : max_shift;
        }
        refresh_gaps();

        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t own = out.labels[i];
            const double bound = std::max(lower[i], half_gap[own]);
            if (upper[i] <= bound) {
                continue;
            }
            upper[i] = std::sqrt(dist(i, own));
            if (upper[i] <= bound) {
                continue;
            }
            scan(i);
            changed = changed || out.labels[i] != own;
        }
        const auto before = out.labels;
        repair();
        changed = changed || before != out.labels;
        if (!changed) {
            out.converged = true;
            break;
        }
    }
    compute_means(points, out.labels, out.centers);
    return out;
}

}  // namespace detail

/// Lloyd's k-means with k-means++ seeding.
///
/// Iterates until the labels stop changing or `max_iters` is reached;
/// hitting the cap is reported through `converged == false`. Empty clusters
/// are refilled with the point farthest from its center, so every cluster
/// owns at least one point. Centers are the exact means of the final labels.
///
/// Assignment uses Hamerly's bounds (one upper bound to the own center, one
/// lower bound to every other center) to skip points that cannot change
/// cluster; the labels match a plain Lloyd pass up to exact distance ties.
inline ClusterAssignment kmeans(const PointSet& points, std::size_t k, RngStream& rng,
                                std::size_t max_iters = default_max_iters) {
    detail::check_cluster_request(points, k, "kmeans");
    switch (points.dim()) {
        case 1: return detail::kmeans_impl<1>(points, k, rng, max_iters);
        case 2: return detail::kmeans_impl<2>(points, k, rng, max_iters);
        case 4: return detail::kmeans_impl<4>(points, k, rng, max_iters);
        default: return detail::kmeans_impl<0>(points, k, rng, max_iters);
    }
}

namespace detail {

/// Swap phase of PAM with the shared-accumulator trick: one pass costs
/// O(n^2 + nk). Applies the best improving swap per pass; returns false when
/// `max_passes` is exhausted first.
inline bool pam_swap(const PointSet& points, std::vector<std::size_t>& medoids, std::size_t max_passes) {
    const std::size_t n = points.size();
    const std::size_t k = medoids.size();
    if (k == n) {
        return true;
    }
    std::vector<double> near(n);
    std::vector<double> second(n);
    std::vector<std::size_t> owner(n);
    std::vector<char> is_medoid(n);
    std::vector<double> delta(k);
    for (std::size_t pass = 0; pass < max_passes; ++pass) {
        std::fill(is_medoid.begin(), is_medoid.end(), 0);
        for (auto m : medoids) {
            is_medoid[m] = 1;
        }
        double total = 0.0;
        for (std::size_t o = 0; o < n; ++o) {
            near[o] = second[o] = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < k; ++i) {
                const double d = squared_distance(points.row(o), points.row(medoids[i]));
                if (d < near[o]) {
                    second[o] = near[o];
                    near[o] = d;
                    owner[o] = i;
                } else if (d < second[o]) {
                    second[o] = d;
                }
            }
            total += near[o];
        }

        double best = 0.0;
        std::size_t best_i = k;
        std::size_t best_c = n;
        for (std::size_t c = 0; c < n; ++c) {
            if (is_medoid[c]) {
                continue;
            }
            std::fill(delta.begin(), delta.end(), 0.0);
            double shared = 0.0;
            const auto pc = points.row(c);
            for (std::size_t o = 0; o < n; ++o) {
                const double d = squared_distance(points.row(o), pc);
                const double keep = std::min(d - near[o], 0.0);
                shared += keep;
                delta[owner[o]] += std::min(d, second[o]) - near[o] - keep;
            }
            for (std::size_t i = 0; i < k; ++i) {
                if (shared + delta[i] < best) {
                    best = shared + delta[i];
                    best_i = i;
                    best_c = c;
                }
            }
        }
        if (best_c == n || !(best < -1e-12 * total)) {
            return true;
        }
        medoids[best_i] = best_c;
    }
    return false;
}

}  // namespace detail

/// k-medoids under squared Euclidean cost. Seeded with k-means++, refined by
/// alternating assignment / medoid updates, then by PAM swaps (best
/// medoid/non-medoid exchange per pass) until no swap lowers the total cost.
inline ClusterAssignment kmedoids(const PointSet& points, std::size_t k, RngStream& rng,
                                  std::size_t max_iters = default_max_iters) {
    detail::check_cluster_request(points, k, "kmedoids");

    ClusterAssignment out;
    out.k = k;
    out.medoid_indices = detail::plus_plus_seeds(points, k, rng);

    auto load_centers = [&] {
        out.centers = PointSet(points.dim());
        for (auto idx : out.medoid_indices) {
            out.centers.push_back(points.row(idx));
        }
    };
    std::vector<double> dist;
    auto assign = [&] {
        load_centers();
        detail::assign_nearest(points, out.centers, out.labels, dist);
        // A medoid always belongs to its own cluster, even when it shares
        // coordinates with another medoid.
        for (std::size_t c = 0; c < k; ++c) {
            out.labels[out.medoid_indices[c]] = c;
            dist[out.medoid_indices[c]] = 0.0;
        }
    };

    assign();
    while (out.iterations < max_iters) {
        ++out.iterations;
        bool changed = false;
        const auto groups = out.members();
        for (std::size_t c = 0; c < k; ++c) {
            const auto& group = groups[c];
            std::size_t best = out.medoid_indices[c];
            double best_cost = std::numeric_limits<double>::infinity();
            for (auto candidate : group) {
                double cost = 0.0;
                const auto cp = points.row(candidate);
                for (auto other : group) {
                    cost += squared_distance(cp, points.row(other));
                    if (cost > best_cost) {
                        break;
                    }
                }
                // Keep the incumbent on ties so the iteration terminates.
                if (cost < best_cost || (cost == best_cost && candidate == out.medoid_indices[c])) {
                    best_cost = cost;
                    best = candidate;
                }
            }
            if (best != out.medoid_indices[c]) {
                out.medoid_indices[c] = best;
                changed = true;
            }
        }
        if (!changed) {
            break;
        }
        assign();
    }
    out.converged = detail::pam_swap(points, out.medoid_indices, max_iters);
    assign();
    load_centers();
    return out;
}

/// Mean silhouette under squared Euclidean dissimilarity.
///
/// A point alone in its cluster has zero intra-cluster dissimilarity, so it
/// scores 1 whenever another cluster is at positive distance; 0/0 scores 0.
/// Labels need not be contiguous, but at least two clusters must be present.
inline double silhouette_score(const PointSet& points, std::span<const std::size_t> labels) {
    const std::size_t n = points.size();
    if (labels.size() != n) {
        throw ContractViolation("silhouette_score: one label per point required");
    }
    if (n == 0) {
        throw ContractViolation("silhouette_score: empty point set");
    }
    // Compact the label space.
    const std::size_t max_label = *std::max_element(labels.begin(), labels.end());
    std::vector<std::size_t> remap(max_label + 1, n);
    std::size_t k = 0;
    for (auto label : labels) {
        if (remap[label] == n) {
            remap[label] = k++;
        }
    }
    if (k < 2) {
        throw ContractViolation("silhouette_score: at least two clusters are required");
    }
    std::vector<std::size_t> lab(n);
    std::vector<double> sizes(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        lab[i] = remap[labels[i]];
        sizes[lab[i]] += 1.0;
    }

    // sums[i * k + c] = total dissimilarity from point i to cluster c.
    std::vector<double> sums(n * k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto pi = points.row(i);
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = squared_distance(pi, points.row(j));
            sums[i * k + lab[j]] += d;
            sums[j * k + lab[i]] += d;
        }
    }

    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t own = lab[i];
        const double a = sizes[own] > 1.0 ? sums[i * k + own] / (sizes[own] - 1.0) : 0.0;
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < k; ++c) {
            if (c != own) {
                b = std::min(b, sums[i * k + c] / sizes[c]);
            }
        }
        const double denom = std::max(a, b);
        total += denom > 0.0 ? (b - a) / denom : 0.0;
    }
    return total / static_cast<double>(n);
}

/// Mean silhouette of the k-means partition for each k in [2, max_k].
struct SilhouetteCurve {
    std::size_t max_k = 0;
    std::vector<double> scores;  // scores[k - 2]

    bool empty() const { return scores.empty(); }
    double at(std::size_t k) const { return scores.at(k - 2); }

    std::size_t best_k() const {
        const auto it = std::max_element(scores.begin(), scores.end());
        return static_cast<std::size_t>(it - scores.begin()) + 2;
    }
};

/// Each k gets its own stream derived from `rng`, so scores do not depend on
/// the order in which k values are evaluated.
inline SilhouetteCurve silhouette_curve(const PointSet& points, std::size_t max_k, const RngStream& rng,
                                        std::size_t max_iters = default_max_iters) {
    if (max_k < 2) {
        throw ConfigError("silhouette_curve: the k range must include 2");
    }
    if (max_k > points.size()) {
        throw ConfigError("silhouette_curve: m = " + std::to_string(max_k) + " exceeds the " +
                          std::to_string(points.size()) + " available points");
    }
    SilhouetteCurve curve;
    curve.max_k = max_k;
    curve.scores.reserve(max_k - 1);
    for (std::size_t k = 2; k <= max_k; ++k) {
        auto stream = rng.derive(k);
        const auto assignment = kmeans(points, k, stream, max_iters);
        curve.scores.push_back(silhouette_score(points, assignment.labels));
    }
    return curve;
}

}  // namespace kbbbc
