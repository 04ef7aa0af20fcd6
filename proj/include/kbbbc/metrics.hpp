#pragma once

#include "kbbbc/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <tuple>
#include <vector>

namespace kbbbc {

/// pairing[i] = index of the truth point matched with found[i].
using Pairing = std::vector<std::size_t>;

/// Minimum-cost perfect matching on a square cost matrix (Hungarian method,
/// O(m^3)). Returns the column assigned to each row.
inline std::vector<std::size_t> solve_assignment(std::span<const double> cost, std::size_t m) {
    if (cost.size() != m * m) {
        throw ContractViolation("solve_assignment: cost matrix must be m x m");
    }
    const double inf = std::numeric_limits<double>::infinity();
    // 1-based potentials; way[j] is the column preceding j on the augmenting path.
    std::vector<double> u(m + 1, 0.0);
    std::vector<double> v(m + 1, 0.0);
    std::vector<std::size_t> p(m + 1, 0);
    std::vector<std::size_t> way(m + 1, 0);
    for (std::size_t i = 1; i <= m; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(m + 1, inf);
        std::vector<char> used(m + 1, 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= m; ++j) {
                if (used[j]) {
                    continue;
                }
                const double cur = cost[(i0 - 1) * m + (j - 1)] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<std::size_t> row_to_col(m, 0);
    for (std::size_t j = 1; j <= m; ++j) {
        row_to_col[p[j] - 1] = j - 1;
    }
    return row_to_col;
}

/// One-to-one pairing of found and true optima minimising the total squared distance.
inline Pairing match_optima(std::span<const Point> found, std::span<const Point> truth) {
    if (found.size() != truth.size()) {
        throw ConfigError("match_optima: found (" + std::to_string(found.size()) + ") and truth (" +
                          std::to_string(truth.size()) + ") must have the same length");
    }
    const std::size_t m = found.size();
    std::vector<double> cost(m * m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            cost[i * m + j] = squared_distance(found[i], truth[j]);
        }
    }
    return solve_assignment(cost, m);
}

namespace detail {

inline void check_pairing(std::span<const Point> found, std::span<const Point> truth, const Pairing& pairing) {
    if (pairing.size() != found.size()) {
        throw ContractViolation("pairing length does not match the found set");
    }
    for (auto j : pairing) {
        if (j >= truth.size()) {
            throw ContractViolation("pairing index out of range");
        }
    }
}

}  // namespace detail

/// Sum of squared search-space errors over the pairing.
inline double accuracy_search(std::span<const Point> found, std::span<const Point> truth, const Pairing& pairing) {
    detail::check_pairing(found, truth, pairing);
    double sum = 0.0;
    for (std::size_t i = 0; i < pairing.size(); ++i) {
        sum += squared_distance(found[i], truth[pairing[i]]);
    }
    return sum;
}

/// Sum of absolute objective errors over the pairing.
template <typename Fn>
double accuracy_objective(std::span<const Point> found, std::span<const Point> truth, const Pairing& pairing,
                          Fn&& objective) {
    detail::check_pairing(found, truth, pairing);
    double sum = 0.0;
    for (std::size_t i = 0; i < pairing.size(); ++i) {
        sum += std::abs(objective(std::span<const double>(found[i])) -
                        objective(std::span<const double>(truth[pairing[i]])));
    }
    return sum;
}

/// Number of true optima certified by a found point within `radius`.
/// Candidate pairs are consumed nearest-first and each found point certifies
/// at most one optimum.
inline std::size_t detected_count(std::span<const Point> found, std::span<const Point> truth, double radius) {
    if (!(radius > 0.0)) {
        throw ConfigError("detected_count: radius must be > 0");
    }
    const double r2 = radius * radius;
    std::vector<std::tuple<double, std::size_t, std::size_t>> candidates;
    for (std::size_t t = 0; t < truth.size(); ++t) {
        for (std::size_t f = 0; f < found.size(); ++f) {
            const double d2 = squared_distance(found[f], truth[t]);
            if (d2 <= r2) {
                candidates.emplace_back(d2, t, f);
            }
        }
    }
    std::sort(candidates.begin(), candidates.end());
    std::vector<char> truth_used(truth.size(), 0);
    std::vector<char> found_used(found.size(), 0);
    std::size_t count = 0;
    for (const auto& [d2, t, f] : candidates) {
        if (!truth_used[t] && !found_used[f]) {
            truth_used[t] = 1;
            found_used[f] = 1;
            ++count;
        }
    }
    return count;
}

/// Number of peaks hit at accuracy `epsilon`: a peak counts when an unused
/// found point lies within `radius` of it and its objective value is within
/// `epsilon` of the peak value.
inline std::size_t peaks_found(std::span<const Point> found, std::span<const double> found_values,
                               std::span<const Point> peaks, std::span<const double> peak_values, double radius,
                               double epsilon) {
    if (found.size() != found_values.size() || peaks.size() != peak_values.size()) {
        throw ContractViolation("peaks_found: one value per point required");
    }
    const double r2 = radius * radius;
    std::vector<std::tuple<double, std::size_t, std::size_t>> candidates;
    for (std::size_t p = 0; p < peaks.size(); ++p) {
        for (std::size_t f = 0; f < found.size(); ++f) {
            const double d2 = squared_distance(found[f], peaks[p]);
            if (d2 <= r2 && std::abs(found_values[f] - peak_values[p]) <= epsilon) {
                candidates.emplace_back(d2, p, f);
            }
        }
    }
    std::sort(candidates.begin(), candidates.end());
    std::vector<char> peak_used(peaks.size(), 0);
    std::vector<char> found_used(found.size(), 0);
    std::size_t count = 0;
    for (const auto& [d2, p, f] : candidates) {
        if (!peak_used[p] && !found_used[f]) {
            peak_used[p] = 1;
            found_used[f] = 1;
            ++count;
        }
    }
    return count;
}

/// PR = sum(NPF) / (TNP * NR).
inline double peak_ratio(std::span<const std::size_t> peaks_found_per_run, std::size_t total_peaks) {
    if (total_peaks == 0 || peaks_found_per_run.empty()) {
        throw ConfigError("peak_ratio: need at least one run and one peak");
    }
    const auto found = std::accumulate(peaks_found_per_run.begin(), peaks_found_per_run.end(), std::size_t{0});
    return static_cast<double>(found) /
           (static_cast<double>(total_peaks) * static_cast<double>(peaks_found_per_run.size()));
}

/// SR = NSR / NR.
inline double success_ratio(std::size_t runs_successful, std::size_t runs_total) {
    if (runs_total == 0) {
        throw ConfigError("success_ratio: runs_total must be >= 1");
    }
    if (runs_successful > runs_total) {
        throw ConfigError("success_ratio: more successful runs than runs");
    }
    return static_cast<double>(runs_successful) / static_cast<double>(runs_total);
}

struct RunMetrics {
    double a_src = 0.0;
    double a_obj = 0.0;
    std::size_t detected = 0;
    double success_actual = 0.0;
    double success_quantified = 0.0;
    std::uint64_t evaluations = 0;
    double runtime_seconds = 0.0;
    std::size_t peaks_found = 0;  // global peaks hit at accuracy epsilon
};

struct Summary {
    double mean = 0.0;
    double std = 0.0;  // sample standard deviation (n - 1); 0 for a single value

    static Summary of(std::span<const double> values) {
        Summary s;
        if (values.empty()) {
            return s;
        }
        const double n = static_cast<double>(values.size());
        s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
        if (values.size() > 1) {
            double sq = 0.0;
            for (double v : values) {
                sq += (v - s.mean) * (v - s.mean);
            }
            s.std = std::sqrt(sq / (n - 1.0));
        }
        return s;
    }
};

struct CampaignMetrics {
    Summary a_src;
    Summary a_obj;
    Summary detected;
    Summary success_actual;
    Summary success_quantified;
    Summary evaluations;
    Summary runtime_seconds;
    double peak_ratio = 0.0;
    double success_ratio = 0.0;
    std::size_t runs = 0;

    /// `total_peaks` is the number of global peaks used for PR/SR.
    static CampaignMetrics from_runs(std::span<const RunMetrics> runs, std::size_t total_peaks) {
        CampaignMetrics out;
        out.runs = runs.size();
        if (runs.empty()) {
            return out;
        }
        auto column = [&](auto getter) {
            std::vector<double> values;
            values.reserve(runs.size());
            for (const auto& r : runs) {
                values.push_back(static_cast<double>(getter(r)));
            }
            return Summary::of(values);
        };
        out.a_src = column([](const RunMetrics& r) { return r.a_src; });
        out.a_obj = column([](const RunMetrics& r) { return r.a_obj; });
        out.detected = column([](const RunMetrics& r) { return r.detected; });
        out.success_actual = column([](const RunMetrics& r) { return r.success_actual; });
        out.success_quantified = column([](const RunMetrics& r) { return r.success_quantified; });
        out.evaluations = column([](const RunMetrics& r) { return r.evaluations; });
        out.runtime_seconds = column([](const RunMetrics& r) { return r.runtime_seconds; });

        std::vector<std::size_t> found;
        std::size_t successful = 0;
        for (const auto& r : runs) {
            found.push_back(r.peaks_found);
            if (r.peaks_found == total_peaks) {
                ++successful;
            }
        }
        if (total_peaks > 0) {
            out.peak_ratio = kbbbc::peak_ratio(found, total_peaks);
            out.success_ratio = kbbbc::success_ratio(successful, runs.size());
        }
        return out;
    }
};

}  // namespace kbbbc
