#pragma once

#include "kbbbc/clustering.hpp"
#include "kbbbc/core.hpp"
#include "kbbbc/rng.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace kbbbc {

struct IdentifiedOptima {
    std::vector<Individual> points;
};

struct QuantificationResult {
    std::size_t m_c = 0;  // optima judged correctly retrieved
    std::size_t m_m = 0;  // optima judged missed
    SilhouetteCurve curve;
};

/// Splits a converged set of individuals into m k-medoids clusters and keeps
/// the best member of each.
inline IdentifiedOptima identify_optima(std::span<const Individual> converged, std::size_t m, Direction direction,
                                        RngStream& rng) {
    if (m == 0) {
        throw ConfigError("identify_optima: m must be >= 1");
    }
    if (converged.size() < m) {
        throw ConfigError("identify_optima: " + std::to_string(converged.size()) + " points cannot hold " +
                          std::to_string(m) + " optima");
    }
    for (const auto& ind : converged) {
        if (!ind.fitness) {
            throw ContractViolation("identify_optima: unevaluated individual");
        }
    }
    const auto points = PointSet::from_individuals(converged);
    const auto assignment = kmedoids(points, m, rng);

    constexpr std::size_t none = static_cast<std::size_t>(-1);
    std::vector<std::size_t> best(m, none);
    for (std::size_t i = 0; i < converged.size(); ++i) {
        auto& slot = best[assignment.labels[i]];
        if (slot == none || is_better(*converged[i].fitness, *converged[slot].fitness, direction)) {
            slot = i;
        }
    }
    IdentifiedOptima out;
    out.points.reserve(m);
    for (auto idx : best) {
        out.points.push_back(converged[idx]);
    }
    return out;
}

/// Silhouette-plateau estimate of how many of the m identified points are
/// distinct optima.
///
/// Starting from m_c = m, every k in [2, m-1] (scanned downwards) whose
/// normalised drop (E(m) - E(k)) / (1 - (k-1)/(m-1)) is below the threshold
/// becomes the new m_c, so the result is the smallest qualifying k. For m = 2
/// the scan is empty and m_c = 2; for m = 1 the answer is trivially 1.
inline QuantificationResult quantify_missed(const IdentifiedOptima& identified, std::size_t m, const RngStream& rng,
                                            double slope_threshold = 0.1) {
    QuantificationResult out;
    if (m <= 1) {
        if (identified.points.empty()) {
            throw ContractViolation("quantify_missed: no identified optima");
        }
        out.m_c = 1;
        out.m_m = 0;
        return out;
    }
    if (identified.points.size() != m) {
        throw ContractViolation("quantify_missed: expected " + std::to_string(m) + " identified optima, got " +
                                std::to_string(identified.points.size()));
    }
    const auto points = PointSet::from_individuals(identified.points);
    out.curve = silhouette_curve(points, m, rng);

    const double top = out.curve.at(m);
    out.m_c = m;
    for (std::size_t k = m - 1; k >= 2; --k) {
        const double run = 1.0 - static_cast<double>(k - 1) / static_cast<double>(m - 1);
        const double slope = (top - out.curve.at(k)) / run;
        if (slope < slope_threshold) {
            out.m_c = k;
        }
    }
    out.m_m = m - out.m_c;
    return out;
}

}  // namespace kbbbc
