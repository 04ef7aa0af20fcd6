#pragma once

#include "kbbbc/clustering.hpp"
#include "kbbbc/core.hpp"
#include "kbbbc/rng.hpp"

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace kbbbc {

enum class NoiseKind { Normal, Uniform };
enum class BoundaryPolicy { Clamp, Reflect, Resample };

inline std::string_view to_string(NoiseKind kind) { return kind == NoiseKind::Normal ? "normal" : "uniform"; }

inline NoiseKind parse_noise(std::string_view text) {
    if (text == "normal") {
        return NoiseKind::Normal;
    }
    if (text == "uniform") {
        return NoiseKind::Uniform;
    }
    throw ConfigError("unknown noise kind '" + std::string(text) + "' (expected normal|uniform)");
}

inline std::string_view to_string(BoundaryPolicy policy) {
    switch (policy) {
        case BoundaryPolicy::Clamp: return "clamp";
        case BoundaryPolicy::Reflect: return "reflect";
        case BoundaryPolicy::Resample: return "resample";
    }
    return "clamp";
}

inline BoundaryPolicy parse_boundary(std::string_view text) {
    if (text == "clamp") {
        return BoundaryPolicy::Clamp;
    }
    if (text == "reflect") {
        return BoundaryPolicy::Reflect;
    }
    if (text == "resample") {
        return BoundaryPolicy::Resample;
    }
    throw ConfigError("unknown boundary policy '" + std::string(text) + "' (expected clamp|reflect|resample)");
}

/// Two clusters per dimension per optimum.
inline std::size_t derive_k(std::size_t m, std::size_t d) {
    if (m == 0 || d == 0) {
        throw ConfigError("derive_k: m and d must be >= 1");
    }
    return 2 * m * d;
}

/// Twenty individuals per cluster.
inline std::size_t derive_n(std::size_t k) {
    if (k == 0) {
        throw ConfigError("derive_n: k must be >= 1");
    }
    return 20 * k;
}

/// How the bang operator perturbs the centers of mass.
struct BangOptions {
    NoiseKind noise = NoiseKind::Normal;
    BoundaryPolicy boundary = BoundaryPolicy::Clamp;
    double explosion_strength = 1.0;  // multiplies the iteration in the denominator
};

struct KbbbcConfig {
    std::size_t m = 1;
    std::size_t d = 1;
    std::size_t k = 2;
    std::size_t n = 40;
    std::size_t generations = 1000;
    bool elitist = false;
    std::uint64_t seed = 0;
    BangOptions bang;
    std::size_t kmeans_max_iters = default_max_iters;

    /// k = 2md and n = 20k.
    static KbbbcConfig defaults_for(std::size_t m, std::size_t d) {
        KbbbcConfig cfg;
        cfg.m = m;
        cfg.d = d;
        cfg.k = derive_k(m, d);
        cfg.n = derive_n(cfg.k);
        return cfg;
    }

    void validate() const {
        if (m < 1 || d < 1) {
            throw ConfigError("kbbbc: m and d must be >= 1");
        }
        if (k < m) {
            throw ConfigError("kbbbc: k (" + std::to_string(k) + ") must be >= m (" + std::to_string(m) + ")");
        }
        if (n < k) {
            throw ConfigError("kbbbc: n (" + std::to_string(n) + ") must be >= k (" + std::to_string(k) + ")");
        }
        if (generations < 1) {
            throw ConfigError("kbbbc: generations must be >= 1");
        }
        if (!(bang.explosion_strength > 0.0)) {
            throw ConfigError("kbbbc: explosion strength must be > 0");
        }
        if (kmeans_max_iters < 1) {
            throw ConfigError("kbbbc: kmeans max iterations must be >= 1");
        }
    }
};

/// Best individual of each cluster, fitness cached.
struct CentersOfMass {
    std::vector<Individual> points;

    std::size_t size() const { return points.size(); }
};

/// Picks the best member of every cluster. Ties keep the lowest member index.
inline CentersOfMass big_crunch(const Population& pop, const ClusterAssignment& assignment, Direction direction) {
    if (assignment.labels.size() != pop.size()) {
        throw ContractViolation("big_crunch: assignment does not match population size");
    }
    constexpr std::size_t none = static_cast<std::size_t>(-1);
    std::vector<std::size_t> best(assignment.k, none);
    for (std::size_t i = 0; i < pop.size(); ++i) {
        const auto& ind = pop.members[i];
        if (!ind.fitness) {
            throw ContractViolation("big_crunch: unevaluated individual at index " + std::to_string(i));
        }
        auto& slot = best[assignment.labels[i]];
        if (slot == none || is_better(*ind.fitness, *pop.members[slot].fitness, direction)) {
            slot = i;
        }
    }
    CentersOfMass centers;
    centers.points.reserve(assignment.k);
    for (std::size_t c = 0; c < assignment.k; ++c) {
        if (best[c] == none) {
            throw ContractViolation("big_crunch: cluster " + std::to_string(c) + " is empty");
        }
        centers.points.push_back(pop.members[best[c]]);
    }
    return centers;
}

namespace detail {

inline double reflect_into(double v, double lo, double hi) {
    const double w = hi - lo;
    double t = std::fmod(v - lo, 2.0 * w);
    if (t < 0.0) {
        t += 2.0 * w;
    }
    return t <= w ? lo + t : hi - (t - w);
}

inline double draw_noise(RngStream& rng, NoiseKind kind) {
    return kind == NoiseKind::Normal ? rng.normal() : rng.uniform(-1.0, 1.0);
}

}  // namespace detail

/// Expands the centers into n offspring: n / k per center, the remainder
/// going one each to the first n mod k centers. Coordinate t of an offspring
/// of center c is c[t] + (upper[t] - lower[t]) * r / (iteration * strength),
/// with a fresh r per coordinate, then brought back inside the box.
inline Population big_bang(const CentersOfMass& centers, std::size_t iteration, std::size_t n, const Bounds& bounds,
                           RngStream& rng, const BangOptions& options = {}) {
    if (iteration < 2) {
        throw ConfigError("big_bang: iteration must be >= 2 (the first generation is random)");
    }
    if (centers.points.empty()) {
        throw ContractViolation("big_bang: no centers of mass");
    }
    constexpr int resample_attempts = 64;
    const std::size_t k = centers.size();
    const std::size_t dim = bounds.dim();
    const double denom = static_cast<double>(iteration) * options.explosion_strength;

    Population pop;
    pop.members.reserve(n);
    for (std::size_t c = 0; c < k; ++c) {
        const std::size_t count = n / k + (c < n % k ? 1 : 0);
        const auto& center = centers.points[c].x;
        if (center.size() != dim) {
            throw ContractViolation("big_bang: center dimension does not match bounds");
        }
        for (std::size_t j = 0; j < count; ++j) {
            Individual child;
            child.x.resize(dim);
            for (std::size_t t = 0; t < dim; ++t) {
                const double lo = bounds.lower(t);
                const double hi = bounds.upper(t);
                const double scale = (hi - lo) / denom;
                double v = center[t] + scale * detail::draw_noise(rng, options.noise);
                switch (options.boundary) {
                    case BoundaryPolicy::Clamp:
                        v = std::clamp(v, lo, hi);
                        break;
                    case BoundaryPolicy::Reflect:
                        v = detail::reflect_into(v, lo, hi);
                        break;
                    case BoundaryPolicy::Resample:
                        for (int attempt = 0; attempt < resample_attempts && (v < lo || v > hi); ++attempt) {
                            v = center[t] + scale * detail::draw_noise(rng, options.noise);
                        }
                        v = std::clamp(v, lo, hi);
                        break;
                }
                child.x[t] = v;
            }
            pop.members.push_back(std::move(child));
        }
    }
    return pop;
}

/// Per-generation view handed to a trace hook, after crunching.
struct GenerationSnapshot {
    std::size_t generation;  // 1-based
    const Population& population;
    const ClusterAssignment& assignment;
    const CentersOfMass& centers;
};

using TraceHook = std::function<void(const GenerationSnapshot&)>;

struct KbbbcResult {
    CentersOfMass centers;
    std::uint64_t evaluations = 0;
    std::size_t unconverged_kmeans = 0;  // generations where k-means hit its iteration cap
};

/// k-BBBC; with `cfg.elitist` the previous centers are reinserted (with their
/// cached fitness) before evaluation, so each generation clusters n + k members.
inline KbbbcResult run_kbbbc(const ProblemSpec& problem, const KbbbcConfig& cfg, const TraceHook& trace = {}) {
    cfg.validate();
    if (cfg.d != problem.dim()) {
        throw ConfigError("kbbbc: config dimension " + std::to_string(cfg.d) + " does not match problem '" +
                          problem.id + "' (" + std::to_string(problem.dim()) + ")");
    }
    const RngStream master(cfg.seed);
    RngStream init_rng = master.derive(Substream::Init);
    RngStream bang_rng = master.derive(Substream::Bang);
    RngStream cluster_rng = master.derive(Substream::KMeans);

    EvaluationCounter counter;
    KbbbcResult result;
    Population pop = random_initialization(cfg.n, problem.bounds, init_rng);

    for (std::size_t gen = 1; gen <= cfg.generations; ++gen) {
        if (gen != 1) {
            pop = big_bang(result.centers, gen, cfg.n, problem.bounds, bang_rng, cfg.bang);
            if (cfg.elitist) {
                pop.members.insert(pop.members.end(), result.centers.points.begin(), result.centers.points.end());
            }
        }
        pop.generation = gen;
        evaluate(pop, problem, counter);
        const auto points = PointSet::from_individuals(pop.members);
        const auto assignment = kmeans(points, cfg.k, cluster_rng, cfg.kmeans_max_iters);
        if (!assignment.converged) {
            ++result.unconverged_kmeans;
        }
        result.centers = big_crunch(pop, assignment, problem.direction);
        if (trace) {
            trace(GenerationSnapshot{gen, pop, assignment, result.centers});
        }
    }
    result.evaluations = counter.value();
    return result;
}

}  // namespace kbbbc
