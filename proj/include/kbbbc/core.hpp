#pragma once

#include "kbbbc/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace kbbbc {

/// Invalid user-supplied parameters (bad bounds, k > n, unknown function...).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The objective produced a value we refuse to optimise over.
class EvaluationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An operator was handed data that violates its precondition.
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

enum class Direction { Minimize, Maximize };

inline std::string_view to_string(Direction dir) {
    return dir == Direction::Minimize ? "min" : "max";
}

inline Direction parse_direction(std::string_view text) {
    if (text == "min" || text == "minimize") {
        return Direction::Minimize;
    }
    if (text == "max" || text == "maximize") {
        return Direction::Maximize;
    }
    throw ConfigError("unknown direction '" + std::string(text) + "'");
}

/// True when `a` is strictly better than `b` under `dir`.
inline bool is_better(double a, double b, Direction dir) {
    return dir == Direction::Minimize ? a < b : a > b;
}

using Point = std::vector<double>;

inline std::string format_point(std::span<const double> x) {
    std::ostringstream os;
    os.precision(17);
    os << '(';
    for (std::size_t i = 0; i < x.size(); ++i) {
        os << (i ? ", " : "") << x[i];
    }
    os << ')';
    return os.str();
}

/// Box constraints x^L <= x <= x^U.
class Bounds {
public:
    Bounds(Point lower, Point upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
        if (lower_.empty() || lower_.size() != upper_.size()) {
            throw ConfigError("bounds: lower and upper must have the same non-zero dimension");
        }
        for (std::size_t i = 0; i < lower_.size(); ++i) {
            if (!(lower_[i] < upper_[i]) || !std::isfinite(lower_[i]) || !std::isfinite(upper_[i])) {
                throw ConfigError("bounds: lower[" + std::to_string(i) + "] must be < upper[" +
                                  std::to_string(i) + "]");
            }
        }
    }

    static Bounds uniform(std::size_t dim, double lo, double hi) {
        return Bounds(Point(dim, lo), Point(dim, hi));
    }

    std::size_t dim() const { return lower_.size(); }
    const Point& lower() const { return lower_; }
    const Point& upper() const { return upper_; }
    double lower(std::size_t i) const { return lower_[i]; }
    double upper(std::size_t i) const { return upper_[i]; }
    double width(std::size_t i) const { return upper_[i] - lower_[i]; }

    bool contains(std::span<const double> x) const {
        if (x.size() != dim()) {
            return false;
        }
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (x[i] < lower_[i] || x[i] > upper_[i]) {
                return false;
            }
        }
        return true;
    }

    bool operator==(const Bounds&) const = default;

private:
    Point lower_;
    Point upper_;
};

/// Per-coordinate projection onto the box.
inline Point clamp_to_bounds(std::span<const double> x, const Bounds& bounds) {
    if (x.size() != bounds.dim()) {
        throw ContractViolation("clamp_to_bounds: dimension mismatch");
    }
    Point out(x.begin(), x.end());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = std::clamp(out[i], bounds.lower(i), bounds.upper(i));
    }
    return out;
}

struct Individual {
    Point x;
    std::optional<double> fitness;

    bool operator==(const Individual&) const = default;
};

struct Population {
    std::vector<Individual> members;
    std::size_t generation = 0;

    std::size_t size() const { return members.size(); }

    bool evaluated() const {
        return std::all_of(members.begin(), members.end(),
                           [](const Individual& ind) { return ind.fitness.has_value(); });
    }

    bool operator==(const Population&) const = default;
};

using Objective = std::function<double(std::span<const double>)>;

struct ProblemSpec {
    std::string id;
    Objective objective;
    Direction direction = Direction::Minimize;
    Bounds bounds;
    std::size_t m = 1;              // expected number of optima
    double detection_radius = 0.0;  // search-space radius that certifies a hit

    std::size_t dim() const { return bounds.dim(); }

    void validate() const {
        if (!objective) {
            throw ConfigError("problem '" + id + "': objective is empty");
        }
        if (m < 1) {
            throw ConfigError("problem '" + id + "': m must be >= 1");
        }
        if (!(detection_radius > 0.0)) {
            throw ConfigError("problem '" + id + "': detection_radius must be > 0");
        }
    }
};

/// Counts fresh objective evaluations. Atomic so callers may evaluate
/// members from several threads.
class EvaluationCounter {
public:
    EvaluationCounter() = default;
    EvaluationCounter(const EvaluationCounter&) = delete;
    EvaluationCounter& operator=(const EvaluationCounter&) = delete;

    void add(std::uint64_t n) { count_.fetch_add(n, std::memory_order_relaxed); }
    std::uint64_t value() const { return count_.load(std::memory_order_relaxed); }
    void reset() { count_.store(0, std::memory_order_relaxed); }

private:
    std::atomic<std::uint64_t> count_{0};
};

/// n points drawn uniformly inside the box; fitness unset, generation 0.
inline Population random_initialization(std::size_t n, const Bounds& bounds, RngStream& rng) {
    if (n == 0) {
        throw ConfigError("random_initialization: n must be >= 1");
    }
    Population pop;
    pop.members.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
        Individual ind;
        ind.x.resize(bounds.dim());
        for (std::size_t i = 0; i < bounds.dim(); ++i) {
            ind.x[i] = rng.uniform(bounds.lower(i), bounds.upper(i));
        }
        pop.members.push_back(std::move(ind));
    }
    return pop;
}

inline double evaluate_point(const ProblemSpec& problem, std::span<const double> x) {
    const double value = problem.objective(x);
    if (!std::isfinite(value)) {
        throw EvaluationError("problem '" + problem.id + "': non-finite objective value at " +
                              format_point(x));
    }
    return value;
}

/// Evaluates every member without a cached fitness. Members that already
/// carry a fitness (reinserted elites) are skipped and not counted.
inline void evaluate(Population& pop, const ProblemSpec& problem, EvaluationCounter& counter) {
    std::uint64_t fresh = 0;
    for (auto& ind : pop.members) {
        if (ind.fitness) {
            continue;
        }
        if (ind.x.size() != problem.dim()) {
            throw ContractViolation("evaluate: individual dimension does not match problem");
        }
        ind.fitness = evaluate_point(problem, ind.x);
        ++fresh;
    }
    counter.add(fresh);
}

/// Row-major matrix of points used by the clustering routines.
class PointSet {
public:
    PointSet() = default;
    explicit PointSet(std::size_t dim) : dim_(dim) {}
    PointSet(std::size_t dim, std::vector<double> values) : dim_(dim), values_(std::move(values)) {
        if (dim_ == 0 || values_.size() % dim_ != 0) {
            throw ContractViolation("PointSet: value count is not a multiple of the dimension");
        }
    }

    static PointSet from_points(std::span<const Point> points) {
        if (points.empty()) {
            return PointSet();
        }
        PointSet set(points.front().size());
        set.values_.reserve(points.size() * set.dim_);
        for (const auto& p : points) {
            set.push_back(p);
        }
        return set;
    }

    static PointSet from_individuals(std::span<const Individual> members) {
        if (members.empty()) {
            return PointSet();
        }
        PointSet set(members.front().x.size());
        set.values_.reserve(members.size() * set.dim_);
        for (const auto& ind : members) {
            set.push_back(ind.x);
        }
        return set;
    }

    void push_back(std::span<const double> p) {
        if (p.size() != dim_) {
            throw ContractViolation("PointSet: dimension mismatch");
        }
        values_.insert(values_.end(), p.begin(), p.end());
    }

    std::size_t dim() const { return dim_; }
    std::size_t size() const { return dim_ == 0 ? 0 : values_.size() / dim_; }
    bool empty() const { return size() == 0; }

    std::span<const double> row(std::size_t i) const { return {values_.data() + i * dim_, dim_}; }
    std::span<double> row(std::size_t i) { return {values_.data() + i * dim_, dim_}; }

    Point point(std::size_t i) const {
        auto r = row(i);
        return Point(r.begin(), r.end());
    }

    const std::vector<double>& values() const { return values_; }

    bool operator==(const PointSet&) const = default;

private:
    std::size_t dim_ = 0;
    std::vector<double> values_;
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = a[i] - b[i];
        sum += diff * diff;
    }
    return sum;
}

inline double euclidean_distance(std::span<const double> a, std::span<const double> b) {
    return std::sqrt(squared_distance(a, b));
}

}  // namespace kbbbc
