#pragma once

#include "kbbbc/core.hpp"
#include "kbbbc/optimizer.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#ifndef KBBBC_DEFAULT_DATA_DIR
#define KBBBC_DEFAULT_DATA_DIR "data/ground_truth"
#endif

namespace kbbbc {

// ---------------------------------------------------------------------------
// Objectives
// ---------------------------------------------------------------------------

namespace functions {

using std::numbers::pi;

inline double uneven_decreasing_maxima(std::span<const double> x) {
    const double envelope = std::pow(2.0, -2.0 * std::pow((x[0] - 0.1) / 0.8, 2.0));
    return envelope * std::pow(std::sin(5.0 * pi * x[0]), 6.0);
}

inline double equal_maxima(std::span<const double> x) { return std::pow(std::sin(5.0 * pi * x[0]), 6.0); }

/// 10(1 + cos(2 pi j x)) + 2 j x^2; j sets the number of minima on [0, 1].
inline double key_term(double x, double j) { return 10.0 * (1.0 + std::cos(2.0 * pi * j * x)) + 2.0 * j * x * x; }

inline double schwefel(std::span<const double> x) {
    double sum = 0.0;
    for (double v : x) {
        sum += v * std::sin(std::sqrt(std::abs(v)));
    }
    return 418.9829 * static_cast<double>(x.size()) - sum;
}

inline double himmelblau(std::span<const double> x) {
    const double a = x[0] * x[0] + x[1] - 11.0;
    const double b = x[0] + x[1] * x[1] - 7.0;
    return a * a + b * b;
}

inline double bird(std::span<const double> x) {
    const double a = 1.0 - std::cos(x[1]);
    const double b = 1.0 - std::sin(x[0]);
    const double c = x[0] - x[1];
    return std::sin(x[0]) * std::exp(a * a) + std::cos(x[1]) * std::exp(b * b) + c * c;
}

inline double rastrigin(std::span<const double> x) {
    double sum = 10.0 * static_cast<double>(x.size());
    for (double v : x) {
        sum += v * v - 10.0 * std::cos(2.0 * pi * v);
    }
    return sum;
}

inline double cosine_mixture(std::span<const double> x) {
    return x[0] * x[0] + x[1] * x[1] - 0.1 * std::cos(5.0 * pi * x[0]) - 0.1 * std::cos(5.0 * pi * x[1]);
}

inline double cross_in_tray(std::span<const double> x) {
    const double r = std::sqrt(x[0] * x[0] + x[1] * x[1]);
    const double inner = std::abs(std::sin(x[0]) * std::sin(x[1]) * std::exp(std::abs(100.0 - r / pi)));
    return -std::pow(1e-4 * (inner + 1.0), 0.1);
}

inline double vincent(std::span<const double> x) {
    double sum = 0.0;
    for (double v : x) {
        sum += std::sin(10.0 * std::log(v));
    }
    return -sum;
}

inline double holder_table(std::span<const double> x) {
    const double r = std::sqrt(x[0] * x[0] + x[1] * x[1]);
    return -std::abs(std::sin(x[0]) * std::cos(x[1]) * std::exp(std::abs(1.0 - r / pi)));
}

inline double pen_holder(std::span<const double> x) {
    const double r = std::sqrt(x[0] * x[0] + x[1] * x[1]);
    const double g = std::abs(std::cos(x[0]) * std::cos(x[1]) * std::exp(std::abs(1.0 - r / pi)));
    return -std::exp(-1.0 / g);
}

inline double egg_crate(std::span<const double> x) {
    const double s0 = std::sin(x[0]);
    const double s1 = std::sin(x[1]);
    return x[0] * x[0] + x[1] * x[1] + 25.0 * (s0 * s0 + s1 * s1);
}

inline double griewank(std::span<const double> x) {
    return (x[0] * x[0] + x[1] * x[1]) / 4000.0 - std::cos(x[0]) * std::cos(x[1] / std::numbers::sqrt2) + 1.0;
}

/// j-index of coordinate i (0-based) of the scalable problem: 2 at d/4 and
/// d/2, 3 at 3d/4, 4 at d (1-based positions), 1 elsewhere.
inline std::vector<int> highdim_indices(std::size_t d) {
    if (d == 0 || d % 4 != 0) {
        throw ConfigError("highdim problem: d must be a positive multiple of 4, got " + std::to_string(d));
    }
    std::vector<int> j(d, 1);
    j[d / 4 - 1] = 2;
    j[d / 2 - 1] = 2;
    j[3 * d / 4 - 1] = 3;
    j[d - 1] = 4;
    return j;
}

}  // namespace functions

// ---------------------------------------------------------------------------
// Problem definitions
// ---------------------------------------------------------------------------

/// A registered problem before its ground truth is attached.
struct FunctionDefinition {
    std::string id;
    std::string alias;  // f1 .. f20 for the low-dimensional table
    std::string name;
    std::string formula;
    Direction direction = Direction::Minimize;
    double lower = 0.0;
    double upper = 1.0;
    std::size_t d = 1;
    std::size_t m = 1;        // optima on the box, as counted by the oracle
    std::size_t table_m = 0;  // published optimum count
    std::size_t table_k = 0;  // published cluster count
    std::size_t table_n = 0;  // published population size
    Objective objective;
    bool boundary_optima = false;  // optima on the box boundary count towards m
    std::string data_source;       // ground-truth file id, when shared with another entry
    bool negate_data = false;      // objective values in the shared file are sign-flipped

    Bounds bounds() const { return Bounds::uniform(d, lower, upper); }
    std::string data_id() const { return data_source.empty() ? id : data_source; }
};

namespace detail {

inline FunctionDefinition key_definition(std::size_t m, std::string alias, std::size_t k, std::size_t n) {
    FunctionDefinition def;
    def.id = "key" + std::to_string(m);
    def.alias = std::move(alias);
    def.name = "Key" + std::to_string(m);
    def.formula = "10(1+cos(2*pi*" + std::to_string(m) + "*x)) + " + std::to_string(2 * m) + "*x^2";
    def.direction = Direction::Minimize;
    def.lower = 0.0;
    def.upper = 1.0;
    def.d = 1;
    def.m = m;
    def.table_m = m;
    def.table_k = k;
    def.table_n = n;
    const double j = static_cast<double>(m);
    def.objective = [j](std::span<const double> x) { return functions::key_term(x[0], j); };
    return def;
}

inline FunctionDefinition make_definition(std::string id, std::string alias, std::string name, std::string formula,
                                          Direction dir, double lo, double hi, std::size_t d, std::size_t m,
                                          std::size_t k, std::size_t n, Objective objective,
                                          bool boundary_optima = false) {
    FunctionDefinition def;
    def.id = std::move(id);
    def.alias = std::move(alias);
    def.name = std::move(name);
    def.formula = std::move(formula);
    def.direction = dir;
    def.lower = lo;
    def.upper = hi;
    def.d = d;
    def.m = m;
    def.table_m = m;
    def.table_k = k;
    def.table_n = n;
    def.objective = std::move(objective);
    def.boundary_optima = boundary_optima;
    return def;
}

}  // namespace detail

/// The twenty low-dimensional problems, in table order. The table_* columns
/// are the published values, kept as data so their consistency with
/// derive_k / derive_n can be checked. `m` differs from table_m only where
/// the oracle finds a different number of optima on the box (bird, pen_holder).
inline const std::vector<FunctionDefinition>& table2_definitions() {
    using detail::key_definition;
    using detail::make_definition;
    using std::numbers::pi;
    static const std::vector<FunctionDefinition> defs = [] {
        std::vector<FunctionDefinition> v;
        v.push_back(make_definition("uneven_decreasing_maxima", "f1", "Uneven Decreasing Maxima",
                                    "2^(-2((x-0.1)/0.8)^2) * sin(5*pi*x)^6", Direction::Maximize, 0.0, 1.0, 1, 5, 10,
                                    200, functions::uneven_decreasing_maxima));
        v.push_back(key_definition(4, "f2", 8, 160));
        v.push_back(key_definition(8, "f3", 16, 320));
        v.push_back(key_definition(16, "f4", 32, 640));
        v.push_back(key_definition(24, "f5", 48, 960));
        v.push_back(key_definition(48, "f6", 96, 1920));
        v.push_back(key_definition(96, "f7", 192, 3840));
        v.push_back(make_definition("schwefel1d", "f8", "Schwefel 1-D", "418.9829 - x*sin(sqrt(|x|))",
                                    Direction::Minimize, -500.0, 500.0, 1, 8, 16, 320, functions::schwefel, true));
        v.push_back(make_definition("schwefel2d", "f9", "Schwefel 2-D", "2*418.9829 - sum x_i*sin(sqrt(|x_i|))",
                                    Direction::Minimize, -500.0, 500.0, 2, 64, 256, 5120, functions::schwefel,
                                    true));
        v.push_back(make_definition("himmelblau", "f10", "Himmelblau", "(x1^2 + x2 - 11)^2 + (x1 + x2^2 - 7)^2",
                                    Direction::Minimize, -6.0, 6.0, 2, 4, 16, 320, functions::himmelblau));
        auto bird = make_definition("bird", "f11", "Bird",
                                    "sin(x1)exp((1-cos x2)^2) + cos(x2)exp((1-sin x1)^2) + (x1-x2)^2",
                                    Direction::Minimize, -2.0 * pi, 2.0 * pi, 2, 4, 16, 320, functions::bird);
        bird.m = 6;
        v.push_back(std::move(bird));
        v.push_back(make_definition("rastrigin2d", "f12", "Rastrigin 2-D",
                                    "20 + x1^2 + x2^2 - 10(cos(2*pi*x1) + cos(2*pi*x2))", Direction::Minimize, -5.12,
                                    5.12, 2, 121, 484, 9680, functions::rastrigin));
        v.push_back(make_definition("cosine_mixture", "f13", "Cosine Mixture",
                                    "x1^2 + x2^2 - 0.1cos(5*pi*x1) - 0.1cos(5*pi*x2)", Direction::Minimize,
                                    -1.0, 1.0, 2, 25, 100, 2000, functions::cosine_mixture));
        v.push_back(make_definition("cross_in_tray", "f14", "Cross-in-Tray",
                                    "-(1e-4(|sin x1 sin x2 exp(|100 - r/pi|)| + 1))^0.1", Direction::Minimize, -9.5,
                                    9.5, 2, 36, 144, 2880, functions::cross_in_tray));
        v.push_back(make_definition("vincent2d", "f15", "Vincent 2-D", "-(sin(10 log x1) + sin(10 log x2))",
                                    Direction::Minimize, 0.25, 10.0, 2, 36, 144, 2880, functions::vincent));
        v.push_back(make_definition("holder_table", "f16", "Holder Table", "-|sin x1 cos x2 exp(|1 - r/pi|)|",
                                    Direction::Minimize, -10.0, 10.0, 2, 56, 224, 4480, functions::holder_table,
                                    true));
        auto pen = make_definition("pen_holder", "f17", "Pen Holder", "-exp(-|cos x1 cos x2 exp(|1 - r/pi|)|^-1)",
                                   Direction::Minimize, -11.0, 11.0, 2, 49, 196, 3920, functions::pen_holder);
        pen.m = 53;  // the kink at r = pi splits the four basins next to the axes
        v.push_back(std::move(pen));
        v.push_back(make_definition("egg_crate", "f18", "Egg Crate", "x1^2 + x2^2 + 25(sin^2 x1 + sin^2 x2)",
                                    Direction::Minimize, -5.0, 5.0, 2, 9, 36, 720, functions::egg_crate));
        v.push_back(make_definition("griewank_min", "f19", "Griewank (min)",
                                    "(x1^2 + x2^2)/4000 - cos(x1)cos(x2/sqrt(2)) + 1", Direction::Minimize, -50.0,
                                    50.0, 2, 379, 1516, 30320, functions::griewank, true));
        auto gmax = make_definition("griewank_max", "f20", "Griewank (max)",
                                    "-(x1^2 + x2^2)/4000 + cos(x1)cos(x2/sqrt(2)) - 1", Direction::Maximize, -50.0,
                                    50.0, 2, 379, 1516, 30320,
                                    [](std::span<const double> x) { return -functions::griewank(x); }, true);
        gmax.data_source = "griewank_min";
        gmax.negate_data = true;
        v.push_back(std::move(gmax));
        return v;
    }();
    return defs;
}

/// Problems registered in addition to the table (five equal peaks, used for
/// the peak-ratio / success-ratio metrics).
inline const std::vector<FunctionDefinition>& extra_definitions() {
    static const std::vector<FunctionDefinition> defs = [] {
        std::vector<FunctionDefinition> v;
        v.push_back(detail::make_definition("equal_maxima", "", "Equal Maxima", "sin(5*pi*x)^6", Direction::Maximize,
                                            0.0, 1.0, 1, 5, 10, 200, functions::equal_maxima));
        return v;
    }();
    return defs;
}

inline const FunctionDefinition* find_definition(std::string_view id) {
    for (const auto* list : {&table2_definitions(), &extra_definitions()}) {
        for (const auto& def : *list) {
            if (def.id == id || (!def.alias.empty() && def.alias == id)) {
                return &def;
            }
        }
    }
    return nullptr;
}

// ---------------------------------------------------------------------------
// Ground truth files
// ---------------------------------------------------------------------------

struct GroundTruth {
    std::string id;
    Point lower;
    Point upper;
    Direction direction = Direction::Minimize;
    std::size_t m = 0;
    double detection_radius = 0.0;
    std::vector<Point> optima;
    std::vector<double> objective_at_optima;

    bool operator==(const GroundTruth&) const = default;
};

inline void to_json(nlohmann::json& j, const GroundTruth& gt) {
    j = nlohmann::json{{"id", gt.id},
                       {"bounds", {{"lower", gt.lower}, {"upper", gt.upper}}},
                       {"direction", std::string(to_string(gt.direction))},
                       {"m", gt.m},
                       {"detection_radius", gt.detection_radius},
                       {"optima", gt.optima},
                       {"objective_at_optima", gt.objective_at_optima}};
}

inline void from_json(const nlohmann::json& j, GroundTruth& gt) {
    j.at("id").get_to(gt.id);
    j.at("bounds").at("lower").get_to(gt.lower);
    j.at("bounds").at("upper").get_to(gt.upper);
    gt.direction = parse_direction(j.at("direction").get<std::string>());
    j.at("m").get_to(gt.m);
    j.at("detection_radius").get_to(gt.detection_radius);
    j.at("optima").get_to(gt.optima);
    j.at("objective_at_optima").get_to(gt.objective_at_optima);
    if (gt.optima.size() != gt.m || gt.objective_at_optima.size() != gt.m) {
        throw std::runtime_error("ground truth '" + gt.id + "': optima count does not match m");
    }
}

inline GroundTruth read_ground_truth(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open ground truth file " + path.string());
    }
    return nlohmann::json::parse(in).get<GroundTruth>();
}

inline void write_ground_truth(const std::filesystem::path& path, const GroundTruth& gt) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write ground truth file " + path.string());
    }
    out << nlohmann::json(gt).dump(2) << '\n';
}

inline std::filesystem::path default_data_dir() {
    if (const char* env = std::getenv("KBBBC_DATA_DIR"); env != nullptr && *env != '\0') {
        return env;
    }
    return KBBBC_DEFAULT_DATA_DIR;
}

/// 0.4 x the smallest pairwise distance between optima (the whole box
/// diagonal when there is a single optimum).
inline double derive_detection_radius(std::span<const Point> optima, const Bounds& bounds) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < optima.size(); ++i) {
        for (std::size_t j = i + 1; j < optima.size(); ++j) {
            best = std::min(best, euclidean_distance(optima[i], optima[j]));
        }
    }
    if (!std::isfinite(best)) {
        double diag = 0.0;
        for (std::size_t i = 0; i < bounds.dim(); ++i) {
            diag += bounds.width(i) * bounds.width(i);
        }
        best = std::sqrt(diag);
    }
    return 0.4 * best;
}

// ---------------------------------------------------------------------------
// Oracle
// ---------------------------------------------------------------------------

struct OracleConfig {
    std::size_t grid_points_per_dim = 0;  // 0 picks a default for the dimension
    double refine_tolerance = 1e-11;      // final step of the local search, relative to box width
    std::size_t refine_max_iters = 200000;
    bool boundary_optima = false;
    double merge_tolerance = 1e-6;        // relative to box width

    static OracleConfig for_definition(const FunctionDefinition& def) {
        OracleConfig cfg;
        cfg.boundary_optima = def.boundary_optima;
        return cfg;
    }

    std::size_t grid_for(std::size_t dim) const {
        if (grid_points_per_dim != 0) {
            return grid_points_per_dim;
        }
        return dim == 1 ? 200001 : 2001;
    }
};

/// The oracle found a different number of optima than expected.
class OracleMismatch : public std::runtime_error {
public:
    OracleMismatch(const std::string& id, std::size_t expected, std::vector<Point> found)
        : std::runtime_error(describe(id, expected, found)), found_(std::move(found)) {}

    const std::vector<Point>& found() const { return found_; }

private:
    static std::string describe(const std::string& id, std::size_t expected, const std::vector<Point>& found) {
        std::string msg = "oracle for '" + id + "' found " + std::to_string(found.size()) + " optima, expected " +
                          std::to_string(expected) + ":";
        for (const auto& p : found) {
            msg += ' ' + format_point(p);
        }
        return msg;
    }

    std::vector<Point> found_;
};

struct OracleResult {
    std::vector<Point> optima;
    std::vector<double> values;
};

namespace detail {

/// Compass search: try +/- step along each coordinate, shrink the steps when
/// no move improves. Points stay inside the box.
inline Point compass_refine(const Objective& f, Direction dir, const Bounds& bounds, Point x, double initial_step,
                            double tolerance, std::size_t max_iters) {
    const std::size_t dim = x.size();
    std::vector<double> step(dim);
    for (std::size_t t = 0; t < dim; ++t) {
        step[t] = initial_step * bounds.width(t);
    }
    double fx = f(x);
    for (std::size_t iter = 0; iter < max_iters; ++iter) {
        bool moved = false;
        for (std::size_t t = 0; t < dim; ++t) {
            for (double sign : {1.0, -1.0}) {
                Point y = x;
                y[t] = std::clamp(x[t] + sign * step[t], bounds.lower(t), bounds.upper(t));
                if (y[t] == x[t]) {
                    continue;
                }
                const double fy = f(y);
                if (is_better(fy, fx, dir)) {
                    x = std::move(y);
                    fx = fy;
                    moved = true;
                    break;
                }
            }
        }
        if (!moved) {
            bool done = true;
            for (std::size_t t = 0; t < dim; ++t) {
                step[t] *= 0.5;
                if (step[t] > tolerance * bounds.width(t)) {
                    done = false;
                }
            }
            if (done) {
                break;
            }
        }
    }
    return x;
}

inline bool on_boundary(std::span<const double> x, const Bounds& bounds, double tol) {
    for (std::size_t t = 0; t < x.size(); ++t) {
        const double slack = tol * bounds.width(t);
        if (x[t] <= bounds.lower(t) + slack || x[t] >= bounds.upper(t) - slack) {
            return true;
        }
    }
    return false;
}

}  // namespace detail

/// Regenerates the optima of a 1-D or 2-D problem: a dense grid scan marks
/// discrete local optima (ties broken by grid order so a plateau yields one
/// seed), each seed is refined by compass search, and near-duplicates are
/// merged. Optima on the box boundary are kept only with `boundary_optima`.
/// Throws OracleMismatch when the count differs from `spec.m`.
inline OracleResult oracle_find_optima(const ProblemSpec& spec, const OracleConfig& cfg) {
    const std::size_t dim = spec.dim();
    if (dim > 2) {
        throw ConfigError("oracle_find_optima: exhaustive grid mode supports d <= 2; use the separable oracle");
    }
    const std::size_t g = cfg.grid_for(dim);
    if (g < 3) {
        throw ConfigError("oracle_find_optima: grid_points_per_dim must be >= 3");
    }
    const auto& b = spec.bounds;
    auto coord = [&](std::size_t t, std::size_t i) {
        return i + 1 == g ? b.upper(t)
                          : b.lower(t) + b.width(t) * static_cast<double>(i) / static_cast<double>(g - 1);
    };

    const std::size_t cells = dim == 1 ? g : g * g;
    std::vector<double> values(cells);
    Point x(dim);
    for (std::size_t c = 0; c < cells; ++c) {
        x[0] = coord(0, c % g);
        if (dim == 2) {
            x[1] = coord(1, c / g);
        }
        values[c] = evaluate_point(spec, x);
    }

    // Strictly better than a neighbour, or equal and earlier in grid order.
    auto wins = [&](std::size_t a, std::size_t nb) {
        return is_better(values[a], values[nb], spec.direction) || (values[a] == values[nb] && a < nb);
    };

    std::vector<Point> seeds;
    for (std::size_t c = 0; c < cells; ++c) {
        const long i = static_cast<long>(c % g);
        const long j = dim == 2 ? static_cast<long>(c / g) : 0;
        bool is_opt = true;
        for (long dj = (dim == 2 ? -1 : 0); dj <= (dim == 2 ? 1 : 0) && is_opt; ++dj) {
            for (long di = -1; di <= 1; ++di) {
                if (di == 0 && dj == 0) {
                    continue;
                }
                const long ni = i + di;
                const long nj = j + dj;
                if (ni < 0 || nj < 0 || ni >= static_cast<long>(g) || nj >= static_cast<long>(g)) {
                    continue;
                }
                if (!wins(c, static_cast<std::size_t>(nj) * g + static_cast<std::size_t>(ni))) {
                    is_opt = false;
                    break;
                }
            }
        }
        if (is_opt) {
            Point seed(dim);
            seed[0] = coord(0, static_cast<std::size_t>(i));
            if (dim == 2) {
                seed[1] = coord(1, static_cast<std::size_t>(j));
            }
            seeds.push_back(std::move(seed));
        }
    }

    const double grid_step = 1.0 / static_cast<double>(g - 1);
    std::vector<Point> refined;
    std::vector<double> refined_values;
    for (const auto& seed : seeds) {
        Point z = detail::compass_refine(spec.objective, spec.direction, b, seed, grid_step, cfg.refine_tolerance,
                                         cfg.refine_max_iters);
        if (!cfg.boundary_optima && detail::on_boundary(z, b, 1e-9)) {
            continue;
        }
        const double fz = evaluate_point(spec, z);
        double width = 0.0;
        for (std::size_t t = 0; t < dim; ++t) {
            width = std::max(width, b.width(t));
        }
        bool merged = false;
        for (std::size_t r = 0; r < refined.size(); ++r) {
            if (euclidean_distance(refined[r], z) <= cfg.merge_tolerance * width) {
                if (is_better(fz, refined_values[r], spec.direction)) {
                    refined[r] = z;
                    refined_values[r] = fz;
                }
                merged = true;
                break;
            }
        }
        if (!merged) {
            refined.push_back(std::move(z));
            refined_values.push_back(fz);
        }
    }

    std::vector<std::size_t> order(refined.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t c) { return refined[a] < refined[c]; });
    OracleResult out;
    for (auto idx : order) {
        out.optima.push_back(refined[idx]);
        out.values.push_back(refined_values[idx]);
    }
    if (out.optima.size() != spec.m) {
        throw OracleMismatch(spec.id, spec.m, out.optima);
    }
    return out;
}

/// Optima of a separable objective sum_i term_i(x_i): the Cartesian product
/// of the per-coordinate 1-D optima. `terms[i]` is a 1-D problem whose m is
/// the expected number of optima along coordinate i.
inline OracleResult oracle_find_optima_separable(std::span<const ProblemSpec> terms, const OracleConfig& cfg) {
    std::vector<OracleResult> per_axis;
    for (const auto& term : terms) {
        if (term.dim() != 1) {
            throw ConfigError("separable oracle: every term must be one-dimensional");
        }
        per_axis.push_back(oracle_find_optima(term, cfg));
    }
    OracleResult out;
    out.optima.push_back({});
    out.values.push_back(0.0);
    for (const auto& axis : per_axis) {
        OracleResult next;
        for (std::size_t p = 0; p < out.optima.size(); ++p) {
            for (std::size_t a = 0; a < axis.optima.size(); ++a) {
                Point z = out.optima[p];
                z.push_back(axis.optima[a][0]);
                next.optima.push_back(std::move(z));
                next.values.push_back(out.values[p] + axis.values[a]);
            }
        }
        out = std::move(next);
    }
    return out;
}

/// Every sampled point within radius / 2 of z (a (2s+1)^d grid, clipped to
/// the box) is worse than or equal to z, up to a relative slack.
inline bool is_local_optimum(const ProblemSpec& spec, std::span<const double> z, double radius, int s = 4) {
    const std::size_t dim = spec.dim();
    const double fz = evaluate_point(spec, z);
    const double slack = 1e-12 * std::max(1.0, std::abs(fz));
    const double h = radius / 2.0 / static_cast<double>(s);
    std::vector<int> offset(dim, -s);
    while (true) {
        Point y(z.begin(), z.end());
        bool inside = true;
        for (std::size_t t = 0; t < dim; ++t) {
            y[t] += h * offset[t];
            if (y[t] < spec.bounds.lower(t) || y[t] > spec.bounds.upper(t)) {
                inside = false;
            }
        }
        if (inside) {
            const double fy = evaluate_point(spec, y);
            if (is_better(fy, fz, spec.direction) && std::abs(fy - fz) > slack) {
                return false;
            }
        }
        std::size_t t = 0;
        while (t < dim && ++offset[t] > s) {
            offset[t] = -s;
            ++t;
        }
        if (t == dim) {
            break;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// Registry
// ---------------------------------------------------------------------------

enum class OptimaSource { DataFile, OracleComputed };

struct BenchmarkEntry {
    ProblemSpec spec;
    std::vector<Point> known_optima;
    std::vector<double> objective_at_optima;
    OptimaSource source = OptimaSource::DataFile;
    std::size_t k = 0;  // 2md
    std::size_t n = 0;  // 20k
};

/// Problem spec for a definition; the detection radius is filled in once the
/// ground truth is known (a unit placeholder until then).
inline ProblemSpec spec_from_definition(const FunctionDefinition& def) {
    return ProblemSpec{def.id, def.objective, def.direction, def.bounds(), def.m, 1.0};
}

inline GroundTruth ground_truth_from_oracle(const FunctionDefinition& def, const OracleResult& found) {
    GroundTruth gt;
    gt.id = def.id;
    gt.lower = def.bounds().lower();
    gt.upper = def.bounds().upper();
    gt.direction = def.direction;
    gt.m = def.m;
    gt.optima = found.optima;
    gt.objective_at_optima = found.values;
    gt.detection_radius = derive_detection_radius(gt.optima, def.bounds());
    return gt;
}

inline std::filesystem::path ground_truth_path(const std::filesystem::path& data_dir, std::string_view id) {
    return data_dir / (std::string(id) + ".json");
}

inline BenchmarkEntry load_benchmark(const FunctionDefinition& def,
                                     const std::filesystem::path& data_dir = default_data_dir()) {
    const auto gt = read_ground_truth(ground_truth_path(data_dir, def.data_id()));
    if (gt.m != def.m || gt.lower.size() != def.d) {
        throw std::runtime_error("ground truth file for '" + def.id + "' does not match its definition");
    }
    const std::size_t k = derive_k(def.m, def.d);
    BenchmarkEntry entry{spec_from_definition(def), gt.optima, gt.objective_at_optima, OptimaSource::DataFile, k,
                         derive_n(k)};
    entry.spec.detection_radius = gt.detection_radius;
    if (def.negate_data) {
        for (auto& v : entry.objective_at_optima) {
            v = -v;
        }
    }
    return entry;
}

inline std::vector<BenchmarkEntry> register_table2_functions(const std::filesystem::path& data_dir = default_data_dir()) {
    std::vector<BenchmarkEntry> out;
    for (const auto& def : table2_definitions()) {
        out.push_back(load_benchmark(def, data_dir));
    }
    return out;
}

/// The scalable sum-of-Key-terms problem on [0, 1]^d with 48 minima.
inline BenchmarkEntry make_highdim_problem(std::size_t d) {
    const auto j = functions::highdim_indices(d);
    std::vector<double> weights(j.begin(), j.end());

    BenchmarkEntry entry{ProblemSpec{"highdim" + std::to_string(d),
                                     [weights](std::span<const double> x) {
                                         double sum = 0.0;
                                         for (std::size_t i = 0; i < x.size(); ++i) {
                                             sum += functions::key_term(x[i], weights[i]);
                                         }
                                         return sum;
                                     },
                                     Direction::Minimize, Bounds::uniform(d, 0.0, 1.0), 48, 1.0},
                         {},
                         {},
                         OptimaSource::OracleComputed,
                         0,
                         0};

    std::vector<ProblemSpec> terms;
    for (int ji : j) {
        const double w = ji;
        terms.push_back(ProblemSpec{"key_term_j" + std::to_string(ji),
                                    [w](std::span<const double> x) { return functions::key_term(x[0], w); },
                                    Direction::Minimize, Bounds::uniform(1, 0.0, 1.0),
                                    static_cast<std::size_t>(ji), 1.0});
    }
    OracleConfig cfg;
    cfg.grid_points_per_dim = 20001;
    const auto found = oracle_find_optima_separable(terms, cfg);
    entry.known_optima = found.optima;
    entry.objective_at_optima = found.values;
    entry.spec.detection_radius = derive_detection_radius(entry.known_optima, entry.spec.bounds);
    entry.k = derive_k(48, d);
    entry.n = derive_n(entry.k);
    return entry;
}

/// Resolves a registry id or alias; "highdim" (optionally with the dimension
/// appended, e.g. "highdim8") selects the scalable problem.
inline BenchmarkEntry resolve_benchmark(std::string_view id, std::size_t d = 0,
                                        const std::filesystem::path& data_dir = default_data_dir()) {
    if (id.starts_with("highdim")) {
        std::size_t dim = d;
        if (id.size() > 7) {
            dim = static_cast<std::size_t>(std::stoul(std::string(id.substr(7))));
        }
        if (dim == 0) {
            throw ConfigError("highdim problem needs a dimension (--d)");
        }
        return make_highdim_problem(dim);
    }
    const auto* def = find_definition(id);
    if (def == nullptr) {
        throw ConfigError("unknown function '" + std::string(id) + "'");
    }
    return load_benchmark(*def, data_dir);
}

}  // namespace kbbbc
