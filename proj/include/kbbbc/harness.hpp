#pragma once

#include "kbbbc/benchmarks.hpp"
#include "kbbbc/core.hpp"
#include "kbbbc/metrics.hpp"
#include "kbbbc/optimizer.hpp"
#include "kbbbc/postprocess.hpp"
#include "kbbbc/rng.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace kbbbc {

inline constexpr int result_schema_version = 1;

struct ExperimentConfig {
    std::string function_id;
    std::size_t d = 0;  // only for the highdim family
    std::size_t runs = 25;
    std::size_t generations = 1000;
    bool elitist = false;
    std::uint64_t seed = 0;
    std::optional<std::size_t> k;
    std::optional<std::size_t> n;
    NoiseKind noise = NoiseKind::Normal;
    BoundaryPolicy boundary = BoundaryPolicy::Clamp;
    double slope_threshold = 0.1;
    double epsilon = 1e-4;  // accuracy level for the peak ratio
    std::filesystem::path output_dir = "results";
    std::filesystem::path data_dir = default_data_dir();
    bool deterministic = false;
    bool trace = false;
    std::size_t jobs = 1;
    bool verbose = false;

    void validate() const {
        if (function_id.empty()) {
            throw ConfigError("no function selected");
        }
        if (runs < 1) {
            throw ConfigError("runs must be >= 1");
        }
        if (generations < 1) {
            throw ConfigError("generations must be >= 1");
        }
        if (!(slope_threshold > 0.0)) {
            throw ConfigError("slope threshold must be > 0");
        }
        if (!(epsilon > 0.0)) {
            throw ConfigError("epsilon must be > 0");
        }
        if (jobs < 1) {
            throw ConfigError("jobs must be >= 1");
        }
    }
};

/// The settings that determine a run's outcome, echoed into every output file.
struct ConfigEcho {
    std::string function_id;
    std::size_t d = 0;
    std::size_t runs = 0;
    std::size_t generations = 0;
    bool elitist = false;
    std::uint64_t seed = 0;
    std::size_t k = 0;
    std::size_t n = 0;
    NoiseKind noise = NoiseKind::Normal;
    BoundaryPolicy boundary = BoundaryPolicy::Clamp;
    double slope_threshold = 0.1;
    double epsilon = 1e-4;

    std::string variant() const { return elitist ? "E-k-BBBC" : "k-BBBC"; }

    /// Same per-run outcome; the run count may differ.
    bool same_run_settings(const ConfigEcho& o) const {
        return function_id == o.function_id && d == o.d && generations == o.generations && elitist == o.elitist &&
               seed == o.seed && k == o.k && n == o.n && noise == o.noise && boundary == o.boundary &&
               slope_threshold == o.slope_threshold && epsilon == o.epsilon;
    }

    bool operator==(const ConfigEcho&) const = default;
};

struct ProblemEcho {
    std::string id;
    std::size_t d = 0;
    std::size_t m = 0;
    Direction direction = Direction::Minimize;
    double detection_radius = 0.0;

    bool operator==(const ProblemEcho&) const = default;
};

struct RunRecord {
    std::uint64_t seed = 0;
    RunMetrics metrics;
    std::vector<Individual> identified;
    std::size_t m_c = 0;
    std::size_t m_m = 0;
    std::vector<double> silhouette;  // E(k) for k = 2 .. m
    std::size_t unconverged_kmeans = 0;
};

struct RunFailure {
    std::uint64_t seed = 0;
    std::string error;
};

struct ResultRecord {
    int schema = result_schema_version;
    ConfigEcho config;
    ProblemEcho problem;
    std::vector<RunRecord> runs;
    std::vector<RunFailure> failures;
    std::size_t total_peaks = 0;  // global peaks behind peak_ratio / success_ratio
    CampaignMetrics aggregate;
};

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

inline void to_json(nlohmann::json& j, const ConfigEcho& c) {
    j = nlohmann::json{{"function", c.function_id},
                       {"d", c.d},
                       {"runs", c.runs},
                       {"generations", c.generations},
                       {"elitist", c.elitist},
                       {"seed", c.seed},
                       {"k", c.k},
                       {"n", c.n},
                       {"noise", std::string(to_string(c.noise))},
                       {"boundary", std::string(to_string(c.boundary))},
                       {"slope_threshold", c.slope_threshold},
                       {"epsilon", c.epsilon}};
}

inline void from_json(const nlohmann::json& j, ConfigEcho& c) {
    j.at("function").get_to(c.function_id);
    j.at("d").get_to(c.d);
    j.at("runs").get_to(c.runs);
    j.at("generations").get_to(c.generations);
    j.at("elitist").get_to(c.elitist);
    j.at("seed").get_to(c.seed);
    j.at("k").get_to(c.k);
    j.at("n").get_to(c.n);
    c.noise = parse_noise(j.at("noise").get<std::string>());
    c.boundary = parse_boundary(j.at("boundary").get<std::string>());
    j.at("slope_threshold").get_to(c.slope_threshold);
    j.at("epsilon").get_to(c.epsilon);
}

inline void to_json(nlohmann::json& j, const ProblemEcho& p) {
    j = nlohmann::json{{"id", p.id},
                       {"d", p.d},
                       {"m", p.m},
                       {"direction", std::string(to_string(p.direction))},
                       {"detection_radius", p.detection_radius}};
}

inline void from_json(const nlohmann::json& j, ProblemEcho& p) {
    j.at("id").get_to(p.id);
    j.at("d").get_to(p.d);
    j.at("m").get_to(p.m);
    p.direction = parse_direction(j.at("direction").get<std::string>());
    j.at("detection_radius").get_to(p.detection_radius);
}

inline void to_json(nlohmann::json& j, const RunMetrics& m) {
    j = nlohmann::json{{"a_src", m.a_src},
                       {"a_obj", m.a_obj},
                       {"detected", m.detected},
                       {"success_actual", m.success_actual},
                       {"success_quantified", m.success_quantified},
                       {"evaluations", m.evaluations},
                       {"runtime_seconds", m.runtime_seconds},
                       {"peaks_found", m.peaks_found}};
}

inline void from_json(const nlohmann::json& j, RunMetrics& m) {
    j.at("a_src").get_to(m.a_src);
    j.at("a_obj").get_to(m.a_obj);
    j.at("detected").get_to(m.detected);
    j.at("success_actual").get_to(m.success_actual);
    j.at("success_quantified").get_to(m.success_quantified);
    j.at("evaluations").get_to(m.evaluations);
    j.at("runtime_seconds").get_to(m.runtime_seconds);
    j.at("peaks_found").get_to(m.peaks_found);
}

inline void to_json(nlohmann::json& j, const RunRecord& r) {
    nlohmann::json points = nlohmann::json::array();
    for (const auto& ind : r.identified) {
        points.push_back({{"x", ind.x}, {"f", ind.fitness.value_or(std::nan(""))}});
    }
    j = nlohmann::json{{"seed", r.seed},
                       {"metrics", r.metrics},
                       {"identified", points},
                       {"quantification", {{"m_c", r.m_c}, {"m_m", r.m_m}, {"silhouette", r.silhouette}}},
                       {"unconverged_kmeans", r.unconverged_kmeans}};
}

inline void from_json(const nlohmann::json& j, RunRecord& r) {
    j.at("seed").get_to(r.seed);
    j.at("metrics").get_to(r.metrics);
    r.identified.clear();
    for (const auto& p : j.at("identified")) {
        r.identified.push_back(Individual{p.at("x").get<Point>(), p.at("f").get<double>()});
    }
    const auto& q = j.at("quantification");
    q.at("m_c").get_to(r.m_c);
    q.at("m_m").get_to(r.m_m);
    q.at("silhouette").get_to(r.silhouette);
    j.at("unconverged_kmeans").get_to(r.unconverged_kmeans);
}

inline void to_json(nlohmann::json& j, const Summary& s) { j = nlohmann::json{{"mean", s.mean}, {"std", s.std}}; }

inline void from_json(const nlohmann::json& j, Summary& s) {
    j.at("mean").get_to(s.mean);
    j.at("std").get_to(s.std);
}

inline void to_json(nlohmann::json& j, const CampaignMetrics& a) {
    j = nlohmann::json{{"runs", a.runs},
                       {"a_src", a.a_src},
                       {"a_obj", a.a_obj},
                       {"detected", a.detected},
                       {"success_actual", a.success_actual},
                       {"success_quantified", a.success_quantified},
                       {"evaluations", a.evaluations},
                       {"runtime_seconds", a.runtime_seconds},
                       {"peak_ratio", a.peak_ratio},
                       {"success_ratio", a.success_ratio}};
}

inline void from_json(const nlohmann::json& j, CampaignMetrics& a) {
    j.at("runs").get_to(a.runs);
    j.at("a_src").get_to(a.a_src);
    j.at("a_obj").get_to(a.a_obj);
    j.at("detected").get_to(a.detected);
    j.at("success_actual").get_to(a.success_actual);
    j.at("success_quantified").get_to(a.success_quantified);
    j.at("evaluations").get_to(a.evaluations);
    j.at("runtime_seconds").get_to(a.runtime_seconds);
    j.at("peak_ratio").get_to(a.peak_ratio);
    j.at("success_ratio").get_to(a.success_ratio);
}

inline void to_json(nlohmann::json& j, const ResultRecord& r) {
    nlohmann::json failures = nlohmann::json::array();
    for (const auto& f : r.failures) {
        failures.push_back({{"seed", f.seed}, {"error", f.error}});
    }
    j = nlohmann::json{{"schema", r.schema},     {"config", r.config},       {"problem", r.problem},
                       {"runs", r.runs},         {"failures", failures},     {"total_peaks", r.total_peaks},
                       {"aggregate", r.aggregate}};
}

/// Drops the wall-clock fields, which are the only non-reproducible part of a record.
inline nlohmann::json without_runtime(nlohmann::json j) {
    if (j.is_object()) {
        j.erase("runtime_seconds");
        for (auto& [key, value] : j.items()) {
            value = without_runtime(value);
        }
    } else if (j.is_array()) {
        for (auto& value : j) {
            value = without_runtime(value);
        }
    }
    return j;
}

/// Total peaks used for PR / SR: the known optima whose value is within
/// epsilon of the best one.
inline std::vector<std::size_t> global_peak_indices(const BenchmarkEntry& entry, double epsilon) {
    const auto& values = entry.objective_at_optima;
    std::vector<std::size_t> out;
    if (values.empty()) {
        return out;
    }
    double best = values.front();
    for (double v : values) {
        if (is_better(v, best, entry.spec.direction)) {
            best = v;
        }
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (std::abs(values[i] - best) <= epsilon) {
            out.push_back(i);
        }
    }
    return out;
}

/// Recomputes the aggregate from the per-run rows and compares it with the
/// stored one to 1e-12 relative.
inline bool aggregates_consistent(const ResultRecord& record, std::size_t total_peaks) {
    std::vector<RunMetrics> rows;
    for (const auto& r : record.runs) {
        rows.push_back(r.metrics);
    }
    const auto fresh = CampaignMetrics::from_runs(rows, total_peaks);
    auto close = [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)}); };
    auto same = [&](const Summary& a, const Summary& b) { return close(a.mean, b.mean) && close(a.std, b.std); };
    const auto& s = record.aggregate;
    return fresh.runs == s.runs && same(fresh.a_src, s.a_src) && same(fresh.a_obj, s.a_obj) &&
           same(fresh.detected, s.detected) && same(fresh.success_actual, s.success_actual) &&
           same(fresh.success_quantified, s.success_quantified) && same(fresh.evaluations, s.evaluations) &&
           same(fresh.runtime_seconds, s.runtime_seconds) && close(fresh.peak_ratio, s.peak_ratio) &&
           close(fresh.success_ratio, s.success_ratio);
}

/// Parses a result document. Rejects unknown schema versions and
/// aggregates that do not match the per-run rows.
inline ResultRecord result_from_json(const nlohmann::json& j) {
    ResultRecord r;
    r.schema = j.at("schema").get<int>();
    if (r.schema != result_schema_version) {
        throw ConfigError("unsupported result schema " + std::to_string(r.schema));
    }
    j.at("config").get_to(r.config);
    j.at("problem").get_to(r.problem);
    j.at("runs").get_to(r.runs);
    for (const auto& f : j.at("failures")) {
        r.failures.push_back(RunFailure{f.at("seed").get<std::uint64_t>(), f.at("error").get<std::string>()});
    }
    j.at("aggregate").get_to(r.aggregate);
    j.at("total_peaks").get_to(r.total_peaks);
    if (!aggregates_consistent(r, r.total_peaks)) {
        throw std::runtime_error("result record: stored aggregates do not match the per-run rows");
    }
    return r;
}

inline ResultRecord read_result(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open result file " + path.string());
    }
    return result_from_json(nlohmann::json::parse(in));
}

namespace detail {

/// Write-then-rename so an interrupted campaign never leaves a torn file.
inline void write_file_atomically(const std::filesystem::path& path, const std::string& text) {
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot write " + tmp);
        }
        out << text;
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Campaign
// ---------------------------------------------------------------------------

inline ConfigEcho resolve_config(const ExperimentConfig& cfg, const BenchmarkEntry& entry) {
    ConfigEcho echo;
    echo.function_id = cfg.function_id;
    echo.d = entry.spec.dim();
    echo.runs = cfg.runs;
    echo.generations = cfg.generations;
    echo.elitist = cfg.elitist;
    echo.seed = cfg.seed;
    echo.k = cfg.k.value_or(entry.k);
    echo.n = cfg.n.value_or(cfg.k ? derive_n(*cfg.k) : entry.n);
    echo.noise = cfg.noise;
    echo.boundary = cfg.boundary;
    echo.slope_threshold = cfg.slope_threshold;
    echo.epsilon = cfg.epsilon;
    return echo;
}

inline KbbbcConfig optimizer_config(const ConfigEcho& echo, const BenchmarkEntry& entry, std::uint64_t seed) {
    KbbbcConfig kc;
    kc.m = entry.spec.m;
    kc.d = entry.spec.dim();
    kc.k = echo.k;
    kc.n = echo.n;
    kc.generations = echo.generations;
    kc.elitist = echo.elitist;
    kc.seed = seed;
    kc.bang.noise = echo.noise;
    kc.bang.boundary = echo.boundary;
    return kc;
}

/// One optimizer run followed by identification, quantification and scoring.
/// With `trace_path` set, every generation's population and centers are
/// appended to a CSV file.
inline RunRecord execute_run(const BenchmarkEntry& entry, const ConfigEcho& echo, std::uint64_t seed,
                             const std::filesystem::path* trace_path = nullptr) {
    const auto start = std::chrono::steady_clock::now();
    const auto& spec = entry.spec;
    const KbbbcConfig kc = optimizer_config(echo, entry, seed);

    std::ofstream trace_out;
    TraceHook hook;
    if (trace_path != nullptr) {
        trace_out.open(*trace_path, std::ios::trunc);
        if (!trace_out) {
            throw std::runtime_error("cannot write trace file " + trace_path->string());
        }
        trace_out << "generation,kind,index,cluster,fitness";
        for (std::size_t t = 0; t < spec.dim(); ++t) {
            trace_out << ",x" << t;
        }
        trace_out << '\n';
        hook = [&trace_out](const GenerationSnapshot& snap) {
            char buf[32];
            auto row = [&](const char* kind, std::size_t idx, std::size_t cluster, const Individual& ind) {
                trace_out << snap.generation << ',' << kind << ',' << idx << ',' << cluster;
                std::snprintf(buf, sizeof buf, ",%.17g", ind.fitness.value_or(std::nan("")));
                trace_out << buf;
                for (double v : ind.x) {
                    std::snprintf(buf, sizeof buf, ",%.17g", v);
                    trace_out << buf;
                }
                trace_out << '\n';
            };
            for (std::size_t i = 0; i < snap.population.size(); ++i) {
                row("population", i, snap.assignment.labels[i], snap.population.members[i]);
            }
            for (std::size_t c = 0; c < snap.centers.size(); ++c) {
                row("center", c, c, snap.centers.points[c]);
            }
        };
    }

    const auto result = run_kbbbc(spec, kc, hook);

    const RngStream master(seed);
    RngStream ident_rng = master.derive(Substream::Identification);
    const auto identified = identify_optima(result.centers.points, spec.m, spec.direction, ident_rng);
    const auto quant = quantify_missed(identified, spec.m, master.derive(Substream::Quantification), echo.slope_threshold);

    std::vector<Point> found;
    std::vector<double> found_values;
    for (const auto& ind : identified.points) {
        found.push_back(ind.x);
        found_values.push_back(*ind.fitness);
    }
    const auto pairing = match_optima(found, entry.known_optima);

    RunRecord rec;
    rec.seed = seed;
    rec.identified = identified.points;
    rec.m_c = quant.m_c;
    rec.m_m = quant.m_m;
    rec.silhouette = quant.curve.scores;
    rec.unconverged_kmeans = result.unconverged_kmeans;

    auto& m = rec.metrics;
    m.a_src = accuracy_search(found, entry.known_optima, pairing);
    m.a_obj = accuracy_objective(found, entry.known_optima, pairing,
                                 [&spec](std::span<const double> x) { return evaluate_point(spec, x); });
    m.detected = detected_count(found, entry.known_optima, spec.detection_radius);
    m.success_actual = static_cast<double>(m.detected) / static_cast<double>(spec.m);
    m.success_quantified = static_cast<double>(quant.m_c) / static_cast<double>(spec.m);
    m.evaluations = result.evaluations;

    const auto peaks = global_peak_indices(entry, echo.epsilon);
    std::vector<Point> peak_points;
    std::vector<double> peak_values;
    for (auto i : peaks) {
        peak_points.push_back(entry.known_optima[i]);
        peak_values.push_back(entry.objective_at_optima[i]);
    }
    m.peaks_found = peaks_found(found, found_values, peak_points, peak_values, spec.detection_radius, echo.epsilon);
    m.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

inline std::filesystem::path run_file(const std::filesystem::path& dir, std::uint64_t seed) {
    return dir / ("run_" + std::to_string(seed) + ".json");
}

/// A completed run stored by an earlier (possibly interrupted) campaign with
/// the same settings, if any.
inline std::optional<RunRecord> load_completed_run(const std::filesystem::path& path, const ConfigEcho& echo) {
    if (!std::filesystem::exists(path)) {
        return std::nullopt;
    }
    nlohmann::json j;
    try {
        std::ifstream in(path);
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception&) {
        return std::nullopt;  // torn or foreign file: run again
    }
    if (j.value("status", "") != "ok") {
        return std::nullopt;
    }
    const auto stored = j.at("config").get<ConfigEcho>();
    if (!stored.same_run_settings(echo)) {
        throw ConfigError("output directory holds runs with different settings: " + path.string());
    }
    return j.at("run").get<RunRecord>();
}

/// Runs `cfg.runs` seeds (base seed + r), writing one file per run as it
/// finishes and `result.json` at the end. Runs with an existing completed
/// file are loaded instead of recomputed. A failing run is recorded with its
/// seed and error and the campaign carries on.
inline ResultRecord run_campaign(const ExperimentConfig& cfg) {
    cfg.validate();
    const BenchmarkEntry entry = resolve_benchmark(cfg.function_id, cfg.d, cfg.data_dir);
    const ConfigEcho echo = resolve_config(cfg, entry);
    optimizer_config(echo, entry, cfg.seed).validate();
    std::filesystem::create_directories(cfg.output_dir);

    std::vector<std::optional<RunRecord>> done(cfg.runs);
    std::vector<std::optional<std::string>> errors(cfg.runs);
    std::mutex log_mutex;
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (std::size_t r = next++; r < cfg.runs; r = next++) {
            const std::uint64_t seed = cfg.seed + r;
            const auto path = run_file(cfg.output_dir, seed);
            try {
                if (auto loaded = load_completed_run(path, echo)) {
                    done[r] = std::move(loaded);
                    continue;
                }
                const auto trace_path = cfg.output_dir / ("trace_" + std::to_string(seed) + ".csv");
                auto rec = execute_run(entry, echo, seed, cfg.trace ? &trace_path : nullptr);
                const nlohmann::json j{{"schema", result_schema_version}, {"status", "ok"}, {"config", echo},
                                       {"run", rec}};
                detail::write_file_atomically(path, j.dump(2) + '\n');
                if (cfg.verbose) {
                    std::lock_guard lock(log_mutex);
                    std::cerr << "run seed=" << seed << " detected=" << rec.metrics.detected << '/' << entry.spec.m
                              << " m_c=" << rec.m_c << " time=" << rec.metrics.runtime_seconds << "s\n";
                }
                done[r] = std::move(rec);
            } catch (const ConfigError&) {
                throw;
            } catch (const std::exception& e) {
                errors[r] = e.what();
                const nlohmann::json j{{"schema", result_schema_version}, {"status", "failed"}, {"config", echo},
                                       {"seed", seed}, {"error", e.what()}};
                try {
                    detail::write_file_atomically(path, j.dump(2) + '\n');
                } catch (const std::exception&) {
                }
                std::lock_guard lock(log_mutex);
                std::cerr << "run seed=" << seed << " failed: " << e.what() << '\n';
            }
        }
    };

    const std::size_t jobs = cfg.deterministic ? 1 : std::min(cfg.jobs, cfg.runs);
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < jobs; ++t) {
            pool.emplace_back(worker);
        }
    }

    ResultRecord record;
    record.config = echo;
    record.problem = ProblemEcho{entry.spec.id, entry.spec.dim(), entry.spec.m, entry.spec.direction,
                                 entry.spec.detection_radius};
    std::vector<RunMetrics> rows;
    for (std::size_t r = 0; r < cfg.runs; ++r) {
        if (done[r]) {
            rows.push_back(done[r]->metrics);
            record.runs.push_back(std::move(*done[r]));
        } else {
            record.failures.push_back(RunFailure{cfg.seed + r, errors[r].value_or("unknown error")});
        }
    }
    record.total_peaks = global_peak_indices(entry, echo.epsilon).size();
    record.aggregate = CampaignMetrics::from_runs(rows, record.total_peaks);
    detail::write_file_atomically(cfg.output_dir / "result.json", nlohmann::json(record).dump(2) + '\n');
    return record;
}

/// Reruns the oracle for one registered function and rewrites its data file.
inline GroundTruth regenerate_ground_truth(std::string_view function_id, const std::filesystem::path& data_dir,
                                           std::optional<OracleConfig> oracle_cfg = std::nullopt) {
    const auto* def = find_definition(function_id);
    if (def == nullptr) {
        throw ConfigError("unknown function '" + std::string(function_id) + "'");
    }
    if (!def->data_source.empty()) {
        throw ConfigError("'" + def->id + "' shares its ground truth with '" + def->data_source + "'");
    }
    auto cfg = oracle_cfg.value_or(OracleConfig::for_definition(*def));
    cfg.boundary_optima = def->boundary_optima;
    const auto found = oracle_find_optima(spec_from_definition(*def), cfg);
    auto gt = ground_truth_from_oracle(*def, found);
    write_ground_truth(ground_truth_path(data_dir, def->id), gt);
    return gt;
}

// ---------------------------------------------------------------------------
// Export
// ---------------------------------------------------------------------------

enum class ExportFormat { Csv, Json, Markdown };

inline ExportFormat parse_export_format(std::string_view text) {
    if (text == "csv") {
        return ExportFormat::Csv;
    }
    if (text == "json") {
        return ExportFormat::Json;
    }
    if (text == "markdown" || text == "md") {
        return ExportFormat::Markdown;
    }
    throw ConfigError("unknown export format '" + std::string(text) + "' (expected csv|json|markdown)");
}

namespace detail {

inline std::string exact(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string mean_pm_std(const Summary& s, const char* fmt) {
    char a[32];
    char b[32];
    std::snprintf(a, sizeof a, fmt, s.mean);
    std::snprintf(b, sizeof b, fmt, s.std);
    return std::string(a) + " ± " + b;
}

inline void check_schemas(std::span<const ResultRecord> records) {
    for (const auto& r : records) {
        if (r.schema != records.front().schema) {
            throw ConfigError("export: records have mixed schema versions (" + std::to_string(records.front().schema) +
                              " and " + std::to_string(r.schema) + ")");
        }
    }
}

}  // namespace detail

inline const std::vector<std::string>& csv_columns() {
    static const std::vector<std::string> cols = {
        "function",           "variant",       "row",      "seed",           "a_src",
        "a_src_std",          "a_obj",         "a_obj_std", "detected",      "detected_std",
        "success_actual",     "success_actual_std",        "success_quantified", "success_quantified_std",
        "evaluations",        "evaluations_std",           "runtime_seconds",    "runtime_seconds_std",
        "peak_ratio",         "success_ratio"};
    return cols;
}

/// csv: one row per run plus one aggregate row per record, values printed
/// with 17 significant digits. json / markdown: one aggregate row per record.
inline std::string export_table(std::span<const ResultRecord> records, ExportFormat format) {
    detail::check_schemas(records);
    std::ostringstream out;
    using detail::exact;
    switch (format) {
        case ExportFormat::Csv: {
            const auto& cols = csv_columns();
            for (std::size_t c = 0; c < cols.size(); ++c) {
                out << (c ? "," : "") << cols[c];
            }
            out << '\n';
            for (const auto& rec : records) {
                const auto prefix = rec.config.function_id + ',' + rec.config.variant();
                for (const auto& run : rec.runs) {
                    const auto& m = run.metrics;
                    out << prefix << ",run," << run.seed << ',' << exact(m.a_src) << ",," << exact(m.a_obj) << ",,"
                        << m.detected << ",," << exact(m.success_actual) << ",," << exact(m.success_quantified)
                        << ",," << m.evaluations << ",," << exact(m.runtime_seconds) << ",,,\n";
                }
                const auto& a = rec.aggregate;
                auto pair = [&](const Summary& s) { return exact(s.mean) + ',' + exact(s.std); };
                out << prefix << ",aggregate,," << pair(a.a_src) << ',' << pair(a.a_obj) << ',' << pair(a.detected)
                    << ',' << pair(a.success_actual) << ',' << pair(a.success_quantified) << ','
                    << pair(a.evaluations) << ',' << pair(a.runtime_seconds) << ',' << exact(a.peak_ratio) << ','
                    << exact(a.success_ratio) << '\n';
            }
            break;
        }
        case ExportFormat::Json: {
            nlohmann::json rows = nlohmann::json::array();
            for (const auto& rec : records) {
                nlohmann::json row = rec.aggregate;
                row["schema"] = rec.schema;
                row["function"] = rec.config.function_id;
                row["variant"] = rec.config.variant();
                rows.push_back(std::move(row));
            }
            out << rows.dump(2) << '\n';
            break;
        }
        case ExportFormat::Markdown: {
            out << "| function | variant | runs | a_src | a_obj | m̄ | success (actual) | success (quantified) | "
                   "evaluations | runtime (s) |\n";
            out << "|---|---|---|---|---|---|---|---|---|---|\n";
            for (const auto& rec : records) {
                const auto& a = rec.aggregate;
                using detail::mean_pm_std;
                out << "| " << rec.config.function_id << " | " << rec.config.variant() << " | " << a.runs << " | "
                    << mean_pm_std(a.a_src, "%.2e") << " | " << mean_pm_std(a.a_obj, "%.2e") << " | "
                    << mean_pm_std(a.detected, "%.2f") << " | " << mean_pm_std(a.success_actual, "%.2f") << " | "
                    << mean_pm_std(a.success_quantified, "%.2f") << " | " << mean_pm_std(a.evaluations, "%.0f")
                    << " | " << mean_pm_std(a.runtime_seconds, "%.2f") << " |\n";
            }
            break;
        }
    }
    return out.str();
}

/// Minimal reader for the exported CSV (no quoting is ever emitted).
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

inline CsvTable parse_csv(std::string_view text) {
    CsvTable table;
    bool first = true;
    while (!text.empty()) {
        const auto end = text.find('\n');
        const auto line = text.substr(0, end);
        text = end == std::string_view::npos ? std::string_view{} : text.substr(end + 1);
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> cells;
        std::size_t pos = 0;
        while (true) {
            const auto comma = line.find(',', pos);
            cells.emplace_back(line.substr(pos, comma == std::string_view::npos ? line.size() - pos : comma - pos));
            if (comma == std::string_view::npos) {
                break;
            }
            pos = comma + 1;
        }
        if (first) {
            table.header = std::move(cells);
            first = false;
        } else {
            if (cells.size() != table.header.size()) {
                throw std::runtime_error("csv: row has " + std::to_string(cells.size()) + " cells, header has " +
                                         std::to_string(table.header.size()));
            }
            table.rows.push_back(std::move(cells));
        }
    }
    return table;
}

}  // namespace kbbbc
