// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero when any criterion fails.
//
//   kbbbc_acceptance              criteria 1-10
//   kbbbc_acceptance --only 4,6   a subset
//   kbbbc_acceptance --highdim8   also the d = 8 high-dimensional run (hours)
//
// The lines are also written to acceptance_report.txt in the working directory.

#include "kbbbc/kbbbc.hpp"
#include "support/reference.hpp"

#include <chrono>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace kbbbc;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double key4_max_mean_a_src = 1e-4;
constexpr std::uint64_t key4_evaluations = 160000;
constexpr double himmelblau_max_mean_a_src = 1e-2;
constexpr double key24_max_mean_a_obj = 1e-4;
constexpr double quantification_max_mean_gap = 0.05;
constexpr double mitigation_min_miss_rate = 0.20;
constexpr std::size_t mitigation_min_successes = 95;
constexpr double oracle_position_tolerance = 1e-9;  // relative to box width

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    std::string name;
    std::function<Outcome()> check;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

fs::path work_dir() {
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / "kbbbc_acceptance";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

ResultRecord campaign(const std::string& tag, const std::string& fn, std::size_t runs, bool elitist,
                      std::optional<std::size_t> k = std::nullopt, std::size_t d = 0) {
    ExperimentConfig cfg;
    cfg.function_id = fn;
    cfg.d = d;
    cfg.runs = runs;
    cfg.generations = 1000;
    cfg.elitist = elitist;
    cfg.seed = 1;
    cfg.k = k;
    cfg.output_dir = work_dir() / tag;
    cfg.deterministic = true;
    return run_campaign(cfg);
}

std::size_t runs_with_all_detected(const ResultRecord& rec) {
    std::size_t count = 0;
    for (const auto& r : rec.runs) {
        count += r.metrics.detected == rec.problem.m;
    }
    return count;
}

std::string ratio(std::size_t a, std::size_t b) { return std::to_string(a) + "/" + std::to_string(b); }

Outcome c1_key4() {
    const auto el = campaign("c1_elitist", "key4", 25, true);
    const auto plain = campaign("c1_plain", "key4", 25, false);
    const bool success = el.failures.empty() && el.aggregate.success_actual.mean == 1.0 &&
                         runs_with_all_detected(el) == 25;
    const bool accurate = el.aggregate.a_src.mean <= key4_max_mean_a_src;
    bool evals = plain.failures.empty() && plain.runs.size() == 25;
    for (const auto& r : plain.runs) {
        evals = evals && r.metrics.evaluations == key4_evaluations;
    }
    return {success && accurate && evals,
            "elitist success " + fmt("%.2f", el.aggregate.success_actual.mean) + ", mean a_src " +
                fmt("%.3e", el.aggregate.a_src.mean) + ", non-elitist evaluations " +
                fmt("%.0f", plain.aggregate.evaluations.mean) + " +- " +
                fmt("%.0f", plain.aggregate.evaluations.std)};
}

Outcome c2_himmelblau() {
    const auto el = campaign("c2_elitist", "himmelblau", 25, true);
    const auto plain = campaign("c2_plain", "himmelblau", 25, false);
    const auto ok_el = runs_with_all_detected(el);
    const auto ok_plain = runs_with_all_detected(plain);
    const bool pass = el.failures.empty() && plain.failures.empty() && ok_el == 25 && ok_plain == 25 &&
                      el.aggregate.a_src.mean <= himmelblau_max_mean_a_src;
    return {pass, "4/4 detected in " + ratio(ok_el, 25) + " elitist and " + ratio(ok_plain, 25) +
                      " plain runs, elitist mean a_src " + fmt("%.3e", el.aggregate.a_src.mean)};
}

Outcome c3_uneven() {
    const auto el = campaign("c3", "f1", 25, true);
    const auto ok = runs_with_all_detected(el);
    return {el.failures.empty() && ok == 25 && el.problem.direction == Direction::Maximize,
            "all maxima found in " + ratio(ok, 25) + " runs, success " +
                fmt("%.2f", el.aggregate.success_actual.mean)};
}

Outcome c4_key24() {
    const auto el = campaign("c4", "key24", 25, true);
    const auto ok = runs_with_all_detected(el);
    const bool pass = el.failures.empty() && ok == 25 && el.config.k == 48 && el.config.n == 960 &&
                      el.aggregate.a_obj.mean <= key24_max_mean_a_obj;
    return {pass, "24/24 in " + ratio(ok, 25) + " runs, mean a_obj " + fmt("%.3e", el.aggregate.a_obj.mean)};
}

Outcome c5_quantification() {
    const auto rec = campaign("c5", "key24", 25, true, 24);
    std::size_t incomplete = 0;
    double gap = 0.0;
    for (const auto& r : rec.runs) {
        incomplete += r.metrics.success_actual < 1.0;
        gap += std::abs(r.metrics.success_quantified - r.metrics.success_actual);
    }
    gap /= static_cast<double>(std::max<std::size_t>(rec.runs.size(), 1));
    const bool pass = rec.failures.empty() && rec.config.k == 24 && rec.config.n == 480 &&
                      2 * incomplete > rec.runs.size() && gap <= quantification_max_mean_gap;
    return {pass, "k=24 n=480: incomplete in " + ratio(incomplete, rec.runs.size()) +
                      " runs, mean |quantified - actual| " + fmt("%.4f", gap) + ", success actual " +
                      fmt("%.3f", rec.aggregate.success_actual.mean) + " quantified " +
                      fmt("%.3f", rec.aggregate.success_quantified.mean)};
}

Outcome c6_table() {
    std::size_t ok = 0;
    const auto& defs = table2_definitions();
    for (const auto& def : defs) {
        const bool table = def.table_k == 2 * def.table_m * def.d && def.table_n == 20 * def.table_k;
        const auto k = derive_k(def.m, def.d);
        const bool registry = k == 2 * def.m * def.d && derive_n(k) == 20 * k;
        const bool published = def.m != def.table_m || (k == def.table_k && derive_n(k) == def.table_n);
        ok += table && registry && published;
    }
    return {ok == defs.size() && defs.size() == 20, ratio(ok, defs.size()) + " rows satisfy k = 2md and n = 20k"};
}

Outcome run_highdim(std::size_t d, std::size_t runs) {
    const auto rec = campaign("highdim" + std::to_string(d), "highdim", runs, true, std::nullopt, d);
    const auto ok = runs_with_all_detected(rec);
    return {rec.failures.empty() && ok == runs,
            "d=" + std::to_string(d) + " k=" + std::to_string(rec.config.k) + " n=" + std::to_string(rec.config.n) +
                ": 48/48 in " + ratio(ok, runs) + " runs, mean runtime " +
                fmt("%.0f", rec.aggregate.runtime_seconds.mean) + " s"};
}

Outcome c8_mitigation() {
    ExperimentConfig cfg;
    cfg.function_id = "key4";
    cfg.runs = 100;
    cfg.generations = 1000;
    cfg.seed = 1;
    cfg.deterministic = true;
    cfg.k = 4;
    cfg.output_dir = work_dir() / "c8_k4";
    const auto under = run_campaign(cfg);
    cfg.k = 8;
    cfg.output_dir = work_dir() / "c8_k8";
    const auto rule = run_campaign(cfg);
    const std::size_t missed = 100 - runs_with_all_detected(under);
    const std::size_t complete = runs_with_all_detected(rule);
    const bool pass = under.config.n == 80 && rule.config.n == 160 && under.failures.empty() &&
                      rule.failures.empty() && static_cast<double>(missed) >= mitigation_min_miss_rate * 100.0 &&
                      complete >= mitigation_min_successes;
    return {pass, "k=4 misses an optimum in " + ratio(missed, 100) + " seeds, k=8 retrieves all in " +
                      ratio(complete, 100)};
}

// Each property returns an empty string on success or a description of the
// first violation.
std::string prop_bang_closure_and_elitist_size() {
    for (const char* fn : {"key4", "himmelblau", "schwefel1d"}) {
        const auto entry = resolve_benchmark(fn);
        for (auto policy : {BoundaryPolicy::Clamp, BoundaryPolicy::Reflect, BoundaryPolicy::Resample}) {
            for (std::uint64_t seed = 0; seed < 3; ++seed) {
                auto cfg = KbbbcConfig::defaults_for(entry.spec.m, entry.spec.dim());
                cfg.generations = 60;
                cfg.elitist = true;
                cfg.seed = seed;
                cfg.bang.boundary = policy;
                std::string err;
                run_kbbbc(entry.spec, cfg, [&](const GenerationSnapshot& s) {
                    const std::size_t want = s.generation == 1 ? cfg.n : cfg.n + cfg.k;
                    if (err.empty() && s.population.size() != want) {
                        err = std::string(fn) + ": population " + std::to_string(s.population.size()) +
                              " at generation " + std::to_string(s.generation);
                    }
                    for (const auto& ind : s.population.members) {
                        if (err.empty() && !entry.spec.bounds.contains(ind.x)) {
                            err = std::string(fn) + ": out of bounds " + format_point(ind.x);
                        }
                    }
                });
                if (!err.empty()) {
                    return err;
                }
            }
        }
    }
    return {};
}

std::string prop_silhouette_range() {
    ref::Gen g(1001);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = g.size(2, 30);
        const auto pts = g.points(n, g.size(1, 3));
        const std::size_t k = g.size(2, n);
        std::vector<std::size_t> labels(n);
        for (std::size_t i = 0; i < n; ++i) {
            labels[i] = i < k ? i : g.size(0, k - 1);
        }
        const double s = silhouette_score(pts, labels);
        if (!(s >= -1.0 && s <= 1.0) || std::abs(s - ref::brute_silhouette(pts, labels)) > 1e-12) {
            return "silhouette trial " + std::to_string(trial) + " gave " + fmt("%.17g", s);
        }
    }
    return {};
}

std::string prop_quantify_arithmetic() {
    ref::Gen g(2002);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t m = g.size(1, 12);
        IdentifiedOptima id;
        for (std::size_t i = 0; i < m; ++i) {
            Point x = {g.real(0.0, 1.0), g.real(0.0, 1.0)};
            if (i > 0 && g.real(0.0, 1.0) < 0.3) {
                x = id.points[g.size(0, i - 1)].x;
            }
            id.points.push_back(Individual{x, 0.0});
        }
        const auto q = quantify_missed(id, m, RngStream(trial));
        if (q.m_c + q.m_m != m || q.m_c < 1 || q.m_c > m ||
            (m >= 2 && ref::plateau_count(q.curve.scores, 0.1) != q.m_c)) {
            return "quantify trial " + std::to_string(trial);
        }
    }
    return {};
}

std::string prop_pairing() {
    ref::Gen g(3003);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t m = g.size(1, 6);
        const auto found = g.point_list(m, 2);
        const auto truth = g.point_list(m, 2);
        const double got = accuracy_search(found, truth, match_optima(found, truth));
        if (std::abs(got - ref::brute_pairing_cost(found, truth)) > 1e-12) {
            return "pairing trial " + std::to_string(trial);
        }
    }
    return {};
}

std::string prop_oracle_matches_data() {
    std::size_t checked = 0;
    for (const auto* list : {&table2_definitions(), &extra_definitions()}) {
        for (const auto& def : *list) {
            if (!def.data_source.empty()) {
                continue;
            }
            const auto stored = read_ground_truth(ground_truth_path(default_data_dir(), def.data_id()));
            OracleResult fresh;
            try {
                fresh = oracle_find_optima(spec_from_definition(def), OracleConfig::for_definition(def));
            } catch (const OracleMismatch& e) {
                return def.id + ": " + e.what();
            }
            if (fresh.optima.size() != stored.optima.size()) {
                return def.id + ": oracle found " + std::to_string(fresh.optima.size()) + ", file holds " +
                       std::to_string(stored.optima.size());
            }
            const double tol = oracle_position_tolerance * (def.upper - def.lower);
            for (std::size_t i = 0; i < fresh.optima.size(); ++i) {
                for (std::size_t t = 0; t < def.d; ++t) {
                    if (std::abs(fresh.optima[i][t] - stored.optima[i][t]) > tol) {
                        return def.id + ": optimum " + std::to_string(i) + " moved";
                    }
                }
            }
            ++checked;
        }
    }
    return checked == 20 ? std::string{} : "only " + std::to_string(checked) + " data files checked";
}

Outcome c9_properties() {
    const std::vector<std::pair<std::string, std::function<std::string()>>> props = {
        {"bang closure + elitist size", prop_bang_closure_and_elitist_size},
        {"silhouette range", prop_silhouette_range},
        {"quantify arithmetic", prop_quantify_arithmetic},
        {"pairing vs brute force", prop_pairing},
        {"oracle vs data files", prop_oracle_matches_data},
    };
    std::string failures;
    for (const auto& [name, fn] : props) {
        const auto err = fn();
        if (!err.empty()) {
            failures += (failures.empty() ? "" : "; ") + name + ": " + err;
        }
    }
    return {failures.empty(), failures.empty() ? std::to_string(props.size()) + " property suites hold" : failures};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome c10_determinism() {
    ExperimentConfig cfg;
    cfg.function_id = "himmelblau";
    cfg.runs = 5;
    cfg.generations = 300;
    cfg.elitist = true;
    cfg.seed = 42;
    cfg.deterministic = true;
    cfg.output_dir = work_dir() / "c10_a";
    run_campaign(cfg);
    cfg.output_dir = work_dir() / "c10_b";
    run_campaign(cfg);
    const auto a = without_runtime(nlohmann::json::parse(slurp(work_dir() / "c10_a" / "result.json"))).dump();
    const auto b = without_runtime(nlohmann::json::parse(slurp(work_dir() / "c10_b" / "result.json"))).dump();
    const auto ha = std::hash<std::string>{}(a);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%016zx", ha);
    return {a == b, std::string("result hash ") + buf + (a == b ? " (identical)" : " differs")};
}

std::set<int> parse_only(const char* text) {
    std::set<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        out.insert(std::stoi(item));
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> only;
    bool highdim8 = false;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
            only = parse_only(argv[++i]);
        } else if (std::strcmp(argv[i], "--highdim8") == 0) {
            highdim8 = true;
        } else {
            std::fprintf(stderr, "usage: %s [--only 1,2,...] [--highdim8]\n", argv[0]);
            return 2;
        }
    }

    std::vector<Criterion> criteria = {
        {1, "Key4 elitist: all minima, accuracy, evaluation count", c1_key4},
        {2, "Himmelblau both variants: 4/4 every run", c2_himmelblau},
        {3, "Uneven decreasing maxima: maximization path", c3_uneven},
        {4, "Key24 elitist: all minima, objective accuracy", c4_key24},
        {5, "Key24 forced to k=m: quantification tracks actual", c5_quantification},
        {6, "Registry: k = 2md and n = 20k", c6_table},
        {7, "High-dimensional d=4: 48/48 every run", [] { return run_highdim(4, 3); }},
        {8, "k = 2md mitigates k-means merging on Key4", c8_mitigation},
        {9, "Property suites", c9_properties},
        {10, "Deterministic campaigns are byte-identical", c10_determinism},
    };
    if (highdim8) {
        criteria.push_back({11, "High-dimensional d=8 (opt-in): 48/48", [] { return run_highdim(8, 1); }});
    }

    std::ofstream report("acceptance_report.txt");
    int failed = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && !only.count(c.id)) {
            continue;
        }
        const auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.check();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        char line[1024];
        std::snprintf(line, sizeof line, "criterion %2d %s: %s [%s] (%.1f s)\n", c.id, out.pass ? "PASS" : "FAIL",
                      c.name.c_str(), out.detail.c_str(), secs);
        std::fputs(line, stdout);
        std::fflush(stdout);
        report << line << std::flush;
        failed += !out.pass;
    }
    fs::remove_all(work_dir());
    return failed == 0 ? 0 : 1;
}
