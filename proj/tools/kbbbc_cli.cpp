#include "kbbbc/kbbbc.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace {

constexpr int exit_ok = 0;
constexpr int exit_partial = 1;
constexpr int exit_config = 2;

struct RunOptions {
    kbbbc::ExperimentConfig cfg;
    std::size_t k = 0;
    std::size_t n = 0;
    std::string noise = "normal";
    std::string boundary = "clamp";
    std::string data_dir;
};

int do_run(RunOptions& o) {
    if (o.k != 0) {
        o.cfg.k = o.k;
    }
    if (o.n != 0) {
        o.cfg.n = o.n;
    }
    o.cfg.noise = kbbbc::parse_noise(o.noise);
    o.cfg.boundary = kbbbc::parse_boundary(o.boundary);
    if (!o.data_dir.empty()) {
        o.cfg.data_dir = o.data_dir;
    }
    const auto record = kbbbc::run_campaign(o.cfg);
    const kbbbc::ResultRecord one[] = {record};
    std::cout << kbbbc::export_table(one, kbbbc::ExportFormat::Markdown);
    std::cout << "written to " << (o.cfg.output_dir / "result.json").string() << '\n';
    if (!record.failures.empty()) {
        std::cerr << record.failures.size() << " of " << o.cfg.runs << " runs failed\n";
        return exit_partial;
    }
    return exit_ok;
}

int do_oracle(const std::vector<std::string>& ids, const std::string& data_dir, std::size_t grid) {
    std::vector<std::string> targets = ids;
    if (targets.empty() || (targets.size() == 1 && targets[0] == "all")) {
        targets.clear();
        for (const auto* list : {&kbbbc::table2_definitions(), &kbbbc::extra_definitions()}) {
            for (const auto& def : *list) {
                if (def.data_source.empty()) {
                    targets.push_back(def.id);
                }
            }
        }
    }
    const std::filesystem::path dir = data_dir.empty() ? kbbbc::default_data_dir() : std::filesystem::path(data_dir);
    int status = exit_ok;
    for (const auto& id : targets) {
        const auto* def = kbbbc::find_definition(id);
        if (def == nullptr) {
            throw kbbbc::ConfigError("unknown function '" + id + "'");
        }
        auto cfg = kbbbc::OracleConfig::for_definition(*def);
        if (grid != 0) {
            cfg.grid_points_per_dim = grid;
        }
        try {
            const auto gt = kbbbc::regenerate_ground_truth(def->data_id(), dir, cfg);
            std::cout << def->data_id() << ": " << gt.optima.size() << " optima, detection radius "
                      << gt.detection_radius << '\n';
        } catch (const kbbbc::OracleMismatch& e) {
            std::cerr << e.what() << '\n';
            status = exit_partial;
        }
    }
    return status;
}

int do_export(const std::vector<std::string>& files, const std::string& format, const std::string& out_path) {
    std::vector<kbbbc::ResultRecord> records;
    for (const auto& f : files) {
        records.push_back(kbbbc::read_result(f));
    }
    const auto text = kbbbc::export_table(records, kbbbc::parse_export_format(format));
    if (out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(out_path);
        if (!out) {
            throw std::runtime_error("cannot write " + out_path);
        }
        out << text;
    }
    return exit_ok;
}

int do_list() {
    std::printf("%-26s %-4s %2s %4s %5s %6s  %-20s %-4s %s\n", "id", "tag", "d", "m", "k", "n", "bounds", "dir",
                "formula");
    for (const auto* list : {&kbbbc::table2_definitions(), &kbbbc::extra_definitions()}) {
        for (const auto& def : *list) {
            const auto k = kbbbc::derive_k(def.m, def.d);
            char bounds[64];
            std::snprintf(bounds, sizeof bounds, "[%g, %g]", def.lower, def.upper);
            std::printf("%-26s %-4s %2zu %4zu %5zu %6zu  %-20s %-4s %s\n", def.id.c_str(), def.alias.c_str(), def.d,
                        def.m, k, kbbbc::derive_n(k), bounds, std::string(kbbbc::to_string(def.direction)).c_str(),
                        def.formula.c_str());
        }
    }
    std::printf("%-26s %-4s %2s %4d %5s %6s  %-20s %-4s %s\n", "highdim", "", "4j", 48, "96d", "1920d", "[0, 1]",
                "min", "sum 10(1+cos(2*pi*j_i*x_i)) + 2*j_i*x_i^2 (use --d)");
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"k-cluster Big Bang-Big Crunch multimodal optimizer"};
    app.require_subcommand(1);

    RunOptions run;
    auto* run_cmd = app.add_subcommand("run", "Run a multi-seed campaign on one function");
    run_cmd->add_option("--function", run.cfg.function_id, "Registry id or tag (e.g. key4, f10, highdim)")->required();
    run_cmd->add_option("--d", run.cfg.d, "Dimension for the highdim family (multiple of 4)");
    run_cmd->add_option("--runs", run.cfg.runs, "Number of runs")->capture_default_str();
    run_cmd->add_option("--generations", run.cfg.generations, "Generations per run")->capture_default_str();
    run_cmd->add_flag("--elitist", run.cfg.elitist, "Reinsert the previous centers each generation");
    run_cmd->add_option("--seed", run.cfg.seed, "Base seed; run r uses seed + r")->capture_default_str();
    run_cmd->add_option("--k", run.k, "Override the number of clusters (default 2md)");
    run_cmd->add_option("--n", run.n, "Override the population size (default 20k)");
    run_cmd->add_option("--noise", run.noise, "Bang noise {normal|uniform}")
        ->check(CLI::IsMember({"normal", "uniform"}))
        ->capture_default_str();
    run_cmd->add_option("--boundary", run.boundary, "Boundary policy {clamp|reflect|resample}")
        ->check(CLI::IsMember({"clamp", "reflect", "resample"}))
        ->capture_default_str();
    run_cmd->add_option("--slope-threshold", run.cfg.slope_threshold, "Silhouette plateau threshold")
        ->capture_default_str();
    run_cmd->add_flag("--trace", run.cfg.trace, "Write per-generation population CSV files");
    run_cmd->add_flag("--deterministic", run.cfg.deterministic, "Run sequentially (bit-exact output)");
    run_cmd->add_option("--out", run.cfg.output_dir, "Output directory")->capture_default_str();
    run_cmd->add_option("--jobs", run.cfg.jobs, "Runs executed in parallel")->capture_default_str();
    run_cmd->add_option("--epsilon", run.cfg.epsilon, "Accuracy level for peak ratio")->capture_default_str();
    run_cmd->add_option("--data-dir", run.data_dir, "Ground-truth directory");
    run_cmd->add_flag("--verbose", run.cfg.verbose, "Log each finished run");

    std::vector<std::string> oracle_ids;
    std::string oracle_dir;
    std::size_t oracle_grid = 0;
    auto* oracle_cmd = app.add_subcommand("oracle", "Regenerate ground-truth optima files");
    oracle_cmd->add_option("--function", oracle_ids, "Function ids (default: all)");
    oracle_cmd->add_option("--data-dir", oracle_dir, "Output directory for the JSON files");
    oracle_cmd->add_option("--grid", oracle_grid, "Grid points per dimension (default depends on d)");

    std::vector<std::string> export_files;
    std::string export_format = "markdown";
    std::string export_out;
    auto* export_cmd = app.add_subcommand("export", "Render result files as a table");
    export_cmd->add_option("files", export_files, "result.json files");
    export_cmd->add_option("--format", export_format, "csv|json|markdown")
        ->check(CLI::IsMember({"csv", "json", "markdown"}))
        ->capture_default_str();
    export_cmd->add_option("--out", export_out, "Write to a file instead of stdout");

    app.add_subcommand("list", "List registered functions");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_config;
    }

    try {
        if (run_cmd->parsed()) {
            return do_run(run);
        }
        if (oracle_cmd->parsed()) {
            return do_oracle(oracle_ids, oracle_dir, oracle_grid);
        }
        if (export_cmd->parsed()) {
            return do_export(export_files, export_format, export_out);
        }
        return do_list();
    } catch (const kbbbc::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return exit_config;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_partial;
    }
}
