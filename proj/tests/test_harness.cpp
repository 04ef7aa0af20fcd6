#include "kbbbc/harness.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace kbbbc;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("kbbbc_test_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ExperimentConfig small(const std::string& fn, const fs::path& out) {
    ExperimentConfig cfg;
    cfg.function_id = fn;
    cfg.runs = 3;
    cfg.generations = 100;
    cfg.elitist = true;
    cfg.seed = 5;
    cfg.output_dir = out;
    cfg.deterministic = true;
    return cfg;
}

}  // namespace

TEST(Config, Validation) {
    ExperimentConfig cfg;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg.function_id = "key4";
    EXPECT_NO_THROW(cfg.validate());
    cfg.runs = 0;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg.runs = 1;
    cfg.slope_threshold = 0.0;
    EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Config, OverrideResolution) {
    const auto entry = resolve_benchmark("key24");
    ExperimentConfig cfg;
    cfg.function_id = "key24";
    auto echo = resolve_config(cfg, entry);
    EXPECT_EQ(echo.k, 48u);
    EXPECT_EQ(echo.n, 960u);
    cfg.k = 24;
    echo = resolve_config(cfg, entry);
    EXPECT_EQ(echo.k, 24u);
    EXPECT_EQ(echo.n, 480u);
    cfg.n = 500;
    EXPECT_EQ(resolve_config(cfg, entry).n, 500u);
}

TEST(Campaign, RejectsKBelowM) {
    auto cfg = small("key4", scratch("kbelowm"));
    cfg.k = 3;
    EXPECT_THROW(run_campaign(cfg), ConfigError);
}

TEST(Campaign, SmokeRunWritesFilesAndConsistentAggregates) {
    const auto dir = scratch("smoke");
    const auto rec = run_campaign(small("key4", dir));
    ASSERT_EQ(rec.runs.size(), 3u);
    EXPECT_TRUE(rec.failures.empty());
    for (std::uint64_t s = 5; s < 8; ++s) {
        EXPECT_TRUE(fs::exists(run_file(dir, s)));
    }
    EXPECT_TRUE(aggregates_consistent(rec, rec.total_peaks));
    EXPECT_EQ(rec.total_peaks, 1u);
    for (const auto& run : rec.runs) {
        EXPECT_EQ(run.metrics.evaluations, 160u * 100u);
        EXPECT_EQ(run.identified.size(), 4u);
        EXPECT_EQ(run.m_c + run.m_m, 4u);
        EXPECT_EQ(run.silhouette.size(), 3u);
    }
    const auto loaded = read_result(dir / "result.json");
    EXPECT_EQ(without_runtime(nlohmann::json(loaded)), without_runtime(nlohmann::json(rec)));
    fs::remove_all(dir);
}

TEST(Campaign, ResumeIsIdempotent) {
    const auto dir = scratch("resume");
    auto cfg = small("key4", dir);
    const auto first = run_campaign(cfg);
    const auto once = slurp(run_file(dir, 6));
    // drop one run; the rerun recomputes only that one and reloads the rest
    fs::remove(run_file(dir, 7));
    const auto second = run_campaign(cfg);
    EXPECT_EQ(slurp(run_file(dir, 6)), once);
    EXPECT_EQ(without_runtime(nlohmann::json(first)), without_runtime(nlohmann::json(second)));

    auto other = cfg;
    other.generations = 50;
    EXPECT_THROW(run_campaign(other), ConfigError);
    fs::remove_all(dir);
}

TEST(Campaign, DeterministicOutputIsByteIdentical) {
    const auto a = scratch("det_a");
    const auto b = scratch("det_b");
    run_campaign(small("himmelblau", a));
    run_campaign(small("himmelblau", b));
    const auto ja = without_runtime(nlohmann::json::parse(slurp(a / "result.json")));
    const auto jb = without_runtime(nlohmann::json::parse(slurp(b / "result.json")));
    EXPECT_EQ(ja.dump(), jb.dump());
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST(Campaign, ParallelMatchesSequential) {
    const auto a = scratch("par_a");
    const auto b = scratch("par_b");
    auto seq = small("key4", a);
    auto par = small("key4", b);
    par.deterministic = false;
    par.jobs = 3;
    const auto ra = run_campaign(seq);
    const auto rb = run_campaign(par);
    EXPECT_EQ(without_runtime(nlohmann::json(ra)).dump(), without_runtime(nlohmann::json(rb)).dump());
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST(Campaign, TraceFileHasOneBlockPerGeneration) {
    const auto dir = scratch("trace");
    auto cfg = small("key4", dir);
    cfg.runs = 1;
    cfg.generations = 5;
    cfg.trace = true;
    run_campaign(cfg);
    std::ifstream in(dir / "trace_5.csv");
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "generation,kind,index,cluster,fitness,x0");
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++rows;
    }
    EXPECT_EQ(rows, (160u + 8u) + 4u * (160u + 8u + 8u));
    fs::remove_all(dir);
}

TEST(Result, TamperedAggregateRejected) {
    const auto dir = scratch("tamper");
    const auto rec = run_campaign(small("key4", dir));
    auto j = nlohmann::json(rec);
    j["aggregate"]["a_src"]["mean"] = 123.0;
    EXPECT_THROW(result_from_json(j), std::runtime_error);
    j = nlohmann::json(rec);
    j["schema"] = 2;
    EXPECT_THROW(result_from_json(j), ConfigError);
    fs::remove_all(dir);
}

TEST(Export, EmptyListIsHeaderOnly) {
    const std::vector<ResultRecord> none;
    const auto csv = export_table(none, ExportFormat::Csv);
    const auto table = parse_csv(csv);
    EXPECT_EQ(table.header, csv_columns());
    EXPECT_TRUE(table.rows.empty());
    EXPECT_EQ(export_table(none, ExportFormat::Json), "[]\n");
}

TEST(Export, CsvReloadIsBitIdentical) {
    const auto dir = scratch("csv");
    const auto rec = run_campaign(small("key4", dir));
    const std::vector<ResultRecord> records = {rec};
    const auto table = parse_csv(export_table(records, ExportFormat::Csv));
    ASSERT_EQ(table.rows.size(), rec.runs.size() + 1);
    auto col = [&](const std::string& name) {
        return static_cast<std::size_t>(std::find(table.header.begin(), table.header.end(), name) -
                                        table.header.begin());
    };
    for (std::size_t r = 0; r < rec.runs.size(); ++r) {
        EXPECT_EQ(std::strtod(table.rows[r][col("a_src")].c_str(), nullptr), rec.runs[r].metrics.a_src);
        EXPECT_EQ(std::strtod(table.rows[r][col("a_obj")].c_str(), nullptr), rec.runs[r].metrics.a_obj);
    }
    const auto& agg = table.rows.back();
    EXPECT_EQ(agg[col("row")], "aggregate");
    EXPECT_EQ(std::strtod(agg[col("a_src")].c_str(), nullptr), rec.aggregate.a_src.mean);
    EXPECT_EQ(std::strtod(agg[col("a_src_std")].c_str(), nullptr), rec.aggregate.a_src.std);
    EXPECT_EQ(std::strtod(agg[col("peak_ratio")].c_str(), nullptr), rec.aggregate.peak_ratio);
    fs::remove_all(dir);
}

TEST(Export, MixedSchemasRejected) {
    ResultRecord a;
    ResultRecord b;
    b.schema = 2;
    const std::vector<ResultRecord> records = {a, b};
    EXPECT_THROW(export_table(records, ExportFormat::Markdown), ConfigError);
    EXPECT_THROW(parse_export_format("xml"), ConfigError);
}

TEST(Quantification, AgreesWithActualOnKey4) {
    const auto dir = scratch("agree");
    auto cfg = small("key4", dir);
    cfg.runs = 25;
    cfg.generations = 1000;
    const auto rec = run_campaign(cfg);
    EXPECT_NEAR(rec.aggregate.success_quantified.mean, rec.aggregate.success_actual.mean, 0.04);
    fs::remove_all(dir);
}
