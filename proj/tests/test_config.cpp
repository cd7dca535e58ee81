#include <doctest.h>

#include <stdexcept>

#include <filesystem>
#include <fstream>

#include "ccl/config.hpp"
#include "ccl/report.hpp"
#include "ccl/text.hpp"

using namespace ccl::cli;

namespace {

const char* kMinimalConfig = R"(
[dataset]
kind = blobs
n = 200
classes = 3
noise = 0.4
seed = 11

[model]
hidden = 16,8
batch_size = 32
learning_rate = 0.002

[schedule]
sp = 0.25
ep = 1.0
alpha = 0.5

[train]
methods = vanilla,ccl
seeds = 1,2
epoch_multiplier = 3

[output]
dir = out_test
)";

}  // namespace

TEST_CASE("parse_config_text reads every section") {
    const ExperimentConfig config = parse_config_text(kMinimalConfig);
    CHECK(config.dataset.kind == DatasetKind::Blobs);
    CHECK(config.dataset.n == 200);
    CHECK(config.dataset.classes == 3);
    CHECK(config.dataset.noise == 0.4);
    CHECK(config.dataset.seed == 11);
    CHECK(config.train.hidden == std::vector<int>{16, 8});
    CHECK(config.train.batch_size == 32);
    CHECK(config.train.adam.lr == 0.002);
    CHECK(config.train.sp == 0.25);
    CHECK(config.train.methods ==
          std::vector<ccl::train::Method>{ccl::train::Method::Vanilla, ccl::train::Method::Ccl});
    CHECK(config.train.seeds == std::vector<std::uint64_t>{1, 2});
    CHECK(config.output_dir == "out_test");
    config.validate();
}

TEST_CASE("config echo round-trips") {
    const ExperimentConfig config = parse_config_text(kMinimalConfig);
    const ExperimentConfig reparsed = parse_config_text(echo_config(config));
    CHECK(config == reparsed);
    CHECK(echo_config(config) == echo_config(reparsed));
}

TEST_CASE("config errors carry line numbers") {
    CHECK_THROWS_WITH_AS(parse_config_text("[dataset]\nbogus_key = 1\n"),
                         doctest::Contains("line 2"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_config_text("[nope]\n"), doctest::Contains("unknown section"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_config_text("[dataset]\nn = abc\n"),
                         doctest::Contains("integer"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_config_text("n = 5\n"), doctest::Contains("outside"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_config_text("[train]\nmethods = warp\n"),
                         doctest::Contains("unknown method"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config_file("/nonexistent/ccl.conf"), std::invalid_argument);
}

TEST_CASE("validate rejects missing dataset files with the path") {
    ExperimentConfig config = parse_config_text(kMinimalConfig);
    config.dataset.kind = DatasetKind::Csv;
    config.dataset.csv_path = "/does/not/exist.csv";
    CHECK_THROWS_WITH_AS(config.validate(), doctest::Contains("/does/not/exist.csv"),
                         std::invalid_argument);
}

TEST_CASE("build_dataset produces split datasets for generators") {
    const ExperimentConfig config = parse_config_text(kMinimalConfig);
    const ccl::data::Dataset ds = build_dataset(config.dataset);
    CHECK(ds.rows() == 200);
    CHECK(ds.count(ccl::data::Split::Train) > 0);
    CHECK(ds.count(ccl::data::Split::Val) > 0);
    CHECK(ds.count(ccl::data::Split::Test) > 0);
}

TEST_CASE("format_double keeps schedule fractions readable") {
    CHECK(ccl::text::format_double(0.25) == "0.25");
    CHECK(ccl::text::format_double(1.0) == "1.0");
    CHECK(ccl::text::format_double(0.5) == "0.5");
}

TEST_CASE("comparison_csv is method-columned") {
    ccl::train::ComparisonReport report;
    ccl::train::MethodStats vanilla;
    vanilla.method = ccl::train::Method::Vanilla;
    vanilla.mean = 0.9;
    ccl::train::MethodStats ccl_stats;
    ccl_stats.method = ccl::train::Method::Ccl;
    ccl_stats.mean = 0.95;
    ccl_stats.p_vs_vanilla = 0.01;
    ccl_stats.verdict = ccl::train::Verdict::Better;
    report.methods = {vanilla, ccl_stats};
    const std::string csv = ccl::cli::comparison_csv(report);
    CHECK(csv.find("metric,vanilla,ccl") == 0);
    CHECK(csv.find("verdict,baseline,better") != std::string::npos);
}
