#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "ccl/dataset.hpp"
#include "ccl/rng.hpp"
#include "ccl/schedule.hpp"
#include "ccl/trainer.hpp"

using namespace ccl::train;
using ccl::data::Dataset;
using ccl::data::Split;

namespace {

Dataset easy_blobs(int n, int classes, std::uint64_t seed) {
    Dataset ds = ccl::data::gen_blobs(n, classes, 0.15, seed);
    ccl::data::split_dataset(ds, 0.15, 0.2, seed + 1, false);
    return ds;
}

TrainConfig small_config() {
    TrainConfig config;
    config.hidden = {8};
    config.batch_size = 16;
    config.adam.lr = 5e-3;
    config.seeds = {1, 2};
    return config;
}

bool models_equal(const ccl::nn::ModelState& a, const ccl::nn::ModelState& b) {
    if (a.layers.size() != b.layers.size() || a.adam_step != b.adam_step) return false;
    for (std::size_t l = 0; l < a.layers.size(); ++l)
        if (!(a.layers[l].W.array() == b.layers[l].W.array()).all() ||
            !(a.layers[l].b.array() == b.layers[l].b.array()).all())
            return false;
    return true;
}

}  // namespace

TEST_CASE("ttest_two_sample anchors") {
    const std::vector<double> a{1, 2, 3, 4, 5};
    const std::vector<double> b{2, 3, 4, 5, 6};
    const TTestResult r = ttest_two_sample(a, b);
    CHECK(r.t == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(r.p == doctest::Approx(0.3466).epsilon(1e-3));

    const TTestResult self = ttest_two_sample(a, a);
    CHECK(self.t == 0.0);
    CHECK(self.p == doctest::Approx(1.0).epsilon(1e-12));

    const TTestResult flipped = ttest_two_sample(b, a);
    CHECK(flipped.t == doctest::Approx(-r.t).epsilon(1e-12));
    CHECK(flipped.p == doctest::Approx(r.p).epsilon(1e-12));

    CHECK_THROWS_AS(ttest_two_sample(std::vector<double>{1.0}, a), std::invalid_argument);
}

TEST_CASE("ttest_two_sample degenerate variance conventions") {
    const TTestResult near = ttest_two_sample(std::vector<double>{0, 0, 0},
                                              std::vector<double>{10, 10, 10.0001});
    CHECK(near.t < -100.0);
    CHECK(near.p < 1e-9);

    const TTestResult equal =
        ttest_two_sample(std::vector<double>{3, 3}, std::vector<double>{3, 3});
    CHECK(equal.t == 0.0);
    CHECK(equal.p == 1.0);

    const TTestResult apart =
        ttest_two_sample(std::vector<double>{3, 3}, std::vector<double>{4, 4});
    CHECK(std::isinf(apart.t));
    CHECK(apart.t < 0.0);
    CHECK(apart.p == 0.0);
}

TEST_CASE("loss_distribution_diagnostics moment anchors") {
    ccl::Rng rng = ccl::seeded_rng(17);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> symmetric(100000);
    for (double& x : symmetric) x = 2.0 + 0.7 * normal(rng);
    const MomentDiagnostics sym = loss_distribution_diagnostics(symmetric);
    CHECK(sym.mean == doctest::Approx(2.0).epsilon(0.01));
    CHECK(sym.stddev == doctest::Approx(0.7).epsilon(0.02));
    CHECK(std::fabs(sym.skewness) < 0.05);
    CHECK(std::fabs(sym.excess_kurtosis) < 0.1);

    std::vector<double> half(100000);
    for (double& x : half) x = std::fabs(normal(rng));
    const MomentDiagnostics hn = loss_distribution_diagnostics(half);
    const double half_normal_skew = std::sqrt(2.0) * (4.0 - M_PI) / std::pow(M_PI - 2.0, 1.5);
    CHECK(hn.skewness == doctest::Approx(half_normal_skew).epsilon(0.05));

    const MomentDiagnostics flat =
        loss_distribution_diagnostics(std::vector<double>{1, 1, 1, 1});
    CHECK(std::isnan(flat.skewness));
    CHECK(std::isnan(flat.excess_kurtosis));
    CHECK(flat.stddev == 0.0);

    CHECK_THROWS_AS(loss_distribution_diagnostics(std::vector<double>{1, 2, 3}),
                    std::invalid_argument);
}

TEST_CASE("train_scoring_model stops two epochs after the optimum") {
    // Tiny, well-separated blobs: the net is perfect after epoch one, so
    // epochs two and three cannot improve and training stops at three.
    const Dataset ds = easy_blobs(120, 2, 5);
    TrainConfig config = small_config();
    config.adam.lr = 2e-2;
    const auto [model, epochs] = train_scoring_model(ds, config, 3);
    CHECK(epochs == 3);
    CHECK(ccl::nn::accuracy(model, ds.batch(Split::Val)) == 1.0);

    const auto [model2, epochs2] = train_scoring_model(ds, config, 3);
    CHECK(epochs2 == epochs);
    CHECK(models_equal(model, model2));
}

TEST_CASE("train_scoring_model honors the epoch guard") {
    const Dataset ds = easy_blobs(120, 2, 5);
    TrainConfig config = small_config();
    config.max_scoring_epochs = 2;
    const auto [model, epochs] = train_scoring_model(ds, config, 3);
    CHECK(epochs == 2);
}

TEST_CASE("train_scoring_model requires a validation split") {
    Dataset ds = ccl::data::gen_blobs(60, 2, 0.3, 1);  // unsplit: everything is train
    CHECK_THROWS_AS(train_scoring_model(ds, small_config(), 1), std::invalid_argument);
}

TEST_CASE("extract_scores of a uniform model is uniform") {
    const Dataset ds = easy_blobs(100, 2, 6);
    auto model = ccl::nn::init_model(ccl::nn::mlp_specs(2, {}, 2), 1);
    for (auto& layer : model.layers) {
        layer.W.setZero();
        layer.b.setZero();
    }
    const auto scores = extract_scores(model, ds);
    const auto n = ds.count(Split::Train);
    REQUIRE(static_cast<long>(scores.size()) == n);
    double total = 0.0;
    for (double s : scores) {
        CHECK(s == doctest::Approx(1.0 / static_cast<double>(n)).epsilon(1e-9));
        total += s;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("vanilla degeneracy: train_ccl on the all-ones schedule is train_vanilla") {
    const Dataset ds = easy_blobs(150, 3, 7);
    TrainConfig config = small_config();
    config.record_batches = true;
    const int n = static_cast<int>(ds.count(Split::Train));
    const std::vector<double> uniform(static_cast<std::size_t>(n), 1.0 / n);
    const auto ones = ccl::schedule::constant_sizes(1.0, 4);

    const RunResult a = train_ccl(ds, config, uniform, ones, 11);
    const RunResult b = train_vanilla(ds, config, 11, 4);
    CHECK(a.batch_log == b.batch_log);
    CHECK(models_equal(a.final_model, b.final_model));
    REQUIRE(a.trace.size() == b.trace.size());
    for (std::size_t i = 0; i < a.trace.size(); ++i)
        CHECK(a.trace[i].accuracy == b.trace[i].accuracy);
}

TEST_CASE("vanilla epochs use every sample exactly once") {
    const Dataset ds = easy_blobs(100, 2, 8);
    TrainConfig config = small_config();
    config.record_batches = true;
    const int n = static_cast<int>(ds.count(Split::Train));
    const RunResult run = train_vanilla(ds, config, 1, 3);
    REQUIRE(run.batch_log.size() == 3);
    for (const auto& epoch : run.batch_log) {
        std::vector<int> sorted(epoch);
        std::sort(sorted.begin(), sorted.end());
        REQUIRE(static_cast<int>(sorted.size()) == n);
        for (int i = 0; i < n; ++i) CHECK(sorted[static_cast<std::size_t>(i)] == i);
    }
}

TEST_CASE("per-epoch subset sizes follow the schedule exactly") {
    const Dataset ds = easy_blobs(150, 2, 9);  // 150 rows -> 98 train (rounded splits)
    TrainConfig config = small_config();
    config.record_batches = true;
    const int n = static_cast<int>(ds.count(Split::Train));
    const auto scores = std::vector<double>(static_cast<std::size_t>(n), 1.0 / n);
    const std::vector<double> schedule{0.25, 0.5, 1.0};
    const RunResult run = train_ccl(ds, config, scores, schedule, 21);
    REQUIRE(run.batch_log.size() == 3);
    for (std::size_t t = 0; t < 3; ++t) {
        CHECK(static_cast<int>(run.batch_log[t].size()) ==
              ccl::select::subset_size(schedule[t], n));
        // without replacement: all distinct
        std::vector<int> sorted(run.batch_log[t]);
        std::sort(sorted.begin(), sorted.end());
        CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
    }
}

TEST_CASE("update counts: last short batch is kept") {
    const Dataset ds = easy_blobs(150, 2, 10);
    TrainConfig config = small_config();
    config.batch_size = 32;
    const int n = static_cast<int>(ds.count(Split::Train));
    const int per_epoch = (n + 31) / 32;
    const RunResult run = train_vanilla(ds, config, 2, 2);
    REQUIRE(run.trace.size() == 2);  // epoch-end evaluations only
    CHECK(run.trace[0].update == per_epoch);
    CHECK(run.trace[1].update == 2 * per_epoch);
}

TEST_CASE("eval_interval adds mid-epoch evaluations") {
    const Dataset ds = easy_blobs(150, 2, 10);
    TrainConfig config = small_config();
    config.batch_size = 16;
    config.eval_interval = 2;
    const RunResult run = train_vanilla(ds, config, 2, 1);
    REQUIRE(run.trace.size() > 1);
    for (std::size_t i = 0; i + 1 < run.trace.size(); ++i)
        CHECK(run.trace[i].update == 2 * static_cast<long>(i + 1));
    double best = 0.0;
    for (const auto& p : run.trace) best = std::max(best, p.accuracy);
    CHECK(run.max_test_accuracy == best);
}

TEST_CASE("train_ccl is deterministic and validates inputs") {
    const Dataset ds = easy_blobs(120, 2, 12);
    TrainConfig config = small_config();
    const int n = static_cast<int>(ds.count(Split::Train));
    const auto scores = std::vector<double>(static_cast<std::size_t>(n), 1.0 / n);
    const auto schedule = ccl::schedule::cyclical_sizes({0.25, 1.0, 0.5, 5});

    const RunResult a = train_ccl(ds, config, scores, schedule, 3);
    const RunResult b = train_ccl(ds, config, scores, schedule, 3);
    CHECK(models_equal(a.final_model, b.final_model));
    REQUIRE(a.trace.size() == b.trace.size());
    for (std::size_t i = 0; i < a.trace.size(); ++i) {
        CHECK(a.trace[i].update == b.trace[i].update);
        CHECK(a.trace[i].accuracy == b.trace[i].accuracy);
    }
    CHECK(a.epochs_used == 5);

    CHECK_THROWS_AS(train_ccl(ds, config, scores, std::vector<double>{}, 3),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        train_ccl(ds, config, std::vector<double>{0.5, 0.5}, schedule, 3),
        std::invalid_argument);
}

TEST_CASE("run_experiment validates preconditions") {
    const Dataset ds = easy_blobs(120, 2, 13);
    TrainConfig config = small_config();

    config.methods = {Method::Vanilla, Method::Ccl};
    config.seeds = {1};
    CHECK_THROWS_AS(run_experiment(ds, config), std::invalid_argument);

    config.methods = {Method::Ccl, Method::AntiCcl};
    config.seeds = {1, 2};
    CHECK_THROWS_AS(run_experiment(ds, config), std::invalid_argument);

    config.methods = {};
    CHECK_THROWS_AS(run_experiment(ds, config), std::invalid_argument);
}

TEST_CASE("run_experiment with vanilla only reports plain aggregates") {
    const Dataset ds = easy_blobs(120, 2, 14);
    TrainConfig config = small_config();
    config.methods = {Method::Vanilla};
    config.seeds = {1};
    const ComparisonReport report = run_experiment(ds, config);
    REQUIRE(report.methods.size() == 1);
    CHECK(report.methods[0].verdict == Verdict::Baseline);
    CHECK(report.methods[0].mean == report.methods[0].max_accuracies[0]);
    CHECK(report.runs.size() == 1);
    CHECK(report.scoring_epochs.size() == 1);
}

TEST_CASE("run_experiment over all seven methods") {
    const Dataset ds = easy_blobs(160, 2, 15);
    TrainConfig config = small_config();
    config.methods = {Method::Vanilla, Method::Ccl,    Method::AntiCcl, Method::RandCcl,
                      Method::Cl,      Method::AntiCl, Method::RandCl};
    config.seeds = {1, 2};
    const ComparisonReport report = run_experiment(ds, config);
    REQUIRE(report.methods.size() == 7);
    CHECK(report.runs.size() == 14);
    CHECK(report.scoring_epochs.size() == 2);
    const double vanilla_mean = report.methods[0].mean;
    for (const MethodStats& stats : report.methods) {
        REQUIRE(stats.max_accuracies.size() == 2);
        for (double acc : stats.max_accuracies) {
            CHECK(acc >= 0.0);
            CHECK(acc <= 1.0);
        }
        if (stats.method == Method::Vanilla) {
            CHECK(stats.verdict == Verdict::Baseline);
            continue;
        }
        // Verdicts must be consistent with the p threshold and mean order.
        if (stats.p_vs_vanilla < kSignificance)
            CHECK(stats.verdict == (stats.mean > vanilla_mean ? Verdict::Better : Verdict::Worse));
        else
            CHECK(stats.verdict == Verdict::Indistinguishable);
    }

    // Same config and seeds give a bit-identical report.
    const ComparisonReport again = run_experiment(ds, config);
    for (std::size_t m = 0; m < report.methods.size(); ++m) {
        CHECK(report.methods[m].mean == again.methods[m].mean);
        CHECK(report.methods[m].stddev == again.methods[m].stddev);
    }
}

TEST_CASE("class-balanced fixed-rank subsets honor per-class quotas") {
    const Dataset ds = easy_blobs(160, 2, 16);
    TrainConfig config = small_config();
    config.methods = {Method::Vanilla, Method::Cl};
    config.seeds = {1, 2};
    config.class_balanced = true;
    config.record_batches = true;
    const ComparisonReport report = run_experiment(ds, config);
    const ccl::nn::Batch train_all = ds.batch(Split::Train);
    long class_count[2] = {0, 0};
    for (Eigen::Index i = 0; i < train_all.y.size(); ++i) ++class_count[train_all.y[i]];
    const long n = train_all.y.size();
    for (const RunResult& run : report.runs) {
        if (run.method != Method::Cl) continue;
        for (const auto& epoch : run.batch_log) {
            long got[2] = {0, 0};
            for (int pos : epoch) ++got[train_all.y[pos]];
            const long k = static_cast<long>(epoch.size());
            for (int c = 0; c < 2; ++c)
                CHECK(std::abs(got[c] - k * class_count[c] / n) <= 1);
        }
    }
}

TEST_CASE("external scores replace self-taught scoring") {
    const Dataset ds = easy_blobs(120, 2, 17);
    TrainConfig config = small_config();
    config.methods = {Method::Vanilla, Method::Ccl};
    config.seeds = {1, 2};
    config.external_scores = std::vector<double>{1.0};  // wrong length
    CHECK_THROWS_AS(run_experiment(ds, config), std::invalid_argument);

    const int n = static_cast<int>(ds.count(Split::Train));
    config.external_scores.assign(static_cast<std::size_t>(n), 1.0 / n);
    const ComparisonReport report = run_experiment(ds, config);
    CHECK(report.methods.size() == 2);
}

TEST_CASE("diagnostics flag emits per-epoch loss moments") {
    const Dataset ds = easy_blobs(120, 2, 18);
    TrainConfig config = small_config();
    config.diagnostics = true;
    const RunResult run = train_vanilla(ds, config, 1, 3);
    REQUIRE(run.diagnostics.size() == 3);
    for (const MomentDiagnostics& d : run.diagnostics) {
        CHECK(d.mean >= 0.0);
        CHECK(d.stddev >= 0.0);
    }
}
