// Acceptance suite: runs every release criterion at its pinned tolerance and
// prints one PASS/FAIL line each. Exits nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ccl/config.hpp"
#include "ccl/dataset.hpp"
#include "ccl/nnet.hpp"
#include "ccl/report.hpp"
#include "ccl/rng.hpp"
#include "ccl/schedule.hpp"
#include "ccl/selection.hpp"
#include "ccl/theory.hpp"
#include "ccl/trainer.hpp"
#include "quadrature_oracle.hpp"

namespace {

int failures = 0;

void report(int criterion, const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL", criterion, name.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

bool models_equal(const ccl::nn::ModelState& a, const ccl::nn::ModelState& b) {
    if (a.layers.size() != b.layers.size()) return false;
    for (std::size_t l = 0; l < a.layers.size(); ++l)
        if (!(a.layers[l].W.array() == b.layers[l].W.array()).all() ||
            !(a.layers[l].b.array() == b.layers[l].b.array()).all())
            return false;
    return true;
}

// --- criterion 1: schedule fidelity -----------------------------------------
void criterion_schedule() {
    const auto s = ccl::schedule::cyclical_sizes({0.25, 1.0, 0.5, 7});
    const std::vector<double> expected{0.25, 0.5, 1.0, 0.5, 0.25, 0.5, 1.0};
    std::string got;
    for (double v : s) got += std::to_string(v) + " ";
    report(1, "schedule fidelity", s == expected, "exact equality, got " + got);
}

// --- criterion 2: vanilla degeneracy ----------------------------------------
void criterion_degeneracy() {
    ccl::data::Dataset ds = ccl::data::gen_blobs(500, 3, 0.8, 42);
    ccl::data::split_dataset(ds, 0.1, 0.2, 43, false);
    ccl::train::TrainConfig config;
    config.hidden = {16};
    config.batch_size = 32;
    config.record_batches = true;
    config.seeds = {7};
    const int n = static_cast<int>(ds.count(ccl::data::Split::Train));
    const std::vector<double> uniform(static_cast<std::size_t>(n), 1.0 / n);
    const auto ones = ccl::schedule::constant_sizes(1.0, 6);
    const auto a = ccl::train::train_ccl(ds, config, uniform, ones, 7);
    const auto b = ccl::train::train_vanilla(ds, config, 7, 6);
    const bool same_batches = a.batch_log == b.batch_log;
    const bool same_params = models_equal(a.final_model, b.final_model);
    report(2, "vanilla-degeneracy equivalence", same_batches && same_params,
           std::string("batch sequences ") + (same_batches ? "identical" : "DIFFER") +
               ", final parameters " + (same_params ? "bit-identical" : "DIFFER"));
}

// --- criterion 3: theorem 1 -------------------------------------------------
void criterion_theorem1() {
    using namespace ccl::theory;
    const ErrorEstimate uni =
        mc_error({DistFamily::Normal, 1.0, 0.5}, {Weighting::Uniform, 1.0}, 1000000, 101);
    const ErrorEstimate esg =
        mc_error({DistFamily::Normal, 1.0, 0.5}, {Weighting::Exponential, 1.0}, 1000000, 102);
    const double rel_uni = std::fabs(uni.value - 0.25) / 0.25;
    const double rel_esg = std::fabs(esg.value - 0.3125) / 0.3125;
    char detail[160];
    std::snprintf(detail, sizeof detail,
                  "sgd %.6f vs 0.25 (%.2f%%), esg %.6f vs 0.3125 (%.2f%%), tol 2%%", uni.value,
                  100 * rel_uni, esg.value, 100 * rel_esg);
    report(3, "theorem 1 verification", rel_uni <= 0.02 && rel_esg <= 0.02, detail);
}

// --- criterion 4: theorem 2 -------------------------------------------------
void criterion_theorem2() {
    using namespace ccl::theory;
    const double sgd_expected = 1.0 - 2.0 / M_PI;
    const ErrorEstimate uni =
        mc_error({DistFamily::HalfNormal, 0.0, 1.0}, {Weighting::Uniform, 1.0}, 1000000, 103);
    const double esg_closed =
        analytic_error({DistFamily::HalfNormal, 0.0, 1.0}, {Weighting::Exponential, 1.0});
    const ErrorEstimate esg =
        mc_error({DistFamily::HalfNormal, 0.0, 1.0}, {Weighting::Exponential, 1.0}, 1000000, 104);
    const double rel_uni = std::fabs(uni.value - sgd_expected) / sgd_expected;
    const double rel_esg = std::fabs(esg.value - esg_closed) / esg_closed;

    double worst_quad = 0.0;
    for (double lambda = 0.1; lambda <= 5.0 + 1e-9; lambda += 0.2) {
        const double closed =
            analytic_error({DistFamily::HalfNormal, 0.0, 1.0}, {Weighting::Exponential, lambda});
        worst_quad = std::max(worst_quad,
                              std::fabs(closed - oracle::half_normal_esg_error(0.0, 1.0, lambda)));
    }

    bool region_ok = true;
    for (const RegionPoint& p : region_grid(0.1, 4.0, 0.1, 4.0, 32))
        if (p.sigma * p.lambda <= 3.0 && p.diff >= 0.0) region_ok = false;

    char detail[200];
    std::snprintf(detail, sizeof detail,
                  "uniform %.2f%%, exp-vs-closed %.2f%% (tol 2%%), closed-vs-quadrature %.2e "
                  "(tol 1e-6), grid sigma*lambda<=3 all negative: %s",
                  100 * rel_uni, 100 * rel_esg, worst_quad, region_ok ? "yes" : "NO");
    report(4, "theorem 2 verification",
           rel_uni <= 0.02 && rel_esg <= 0.02 && worst_quad <= 1e-6 && region_ok, detail);
}

// --- criterion 5: theorem 4 -------------------------------------------------
void criterion_theorem4() {
    using namespace ccl::theory;
    const std::vector<double> sigmas{0.5, 1.0, 2.0, 4.0};
    const Theorem4Report rep = theorem4_bound_check(sigmas, 1000000, 5, 11);
    const bool argmax_ok = std::fabs(rep.argmax_x - std::exp(1.0)) <= 1e-6 &&
                           std::fabs(rep.max_value - 1.0 / std::exp(1.0)) <= 1e-6;
    bool all_sigmas = true;
    for (const Theorem4Row& row : rep.rows)
        if (row.wins != row.seeds) all_sigmas = false;
    char detail[200];
    std::snprintf(detail, sizeof detail,
                  "argmax %.8f (e within 1e-6: %s), inverse<uniform for all sigmas/seeds: %s, "
                  "bound pi*e=%.6f",
                  rep.argmax_x, argmax_ok ? "yes" : "NO", all_sigmas ? "yes" : "NO",
                  rep.sigma_bound);
    report(5, "theorem 4 verification", argmax_ok && all_sigmas, detail);
}

// --- criterion 6: sampler correctness ---------------------------------------
void criterion_sampler() {
    struct Instance {
        std::vector<double> scores;
        int k;
    };
    std::vector<Instance> instances;
    instances.push_back({{0.5, 0.3, 0.2}, 2});
    instances.push_back({std::vector<double>(4, 0.25), 2});
    {
        std::vector<double> w(8);
        for (int i = 0; i < 8; ++i) w[static_cast<std::size_t>(i)] = std::pow(1.5, i);
        const double total = std::accumulate(w.begin(), w.end(), 0.0);
        for (double& v : w) v /= total;
        instances.push_back({w, 4});
        instances.push_back({w, 1});
    }
    instances.push_back({{0.05, 0.05, 0.4, 0.3, 0.1, 0.1}, 3});
    instances.push_back({{0.4, 0.3, 0.2, 0.1}, 4});

    const long trials = 200000;
    double worst = 0.0;
    for (std::size_t inst = 0; inst < instances.size(); ++inst) {
        const auto& [scores, k] = instances[inst];
        const auto exact = ccl::select::inclusion_probabilities_bruteforce(scores, k);
        std::vector<long> hits(scores.size(), 0);
        ccl::Rng rng = ccl::seeded_rng(500 + inst);
        for (long t = 0; t < trials; ++t)
            for (int idx : ccl::select::sample_without_replacement(scores, k, rng))
                ++hits[static_cast<std::size_t>(idx)];
        for (std::size_t i = 0; i < hits.size(); ++i)
            worst = std::max(worst, std::fabs(static_cast<double>(hits[i]) / trials - exact[i]));
    }
    char detail[120];
    std::snprintf(detail, sizeof detail, "max |empirical - exact| = %.5f over %zu fixtures, tol 0.01",
                  worst, instances.size());
    report(6, "sampler correctness", worst < 0.01, detail);
}

// --- criterion 7: gradient correctness --------------------------------------
void criterion_gradients() {
    ccl::Rng rng = ccl::seeded_rng(600);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_int_distribution<int> label(0, 2);
    ccl::nn::ModelState model = ccl::nn::init_model(ccl::nn::mlp_specs(5, {9}, 3), 601);
    ccl::nn::Batch batch;
    batch.X.resize(20, 5);
    batch.y.resize(20);
    for (Eigen::Index i = 0; i < batch.X.size(); ++i) batch.X.data()[i] = normal(rng);
    for (int i = 0; i < 20; ++i) batch.y[i] = label(rng);

    const auto grads = ccl::nn::gradients(model, batch);
    auto mean_loss = [&]() {
        const auto losses = ccl::nn::per_sample_losses(model, batch);
        return std::accumulate(losses.begin(), losses.end(), 0.0) /
               static_cast<double>(losses.size());
    };
    const double h = 1e-4;
    double worst_rel = 0.0;
    for (int coord = 0; coord < 100; ++coord) {
        const std::size_t l = std::uniform_int_distribution<std::size_t>(0, 1)(rng);
        Eigen::MatrixXd& W = model.layers[l].W;
        const Eigen::Index idx = std::uniform_int_distribution<Eigen::Index>(0, W.size() - 1)(rng);
        const double saved = W.data()[idx];
        W.data()[idx] = saved + h;
        const double up = mean_loss();
        W.data()[idx] = saved - h;
        const double down = mean_loss();
        W.data()[idx] = saved;
        const double fd = (up - down) / (2.0 * h);
        const double an = grads.dW[l].data()[idx];
        worst_rel = std::max(worst_rel,
                             std::fabs(fd - an) / std::max({std::fabs(fd), std::fabs(an), 1e-8}));
    }
    char detail[120];
    std::snprintf(detail, sizeof detail,
                  "worst relative error %.2e over 100 random coordinates, tol 1e-3", worst_rel);
    report(7, "gradient correctness", worst_rel <= 1e-3, detail);
}

// --- criterion 8: end-to-end two-spirals comparison -------------------------
ccl::cli::ExperimentConfig spirals_config(const std::string& out_dir) {
    ccl::cli::ExperimentConfig config;
    config.dataset.kind = ccl::cli::DatasetKind::Spirals;
    config.dataset.n = 2000;
    config.dataset.noise = 0.2;
    config.dataset.seed = 42;
    config.dataset.val_fraction = 0.2;
    config.dataset.test_fraction = 0.2;
    config.train.hidden = {64, 64};
    config.train.batch_size = 8;
    config.train.adam.lr = 3e-3;
    config.train.eval_interval = 2;
    config.train.methods = {ccl::train::Method::Vanilla, ccl::train::Method::Ccl,
                            ccl::train::Method::AntiCcl, ccl::train::Method::RandCcl,
                            ccl::train::Method::Cl,      ccl::train::Method::AntiCl,
                            ccl::train::Method::RandCl};
    config.train.seeds = {1, 2, 3, 4, 5};
    config.train.jobs =
        std::max(1, static_cast<int>(std::min(4u, std::thread::hardware_concurrency())));
    config.output_dir = out_dir;
    return config;
}

void criterion_end_to_end() {
    const auto dir = std::filesystem::temp_directory_path() / "ccl_acceptance_spirals";
    std::filesystem::remove_all(dir);
    const ccl::cli::ExperimentConfig config = spirals_config(dir.string());
    const ccl::data::Dataset ds = ccl::cli::build_dataset(config.dataset);
    const auto start = std::chrono::steady_clock::now();
    const ccl::train::ComparisonReport rep = ccl::train::run_experiment(ds, config.train);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    ccl::cli::write_report_bundle(config, rep, seconds);

    double vanilla_mean = -1.0, ccl_mean = -1.0;
    bool verdicts_valid = rep.methods.size() == 7;
    for (const auto& stats : rep.methods) {
        if (stats.method == ccl::train::Method::Vanilla) vanilla_mean = stats.mean;
        if (stats.method == ccl::train::Method::Ccl) ccl_mean = stats.mean;
        if (stats.method == ccl::train::Method::Vanilla) {
            if (stats.verdict != ccl::train::Verdict::Baseline) verdicts_valid = false;
            continue;
        }
        if (!(stats.p_vs_vanilla >= 0.0 && stats.p_vs_vanilla <= 1.0)) verdicts_valid = false;
        const bool significant = stats.p_vs_vanilla < ccl::train::kSignificance;
        const auto expected =
            !significant ? ccl::train::Verdict::Indistinguishable
                         : (stats.mean > vanilla_mean ? ccl::train::Verdict::Better
                                                      : ccl::train::Verdict::Worse);
        if (stats.verdict != expected) verdicts_valid = false;
    }
    const bool margin_ok = ccl_mean >= vanilla_mean - 0.01;
    char detail[220];
    std::snprintf(detail, sizeof detail,
                  "ccl mean %.4f vs vanilla mean %.4f (tol -0.01), 7-method report with valid "
                  "verdicts: %s, %zu runs, %.0f s",
                  ccl_mean, vanilla_mean, verdicts_valid ? "yes" : "NO", rep.runs.size(), seconds);
    report(8, "end-to-end two-spirals comparison", margin_ok && verdicts_valid, detail);
}

// --- criterion 9: theorem 3 conditional check -------------------------------
void criterion_theorem3() {
    int wins = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto trace = ccl::theory::cyclical_error_simulation(100000, 100, seed);
        if (trace.ccl_total < trace.uniform_total) ++wins;
    }
    char detail[120];
    std::snprintf(detail, sizeof detail, "cyclical policy wins %d/10 seeds, need >= 9", wins);
    report(9, "theorem 3 conditional check", wins >= 9, detail);
}

// --- criterion 10: reproducibility ------------------------------------------
std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void criterion_reproducibility() {
    const auto dir_a = std::filesystem::temp_directory_path() / "ccl_acceptance_repro_a";
    const auto dir_b = std::filesystem::temp_directory_path() / "ccl_acceptance_repro_b";
    std::filesystem::remove_all(dir_a);
    std::filesystem::remove_all(dir_b);

    ccl::cli::ExperimentConfig config;
    config.dataset.kind = ccl::cli::DatasetKind::Blobs;
    config.dataset.n = 400;
    config.dataset.classes = 3;
    config.dataset.noise = 0.6;
    config.dataset.seed = 5;
    config.train.hidden = {16};
    config.train.batch_size = 32;
    config.train.methods = {ccl::train::Method::Vanilla, ccl::train::Method::Ccl};
    config.train.seeds = {1, 2};

    const ccl::data::Dataset ds = ccl::cli::build_dataset(config.dataset);
    config.output_dir = dir_a.string();
    ccl::cli::write_report_bundle(config, ccl::train::run_experiment(ds, config.train), 1.0);
    config.output_dir = dir_b.string();
    ccl::cli::write_report_bundle(config, ccl::train::run_experiment(ds, config.train), 2.0);

    bool identical = true;
    std::string first_diff;
    for (const char* name : {"comparison.csv", "runs/vanilla_1.csv", "runs/vanilla_2.csv",
                             "runs/ccl_1.csv", "runs/ccl_2.csv"}) {
        if (slurp(dir_a / name) != slurp(dir_b / name)) {
            identical = false;
            first_diff = name;
        }
    }
    report(10, "reproducibility",
           identical, identical ? "reruns byte-identical across all CSVs"
                                : "first differing file: " + first_diff);
    std::filesystem::remove_all(dir_a);
    std::filesystem::remove_all(dir_b);
}

}  // namespace

int main() {
    criterion_schedule();
    criterion_degeneracy();
    criterion_theorem1();
    criterion_theorem2();
    criterion_theorem4();
    criterion_sampler();
    criterion_gradients();
    criterion_end_to_end();
    criterion_theorem3();
    criterion_reproducibility();
    std::printf("%s: %d criterion(s) failed\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
    return failures == 0 ? 0 : 1;
}
