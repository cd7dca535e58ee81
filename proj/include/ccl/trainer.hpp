#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ccl/dataset.hpp"
#include "ccl/nnet.hpp"
#include "ccl/selection.hpp"

namespace ccl::train {

enum class Method { Vanilla, Ccl, AntiCcl, RandCcl, Cl, AntiCl, RandCl };

const char* method_name(Method m);
std::optional<Method> method_from_name(const std::string& name);

struct TrainConfig {
    std::vector<int> hidden = {64, 64};
    int batch_size = 128;
    nn::AdamParams adam;
    double sp = 0.25;
    double ep = 1.0;
    double alpha = 0.5;
    std::vector<Method> methods = {Method::Vanilla, Method::Ccl};
    int eval_interval = 0;          // extra test evaluations every k updates; 0 = epoch ends only
    std::vector<std::uint64_t> seeds = {1, 2};
    int epoch_multiplier = 3;       // T = multiplier * scoring-model epochs
    int max_scoring_epochs = 200;   // divergence guard for early stopping
    int cl_stages = 3;              // plateaus for the fixed-rank CL baselines
    bool class_balanced = false;    // per-class quotas in fixed-rank selection
    bool record_batches = false;    // keep per-epoch batch index logs in RunResult
    bool diagnostics = false;       // per-epoch loss moment diagnostics
    int jobs = 1;
    std::vector<double> external_scores;  // replaces self-taught scoring when set

    bool operator==(const TrainConfig&) const = default;
    void validate() const;
};

struct EvalPoint {
    long update = 0;
    double accuracy = 0.0;
};

struct MomentDiagnostics {
    double mean = 0.0;
    double stddev = 0.0;
    double skewness = 0.0;          // NaN when undefined (zero variance)
    double excess_kurtosis = 0.0;   // NaN when undefined
};

struct RunResult {
    Method method = Method::Vanilla;
    std::uint64_t seed = 0;
    int epochs_used = 0;
    double max_test_accuracy = 0.0;
    std::vector<EvalPoint> trace;
    std::vector<std::vector<int>> batch_log;        // when record_batches is on
    std::vector<MomentDiagnostics> diagnostics;     // when diagnostics is on
    nn::ModelState final_model;
};

enum class Verdict { Baseline, Better, Worse, Indistinguishable };

const char* verdict_name(Verdict v);

struct MethodStats {
    Method method = Method::Vanilla;
    std::vector<double> max_accuracies;   // one per seed
    double mean = 0.0;
    double stddev = 0.0;
    double t_vs_vanilla = 0.0;
    double p_vs_vanilla = 1.0;
    Verdict verdict = Verdict::Baseline;
};

struct ComparisonReport {
    std::vector<MethodStats> methods;
    std::vector<RunResult> runs;
    std::vector<int> scoring_epochs;      // scoring-model epoch count per seed
};

struct TTestResult {
    double t = 0.0;
    double p = 1.0;
};

/// Train on the full train split with vanilla batching until validation
/// accuracy fails to improve for two consecutive epochs (capped at
/// max_scoring_epochs). Returns the model and the epoch count reached.
std::pair<nn::ModelState, int> train_scoring_model(const data::Dataset& dataset,
                                                   const TrainConfig& config,
                                                   std::uint64_t seed);

/// Curriculum scores for the train split: per-sample losses under `model`
/// pushed through the inverse-loss score rule.
std::vector<double> extract_scores(const nn::ModelState& model, const data::Dataset& dataset);

/// One cyclical training run: fresh model from init_model(seed), then per
/// epoch t draws subset_size(schedule[t], N) samples without replacement by
/// `scores`, shuffles them into batches and applies Adam per batch.
RunResult train_ccl(const data::Dataset& dataset, const TrainConfig& config,
                    std::span<const double> scores, std::span<const double> schedule,
                    std::uint64_t seed);

/// Vanilla baseline: the all-ones schedule with uniform scores, routed
/// through the same sampling/batching path as train_ccl.
RunResult train_vanilla(const data::Dataset& dataset, const TrainConfig& config,
                        std::uint64_t seed, int epochs);

/// Full comparison protocol: per seed, one scoring model (offset seed), one
/// shared initial state, every configured method, then per-method aggregates
/// and Student's t-tests against vanilla at p = 0.05.
ComparisonReport run_experiment(const data::Dataset& dataset, const TrainConfig& config);

/// Equal-variance two-sample Student's t-test, two-sided p. Degenerate
/// inputs (both samples constant): equal means give (t=0, p=1), unequal
/// means give (t=+-inf, p=0).
TTestResult ttest_two_sample(std::span<const double> a, std::span<const double> b);

/// Moment estimators of a loss sample: mean, standard deviation, skewness
/// and excess kurtosis; the shape moments are NaN for constant input.
MomentDiagnostics loss_distribution_diagnostics(std::span<const double> losses);

inline constexpr double kSignificance = 0.05;
inline constexpr std::uint64_t kScoringSeedOffset = 9973;

}  // namespace ccl::train
