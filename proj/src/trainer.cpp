#include "ccl/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "ccl/rng.hpp"
#include "ccl/schedule.hpp"

namespace ccl::train {

namespace {

constexpr std::uint64_t kTrainStream = 1;   // shuffling + subset sampling
constexpr std::uint64_t kRankStream = 2;    // fixed random rank for rand_cl

const char* kMethodNames[] = {"vanilla", "ccl", "anti_ccl", "rand_ccl", "cl", "anti_cl", "rand_cl"};

}  // namespace

const char* method_name(Method m) { return kMethodNames[static_cast<int>(m)]; }

std::optional<Method> method_from_name(const std::string& name) {
    for (int i = 0; i < 7; ++i)
        if (name == kMethodNames[i]) return static_cast<Method>(i);
    return std::nullopt;
}

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Baseline: return "baseline";
        case Verdict::Better: return "better";
        case Verdict::Worse: return "worse";
        case Verdict::Indistinguishable: return "indistinguishable";
    }
    return "?";
}

void TrainConfig::validate() const {
    if (batch_size < 1) throw std::invalid_argument("config: batch_size must be >= 1");
    if (eval_interval < 0) throw std::invalid_argument("config: eval_interval must be >= 0");
    if (seeds.empty()) throw std::invalid_argument("config: at least one seed is required");
    if (epoch_multiplier < 1) throw std::invalid_argument("config: epoch_multiplier must be >= 1");
    if (max_scoring_epochs < 1) throw std::invalid_argument("config: max_scoring_epochs must be >= 1");
    if (cl_stages < 1) throw std::invalid_argument("config: cl_stages must be >= 1");
    if (jobs < 1) throw std::invalid_argument("config: jobs must be >= 1");
    if (methods.empty()) throw std::invalid_argument("config: at least one method is required");
    for (int h : hidden)
        if (h < 1) throw std::invalid_argument("config: hidden dims must be >= 1");
    schedule::ScheduleParams{sp, ep, alpha, 1}.validate();
}

// ---------------------------------------------------------------------------
// statistics

namespace {

double mean_of(std::span<const double> xs) {
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double sum_sq_dev(std::span<const double> xs, double mean) {
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return ss;
}

// Continued fraction for the regularized incomplete beta (Lentz).
double beta_cf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-14;
    constexpr double kTiny = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double bt = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                               a * std::log(x) + b * std::log(1.0 - x));
    if (x < (a + 1.0) / (a + b + 2.0)) return bt * beta_cf(a, b, x) / a;
    return 1.0 - bt * beta_cf(b, a, 1.0 - x) / b;
}

}  // namespace

TTestResult ttest_two_sample(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2)
        throw std::invalid_argument("ttest_two_sample: both samples need >= 2 values");
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double ma = mean_of(a);
    const double mb = mean_of(b);
    const double pooled = (sum_sq_dev(a, ma) + sum_sq_dev(b, mb)) / (na + nb - 2.0);
    if (pooled == 0.0) {
        // Both samples constant: direction decides, p by convention.
        if (ma == mb) return {0.0, 1.0};
        return {ma > mb ? std::numeric_limits<double>::infinity()
                        : -std::numeric_limits<double>::infinity(),
                0.0};
    }
    const double se = std::sqrt(pooled * (1.0 / na + 1.0 / nb));
    const double t = (ma - mb) / se;
    const double df = na + nb - 2.0;
    const double p = incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
    return {t, p};
}

MomentDiagnostics loss_distribution_diagnostics(std::span<const double> losses) {
    if (losses.size() < 4)
        throw std::invalid_argument("loss_distribution_diagnostics: need N >= 4");
    const double n = static_cast<double>(losses.size());
    const double m = mean_of(losses);
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double x : losses) {
        const double d = x - m;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    MomentDiagnostics diag;
    diag.mean = m;
    diag.stddev = std::sqrt(m2 * n / (n - 1.0));
    if (m2 == 0.0) {
        diag.skewness = std::numeric_limits<double>::quiet_NaN();
        diag.excess_kurtosis = std::numeric_limits<double>::quiet_NaN();
    } else {
        diag.skewness = m3 / std::pow(m2, 1.5);
        diag.excess_kurtosis = m4 / (m2 * m2) - 3.0;
    }
    return diag;
}

// ---------------------------------------------------------------------------
// training core

namespace {

struct SelectionPlan {
    enum class Kind { Probabilistic, FixedRank } kind = Kind::Probabilistic;
    std::vector<double> scores;   // Probabilistic: selection probabilities
    std::vector<int> rank;        // FixedRank: train-split positions, best first
    bool class_balanced = false;
};

// Top-k by rank, optionally with per-class quotas proportional to the class
// frequencies of the train split.
std::vector<int> fixed_rank_subset(const SelectionPlan& plan, int k,
                                   const Eigen::VectorXi& labels, int classes) {
    const int n = static_cast<int>(plan.rank.size());
    if (!plan.class_balanced || k == n)
        return {plan.rank.begin(), plan.rank.begin() + k};

    std::vector<long> count(static_cast<std::size_t>(classes), 0);
    for (int pos : plan.rank) ++count[static_cast<std::size_t>(labels[pos])];

    std::vector<long> quota(static_cast<std::size_t>(classes), 0);
    std::vector<std::pair<long, int>> frac;  // (remainder numerator, class)
    long assigned = 0;
    for (int c = 0; c < classes; ++c) {
        quota[c] = static_cast<long>(k) * count[c] / n;
        assigned += quota[c];
        frac.emplace_back(static_cast<long>(k) * count[c] % n, c);
    }
    std::sort(frac.begin(), frac.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    long remainder = k - assigned;
    while (remainder > 0) {
        bool progressed = false;
        for (const auto& [f, c] : frac) {
            if (remainder == 0) break;
            if (quota[c] < count[c]) {
                ++quota[c];
                --remainder;
                progressed = true;
            }
        }
        if (!progressed) break;  // k > N cannot happen; guards drift
    }

    std::vector<int> subset;
    subset.reserve(static_cast<std::size_t>(k));
    std::vector<long> taken(static_cast<std::size_t>(classes), 0);
    for (int pos : plan.rank) {
        const int c = labels[pos];
        if (taken[static_cast<std::size_t>(c)] < quota[static_cast<std::size_t>(c)]) {
            ++taken[static_cast<std::size_t>(c)];
            subset.push_back(pos);
        }
    }
    return subset;
}

nn::Batch gather(const nn::Batch& source, const std::vector<int>& order, std::size_t first,
                 std::size_t count) {
    nn::Batch b;
    b.X.resize(static_cast<Eigen::Index>(count), source.X.cols());
    b.y.resize(static_cast<Eigen::Index>(count));
    for (std::size_t i = 0; i < count; ++i) {
        b.X.row(static_cast<Eigen::Index>(i)) = source.X.row(order[first + i]);
        b.y[static_cast<Eigen::Index>(i)] = source.y[order[first + i]];
    }
    return b;
}

RunResult run_training(const data::Dataset& dataset, const TrainConfig& config,
                       std::span<const double> schedule, const SelectionPlan& plan,
                       std::uint64_t seed, Method method) {
    config.validate();
    if (schedule.empty()) throw std::invalid_argument("run_training: empty schedule");
    const auto train_idx = dataset.indices(data::Split::Train);
    const int n = static_cast<int>(train_idx.size());
    if (n == 0) throw std::invalid_argument("run_training: dataset has no train rows");
    if (dataset.count(data::Split::Test) == 0)
        throw std::invalid_argument("run_training: dataset has no test rows");
    if (plan.kind == SelectionPlan::Kind::Probabilistic &&
        static_cast<int>(plan.scores.size()) != n)
        throw std::invalid_argument("run_training: scores length does not match train split");

    const nn::Batch train_all = dataset.batch(train_idx);
    const nn::Batch test = dataset.batch(data::Split::Test);
    nn::ModelState model =
        nn::init_model(nn::mlp_specs(static_cast<int>(dataset.features()), config.hidden,
                                     dataset.classes),
                       seed);
    Rng rng = seeded_rng(seed, kTrainStream);

    RunResult rr;
    rr.method = method;
    rr.seed = seed;
    rr.epochs_used = static_cast<int>(schedule.size());
    long update = 0;
    auto evaluate = [&](long at) {
        if (!rr.trace.empty() && rr.trace.back().update == at) return;
        rr.trace.push_back({at, nn::accuracy(model, test)});
    };

    for (double fraction : schedule) {
        const int k = select::subset_size(fraction, n);
        std::vector<int> active =
            plan.kind == SelectionPlan::Kind::Probabilistic
                ? select::sample_without_replacement(plan.scores, k, rng)
                : fixed_rank_subset(plan, k, train_all.y, dataset.classes);
        std::shuffle(active.begin(), active.end(), rng);
        if (config.record_batches) rr.batch_log.push_back(active);
        for (std::size_t start = 0; start < active.size();
             start += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t count =
                std::min<std::size_t>(static_cast<std::size_t>(config.batch_size),
                                      active.size() - start);
            const nn::Batch b = gather(train_all, active, start, count);
            nn::adam_step(model, nn::gradients(model, b), config.adam);
            ++update;
            if (config.eval_interval > 0 && update % config.eval_interval == 0) evaluate(update);
        }
        evaluate(update);
        if (config.diagnostics)
            rr.diagnostics.push_back(
                loss_distribution_diagnostics(nn::per_sample_losses(model, train_all)));
    }

    rr.max_test_accuracy = 0.0;
    for (const EvalPoint& p : rr.trace) rr.max_test_accuracy = std::max(rr.max_test_accuracy, p.accuracy);
    rr.final_model = std::move(model);
    return rr;
}

std::vector<double> uniform_scores(int n) {
    return std::vector<double>(static_cast<std::size_t>(n), 1.0 / n);
}

}  // namespace

std::pair<nn::ModelState, int> train_scoring_model(const data::Dataset& dataset,
                                                   const TrainConfig& config,
                                                   std::uint64_t seed) {
    config.validate();
    const auto train_idx = dataset.indices(data::Split::Train);
    const int n = static_cast<int>(train_idx.size());
    if (n == 0) throw std::invalid_argument("train_scoring_model: dataset has no train rows");
    if (dataset.count(data::Split::Val) == 0)
        throw std::invalid_argument("train_scoring_model: dataset has no validation split");

    const nn::Batch train_all = dataset.batch(train_idx);
    const nn::Batch val = dataset.batch(data::Split::Val);
    nn::ModelState model =
        nn::init_model(nn::mlp_specs(static_cast<int>(dataset.features()), config.hidden,
                                     dataset.classes),
                       seed);
    Rng rng = seeded_rng(seed, kTrainStream);

    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    double best = -1.0;
    int stale = 0;
    int epochs = 0;
    for (int e = 1; e <= config.max_scoring_epochs; ++e) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t count = std::min<std::size_t>(
                static_cast<std::size_t>(config.batch_size), order.size() - start);
            const nn::Batch b = gather(train_all, order, start, count);
            nn::adam_step(model, nn::gradients(model, b), config.adam);
        }
        epochs = e;
        const double acc = nn::accuracy(model, val);
        if (acc > best) {
            best = acc;
            stale = 0;
        } else if (++stale >= 2) {
            break;
        }
    }
    return {std::move(model), epochs};
}

std::vector<double> extract_scores(const nn::ModelState& model, const data::Dataset& dataset) {
    const nn::Batch train_all = dataset.batch(data::Split::Train);
    return select::losses_to_scores(nn::per_sample_losses(model, train_all),
                                    select::ScoreMode::Curriculum);
}

RunResult train_ccl(const data::Dataset& dataset, const TrainConfig& config,
                    std::span<const double> scores, std::span<const double> schedule,
                    std::uint64_t seed) {
    SelectionPlan plan;
    plan.kind = SelectionPlan::Kind::Probabilistic;
    plan.scores.assign(scores.begin(), scores.end());
    return run_training(dataset, config, schedule, plan, seed, Method::Ccl);
}

RunResult train_vanilla(const data::Dataset& dataset, const TrainConfig& config,
                        std::uint64_t seed, int epochs) {
    const int n = static_cast<int>(dataset.count(data::Split::Train));
    SelectionPlan plan;
    plan.kind = SelectionPlan::Kind::Probabilistic;
    plan.scores = uniform_scores(n);
    const auto schedule = schedule::constant_sizes(1.0, epochs);
    RunResult rr = run_training(dataset, config, schedule, plan, seed, Method::Vanilla);
    return rr;
}

namespace {

std::vector<int> argsort_ascending(std::span<const double> values) {
    std::vector<int> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return values[a] < values[b]; });
    return order;
}

struct SeedOutcome {
    int scoring_epochs = 0;
    std::vector<RunResult> runs;  // one per configured method, config order
};

SeedOutcome run_seed(const data::Dataset& dataset, const TrainConfig& config,
                     std::uint64_t seed) {
    SeedOutcome out;
    auto [scoring_model, scoring_epochs] =
        train_scoring_model(dataset, config, seed + kScoringSeedOffset);
    out.scoring_epochs = scoring_epochs;
    const int total_epochs = config.epoch_multiplier * scoring_epochs;

    const nn::Batch train_all = dataset.batch(data::Split::Train);
    const int n = static_cast<int>(train_all.y.size());
    std::vector<double> losses;
    if (config.external_scores.empty()) {
        losses = nn::per_sample_losses(scoring_model, train_all);
    } else {
        // Injected scores replace the self-taught scoring; invert them back
        // to pseudo-losses so every selection mode derives consistently.
        if (static_cast<int>(config.external_scores.size()) != n)
            throw std::invalid_argument("run_experiment: external scores length " +
                                        std::to_string(config.external_scores.size()) +
                                        " does not match train split size " + std::to_string(n));
        losses.reserve(config.external_scores.size());
        for (double s : config.external_scores)
            losses.push_back(1.0 / std::max(s, select::kLossFloor));
    }

    const auto cyclical =
        schedule::cyclical_sizes({config.sp, config.ep, config.alpha, total_epochs});
    const auto staged = schedule::monotonic_sizes(config.sp, config.ep, total_epochs,
                                                  std::min(config.cl_stages, total_epochs),
                                                  schedule::Direction::Increasing);
    const auto full = schedule::constant_sizes(1.0, total_epochs);

    const auto easiest_first = argsort_ascending(losses);
    std::vector<int> hardest_first(easiest_first.rbegin(), easiest_first.rend());
    std::vector<int> random_rank(static_cast<std::size_t>(n));
    std::iota(random_rank.begin(), random_rank.end(), 0);
    {
        Rng rank_rng = seeded_rng(seed, kRankStream);
        std::shuffle(random_rank.begin(), random_rank.end(), rank_rng);
    }

    for (Method method : config.methods) {
        SelectionPlan plan;
        std::span<const double> sched;
        switch (method) {
            case Method::Vanilla:
                plan.scores = uniform_scores(n);
                sched = full;
                break;
            case Method::Ccl:
                plan.scores = select::losses_to_scores(losses, select::ScoreMode::Curriculum);
                sched = cyclical;
                break;
            case Method::AntiCcl:
                plan.scores = select::losses_to_scores(losses, select::ScoreMode::Anti);
                sched = cyclical;
                break;
            case Method::RandCcl:
                plan.scores = uniform_scores(n);
                sched = cyclical;
                break;
            case Method::Cl:
                plan.kind = SelectionPlan::Kind::FixedRank;
                plan.rank = easiest_first;
                plan.class_balanced = config.class_balanced;
                sched = staged;
                break;
            case Method::AntiCl:
                plan.kind = SelectionPlan::Kind::FixedRank;
                plan.rank = hardest_first;
                plan.class_balanced = config.class_balanced;
                sched = staged;
                break;
            case Method::RandCl:
                plan.kind = SelectionPlan::Kind::FixedRank;
                plan.rank = random_rank;
                plan.class_balanced = config.class_balanced;
                sched = staged;
                break;
        }
        out.runs.push_back(run_training(dataset, config, sched, plan, seed, method));
    }
    return out;
}

}  // namespace

ComparisonReport run_experiment(const data::Dataset& dataset, const TrainConfig& config) {
    config.validate();
    const bool has_vanilla =
        std::find(config.methods.begin(), config.methods.end(), Method::Vanilla) !=
        config.methods.end();
    if (config.methods.size() > 1) {
        if (!has_vanilla)
            throw std::invalid_argument("run_experiment: comparisons require the vanilla method");
        if (config.seeds.size() < 2)
            throw std::invalid_argument("run_experiment: t-tests need at least 2 seeds");
    }

    std::vector<SeedOutcome> outcomes(config.seeds.size());
    for (std::size_t first = 0; first < config.seeds.size();
         first += static_cast<std::size_t>(config.jobs)) {
        const std::size_t last =
            std::min(config.seeds.size(), first + static_cast<std::size_t>(config.jobs));
        std::vector<std::future<SeedOutcome>> wave;
        for (std::size_t i = first; i < last; ++i)
            wave.push_back(std::async(std::launch::async, run_seed, std::cref(dataset),
                                      std::cref(config), config.seeds[i]));
        for (std::size_t i = first; i < last; ++i) outcomes[i] = wave[i - first].get();
    }

    ComparisonReport report;
    for (const SeedOutcome& o : outcomes) report.scoring_epochs.push_back(o.scoring_epochs);

    std::vector<double> vanilla_accs;
    for (std::size_t m = 0; m < config.methods.size(); ++m) {
        MethodStats stats;
        stats.method = config.methods[m];
        for (const SeedOutcome& o : outcomes)
            stats.max_accuracies.push_back(o.runs[m].max_test_accuracy);
        stats.mean = mean_of(stats.max_accuracies);
        stats.stddev = stats.max_accuracies.size() > 1
                           ? std::sqrt(sum_sq_dev(stats.max_accuracies, stats.mean) /
                                       (static_cast<double>(stats.max_accuracies.size()) - 1.0))
                           : 0.0;
        if (stats.method == Method::Vanilla) vanilla_accs = stats.max_accuracies;
        report.methods.push_back(std::move(stats));
    }

    for (MethodStats& stats : report.methods) {
        if (!has_vanilla || stats.method == Method::Vanilla || config.seeds.size() < 2) {
            stats.verdict = Verdict::Baseline;
            continue;
        }
        const TTestResult tt = ttest_two_sample(stats.max_accuracies, vanilla_accs);
        stats.t_vs_vanilla = tt.t;
        stats.p_vs_vanilla = tt.p;
        if (tt.p < kSignificance) {
            const double vanilla_mean =
                mean_of(std::span<const double>(vanilla_accs.data(), vanilla_accs.size()));
            stats.verdict = stats.mean > vanilla_mean ? Verdict::Better : Verdict::Worse;
        } else {
            stats.verdict = Verdict::Indistinguishable;
        }
    }

    for (SeedOutcome& o : outcomes)
        for (RunResult& rr : o.runs) report.runs.push_back(std::move(rr));
    return report;
}

}  // namespace ccl::train
