#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ccl/config.hpp"
#include "ccl/report.hpp"
#include "ccl/schedule.hpp"
#include "ccl/selection.hpp"
#include "ccl/text.hpp"
#include "ccl/theory.hpp"
#include "ccl/trainer.hpp"

namespace {

struct ScheduleArgs {
    std::string kind = "cyclical";
    double sp = 0.25;
    double ep = 1.0;
    double alpha = 0.5;
    int epochs = 1;
    int stages = 3;
};

int cmd_schedule(const ScheduleArgs& args) {
    std::vector<double> sizes;
    if (args.kind == "cyclical") {
        sizes = ccl::schedule::cyclical_sizes({args.sp, args.ep, args.alpha, args.epochs});
    } else if (args.kind == "constant") {
        sizes = ccl::schedule::constant_sizes(args.sp, args.epochs);
    } else if (args.kind == "increasing" || args.kind == "decreasing") {
        sizes = ccl::schedule::monotonic_sizes(args.sp, args.ep, args.epochs, args.stages,
                                               args.kind == "increasing"
                                                   ? ccl::schedule::Direction::Increasing
                                                   : ccl::schedule::Direction::Decreasing);
    } else {
        throw std::invalid_argument("schedule: unknown kind '" + args.kind + "'");
    }
    std::cout << ccl::text::join_csv(sizes) << "\n";
    return 0;
}

struct TrainArgs {
    std::string config_path;
    int jobs = 0;          // 0 = keep config value
    std::string output;    // empty = keep config value
};

int cmd_train(const TrainArgs& args) {
    ccl::cli::ExperimentConfig config = ccl::cli::parse_config_file(args.config_path);
    if (args.jobs > 0) config.train.jobs = args.jobs;
    config.resolve_output_dir(args.output);
    config.validate();
    if (!config.scores_csv.empty())
        config.train.external_scores = ccl::select::load_scores_csv(config.scores_csv);

    const auto start = std::chrono::steady_clock::now();
    const ccl::data::Dataset dataset = ccl::cli::build_dataset(config.dataset);
    const ccl::train::ComparisonReport report = ccl::train::run_experiment(dataset, config.train);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const ccl::cli::ReportBundle bundle = ccl::cli::write_report_bundle(config, report, seconds);
    std::cout << ccl::cli::summary_table(report);
    std::cout << "wrote " << bundle.files.size() << " files to " << bundle.directory.string()
              << "\n";
    return 0;
}

struct TheoryArgs {
    long n = 1000000;
    std::uint64_t seed = 1;
    double tolerance = 0.02;
    bool grid = false;
    bool theorem4 = false;
    bool cases = false;
    std::vector<std::string> grid_spec;
    std::vector<double> sigmas = {0.5, 1.0, 2.0, 4.0};
    std::string out_dir = ".";
};

std::pair<double, double> parse_range(const std::string& spec) {
    const auto parts = ccl::text::split(spec, ':');
    if (parts.size() != 2)
        throw std::invalid_argument("theory: range must look like 0.1:4, got '" + spec + "'");
    return {std::stod(parts[0]), std::stod(parts[1])};
}

int cmd_theory(const TheoryArgs& args) {
    using namespace ccl::theory;
    int status = 0;
    const bool run_cases = args.cases || (!args.grid && !args.theorem4);

    if (run_cases) {
        struct Case {
            const char* family;
            const char* weighting;
            DistSpec dist;
            WeightingSpec w;
        };
        const Case cases[] = {
            {"normal", "uniform", {DistFamily::Normal, 1.0, 0.5}, {Weighting::Uniform, 1.0}},
            {"normal", "exponential", {DistFamily::Normal, 1.0, 0.5}, {Weighting::Exponential, 1.0}},
            {"half_normal", "uniform", {DistFamily::HalfNormal, 0.0, 1.0}, {Weighting::Uniform, 1.0}},
            {"half_normal", "exponential", {DistFamily::HalfNormal, 0.0, 1.0}, {Weighting::Exponential, 1.0}},
        };
        std::cout << "family,weighting,analytic,mc_estimate,std_error,rel_error\n";
        for (const Case& c : cases) {
            const double expected = analytic_error(c.dist, c.w);
            const ErrorEstimate est = mc_error(c.dist, c.w, args.n, args.seed);
            const double rel = std::fabs(est.value - expected) / expected;
            std::printf("%s,%s,%.6f,%.6f,%.6f,%.4f\n", c.family, c.weighting, expected, est.value,
                        est.std_error, rel);
            if (rel > args.tolerance) status = 1;
        }
    }

    if (args.grid) {
        double sigma_min = 0.1, sigma_max = 4.0, lambda_min = 0.1, lambda_max = 4.0;
        int steps = 32;
        for (const std::string& item : args.grid_spec) {
            const auto eq = item.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument("theory: grid spec must look like sigma=0.1:4");
            const std::string key = item.substr(0, eq);
            const std::string value = item.substr(eq + 1);
            if (key == "sigma") std::tie(sigma_min, sigma_max) = parse_range(value);
            else if (key == "lambda") std::tie(lambda_min, lambda_max) = parse_range(value);
            else if (key == "steps") steps = std::stoi(value);
            else throw std::invalid_argument("theory: unknown grid key '" + key + "'");
        }
        const auto grid = region_grid(sigma_min, sigma_max, lambda_min, lambda_max, steps);
        const std::filesystem::path path = std::filesystem::path(args.out_dir) / "region.csv";
        std::ofstream out(path);
        if (!out) throw std::runtime_error("theory: cannot open " + path.string());
        out << "sigma,lambda,diff\n";
        for (const RegionPoint& p : grid)
            out << ccl::text::format_double(p.sigma) << ',' << ccl::text::format_double(p.lambda)
                << ',' << ccl::text::format_double(p.diff) << '\n';
        std::cout << "wrote " << grid.size() << " grid rows to " << path.string() << "\n";
    }

    if (args.theorem4) {
        const Theorem4Report report =
            theorem4_bound_check(args.sigmas, args.n, 5, args.seed);
        std::printf("argmax_x,%.9f\n", report.argmax_x);
        std::printf("max_value,%.9f\n", report.max_value);
        std::printf("sigma_bound,%.6f\n", report.sigma_bound);
        std::cout << "sigma,inverse_error,uniform_error,wins,seeds\n";
        for (const Theorem4Row& row : report.rows) {
            std::printf("%g,%.6f,%.6f,%d,%d\n", row.sigma, row.inverse_error, row.uniform_error,
                        row.wins, row.seeds);
            if (row.sigma < report.sigma_bound && row.wins != row.seeds) status = 1;
        }
    }
    return status;
}

struct SampleTestArgs {
    int n = 5;
    int k = 2;
    long trials = 200000;
    std::uint64_t seed = 1;
    double tolerance = 0.01;
    bool exact = true;
    std::string scores_path;
};

int cmd_sample_test(const SampleTestArgs& args) {
    std::vector<double> scores;
    if (!args.scores_path.empty()) {
        scores = ccl::select::load_scores_csv(args.scores_path);
    } else {
        scores.resize(static_cast<std::size_t>(args.n));
        for (int i = 0; i < args.n; ++i) scores[static_cast<std::size_t>(i)] = i + 1.0;
        const double total = args.n * (args.n + 1.0) / 2.0;
        for (double& s : scores) s /= total;
    }
    const int n = static_cast<int>(scores.size());
    if (n > 12 || args.k > 6) {
        std::cerr << "sample-test: exact mode bound exceeded (need N <= 12 and k <= 6)\n";
        return 2;
    }
    if (args.k < 1 || args.k > n) {
        std::cerr << "sample-test: need 1 <= k <= N\n";
        return 2;
    }

    const auto exact = ccl::select::inclusion_probabilities_bruteforce(scores, args.k);
    std::vector<long> hits(static_cast<std::size_t>(n), 0);
    ccl::Rng rng = ccl::seeded_rng(args.seed);
    for (long t = 0; t < args.trials; ++t)
        for (int idx : ccl::select::sample_without_replacement(scores, args.k, rng))
            ++hits[static_cast<std::size_t>(idx)];

    double worst = 0.0;
    std::cout << "index,exact,empirical,abs_dev\n";
    for (int i = 0; i < n; ++i) {
        const double freq =
            static_cast<double>(hits[static_cast<std::size_t>(i)]) / static_cast<double>(args.trials);
        const double dev = std::fabs(freq - exact[static_cast<std::size_t>(i)]);
        worst = std::max(worst, dev);
        std::printf("%d,%.6f,%.6f,%.6f\n", i, exact[static_cast<std::size_t>(i)], freq, dev);
    }
    std::printf("max_abs_deviation,%.6f\n", worst);
    if (worst > args.tolerance) {
        std::cerr << "sample-test: deviation exceeds tolerance " << args.tolerance << "\n";
        return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cyclical curriculum learning toolkit"};
    app.require_subcommand(1);

    ScheduleArgs schedule_args;
    CLI::App* schedule_cmd = app.add_subcommand("schedule", "print a dataset-size schedule as CSV");
    schedule_cmd->add_option("--kind", schedule_args.kind,
                             "cyclical | constant | increasing | decreasing");
    schedule_cmd->add_option("--sp", schedule_args.sp, "initial fraction");
    schedule_cmd->add_option("--ep", schedule_args.ep, "final fraction");
    schedule_cmd->add_option("--alpha", schedule_args.alpha, "cycle speed in (0,1]");
    schedule_cmd->add_option("--epochs", schedule_args.epochs, "schedule length")->required();
    schedule_cmd->add_option("--stages", schedule_args.stages, "plateaus for monotonic kinds");

    TrainArgs train_args;
    CLI::App* train_cmd = app.add_subcommand("train", "run a full experiment from a config file");
    train_cmd->add_option("--config", train_args.config_path, "config file path")->required();
    train_cmd->add_option("--jobs", train_args.jobs, "parallel seed pipelines");
    train_cmd->add_option("--output", train_args.output, "override the output directory");

    TheoryArgs theory_args;
    CLI::App* theory_cmd =
        app.add_subcommand("theory", "verify the analytic error formulas against Monte Carlo");
    theory_cmd->add_option("--n", theory_args.n, "Monte-Carlo population size");
    theory_cmd->add_option("--seed", theory_args.seed, "base seed");
    theory_cmd->add_option("--tolerance", theory_args.tolerance, "relative tolerance");
    theory_cmd->add_flag("--cases", theory_args.cases, "run the verification cases");
    theory_cmd->add_option("--grid", theory_args.grid_spec,
                           "emit the region grid; e.g. --grid sigma=0.1:4 lambda=0.1:4 steps=64")
        ->expected(0, 3);
    theory_cmd->add_flag("--theorem4", theory_args.theorem4, "run the inverse-weighting bound check");
    theory_cmd->add_option("--sigmas", theory_args.sigmas, "sigmas for --theorem4");
    theory_cmd->add_option("--out", theory_args.out_dir, "output directory for CSV files");

    SampleTestArgs sample_args;
    CLI::App* sample_cmd = app.add_subcommand(
        "sample-test", "compare sampler inclusion frequencies against exact enumeration");
    sample_cmd->add_option("--n", sample_args.n, "number of scores (<= 12)");
    sample_cmd->add_option("--k", sample_args.k, "subset size (<= 6)");
    sample_cmd->add_option("--trials", sample_args.trials, "empirical trials");
    sample_cmd->add_option("--seed", sample_args.seed, "sampler seed");
    sample_cmd->add_option("--tolerance", sample_args.tolerance, "max absolute deviation");
    sample_cmd->add_flag("--exact", sample_args.exact, "exact enumeration mode (default)");
    sample_cmd->add_option("--scores", sample_args.scores_path, "scores CSV (index,score)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }

    try {
        if (schedule_cmd->parsed()) return cmd_schedule(schedule_args);
        if (train_cmd->parsed()) return cmd_train(train_args);
        if (theory_cmd->parsed()) {
            theory_args.grid = theory_cmd->count("--grid") > 0;
            return cmd_theory(theory_args);
        }
        if (sample_cmd->parsed()) return cmd_sample_test(sample_args);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
