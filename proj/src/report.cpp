#include "ccl/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ccl/text.hpp"

namespace ccl::cli {

namespace {

void write_atomic(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("report: cannot open " + tmp.string());
        out << content;
        if (!out) throw std::runtime_error("report: write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string run_trace_csv(const train::RunResult& run) {
    std::string out = "update,accuracy\n";
    for (const train::EvalPoint& p : run.trace) {
        out += std::to_string(p.update);
        out += ',';
        out += text::format_double(p.accuracy);
        out += '\n';
    }
    return out;
}

std::string diagnostics_csv(const train::RunResult& run) {
    std::string out = "epoch,mean,stddev,skewness,excess_kurtosis\n";
    for (std::size_t e = 0; e < run.diagnostics.size(); ++e) {
        const train::MomentDiagnostics& d = run.diagnostics[e];
        out += std::to_string(e + 1);
        out += ',';
        out += text::format_double(d.mean);
        out += ',';
        out += text::format_double(d.stddev);
        out += ',';
        out += std::isnan(d.skewness) ? "undefined" : text::format_double(d.skewness);
        out += ',';
        out += std::isnan(d.excess_kurtosis) ? "undefined"
                                             : text::format_double(d.excess_kurtosis);
        out += '\n';
    }
    return out;
}

}  // namespace

std::string comparison_csv(const train::ComparisonReport& report) {
    std::ostringstream out;
    out << "metric";
    for (const train::MethodStats& m : report.methods) out << ',' << train::method_name(m.method);
    out << '\n';
    out << "mean_max_accuracy";
    for (const train::MethodStats& m : report.methods) out << ',' << text::format_double(m.mean);
    out << '\n';
    out << "std_max_accuracy";
    for (const train::MethodStats& m : report.methods) out << ',' << text::format_double(m.stddev);
    out << '\n';
    out << "t_vs_vanilla";
    for (const train::MethodStats& m : report.methods)
        out << ',' << (m.verdict == train::Verdict::Baseline ? "" : text::format_double(m.t_vs_vanilla));
    out << '\n';
    out << "p_vs_vanilla";
    for (const train::MethodStats& m : report.methods)
        out << ',' << (m.verdict == train::Verdict::Baseline ? "" : text::format_double(m.p_vs_vanilla));
    out << '\n';
    out << "verdict";
    for (const train::MethodStats& m : report.methods) out << ',' << train::verdict_name(m.verdict);
    out << '\n';
    return out.str();
}

std::string summary_table(const train::ComparisonReport& report) {
    std::ostringstream out;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-10s %12s %10s %10s  %s\n", "method", "mean_max_acc", "std",
                  "p_vs_van", "verdict");
    out << buf;
    for (const train::MethodStats& m : report.methods) {
        if (m.verdict == train::Verdict::Baseline)
            std::snprintf(buf, sizeof buf, "%-10s %12.4f %10.4f %10s  %s\n",
                          train::method_name(m.method), m.mean, m.stddev, "-",
                          train::verdict_name(m.verdict));
        else
            std::snprintf(buf, sizeof buf, "%-10s %12.4f %10.4f %10.4f  %s\n",
                          train::method_name(m.method), m.mean, m.stddev, m.p_vs_vanilla,
                          train::verdict_name(m.verdict));
        out << buf;
    }
    return out.str();
}

ReportBundle write_report_bundle(const ExperimentConfig& config,
                                 const train::ComparisonReport& report,
                                 double wall_clock_seconds) {
    ReportBundle bundle;
    bundle.directory = config.output_dir;
    try {
        std::filesystem::create_directories(bundle.directory / "runs");
        for (const train::RunResult& run : report.runs) {
            const std::filesystem::path path =
                bundle.directory / "runs" /
                (std::string(train::method_name(run.method)) + "_" + std::to_string(run.seed) +
                 ".csv");
            write_atomic(path, run_trace_csv(run));
            bundle.files.push_back(path);
            if (!run.diagnostics.empty()) {
                const std::filesystem::path diag_path =
                    bundle.directory / "runs" /
                    (std::string(train::method_name(run.method)) + "_" +
                     std::to_string(run.seed) + "_diag.csv");
                write_atomic(diag_path, diagnostics_csv(run));
                bundle.files.push_back(diag_path);
            }
        }

        const std::filesystem::path comparison_path = bundle.directory / "comparison.csv";
        write_atomic(comparison_path, comparison_csv(report));
        bundle.files.push_back(comparison_path);

        std::ostringstream manifest;
        manifest << "ccl_version: 0.1.0\n";
        manifest << "wall_clock_seconds: " << text::format_double(wall_clock_seconds) << "\n";
        manifest << "seeds:";
        for (std::uint64_t s : config.train.seeds) manifest << ' ' << s;
        manifest << "\n";
        manifest << "scoring_epochs:";
        for (int e : report.scoring_epochs) manifest << ' ' << e;
        manifest << "\n";
        manifest << "--- config ---\n";
        manifest << echo_config(config);
        const std::filesystem::path manifest_path = bundle.directory / "manifest";
        write_atomic(manifest_path, manifest.str());
        bundle.files.push_back(manifest_path);
    } catch (...) {
        for (const std::filesystem::path& p : bundle.files) {
            std::error_code ec;
            std::filesystem::remove(p, ec);
        }
        throw;
    }
    return bundle;
}

}  // namespace ccl::cli
