#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ccl/config.hpp"
#include "ccl/trainer.hpp"

namespace ccl::cli {

struct ReportBundle {
    std::filesystem::path directory;
    std::vector<std::filesystem::path> files;
};

/// Write per-run traces (runs/<method>_<seed>.csv), the comparison table
/// (comparison.csv) and the run manifest. Files are written atomically
/// (temp + rename); on error every file written so far is removed.
ReportBundle write_report_bundle(const ExperimentConfig& config,
                                 const train::ComparisonReport& report,
                                 double wall_clock_seconds);

/// The comparison table in Table-1 style: one column per method, stacked
/// metric rows (mean, std, t, p, verdict).
std::string comparison_csv(const train::ComparisonReport& report);

/// Human-readable summary printed after a train run.
std::string summary_table(const train::ComparisonReport& report);

}  // namespace ccl::cli
