#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "ccl/dataset.hpp"
#include "ccl/trainer.hpp"

namespace ccl::cli {

enum class DatasetKind { Blobs, Spirals, Csv, Idx };

struct DatasetConfig {
    DatasetKind kind = DatasetKind::Blobs;
    int n = 1000;
    int classes = 3;             // blobs only
    double noise = 0.5;
    std::string csv_path;        // csv
    std::string label_column = "label";
    std::string idx_images;      // idx
    std::string idx_labels;
    std::string idx_test_images; // optional native test pair
    std::string idx_test_labels;
    double val_fraction = 0.1;
    double test_fraction = 0.2;
    bool stratified = false;
    std::uint64_t seed = 1;
};

struct ExperimentConfig {
    DatasetConfig dataset;
    train::TrainConfig train;
    // Resolution order: --output flag, [output] dir, CCL_OUTPUT_DIR, then
    // "runs_out"; empty means not yet resolved.
    std::string output_dir;
    std::string scores_csv;  // optional externally produced score file

    void resolve_output_dir(const std::string& override_dir = "");
    void validate() const;
};

/// Parse the key = value config document (sections [dataset], [model],
/// [schedule], [train], [output]). Unknown keys and malformed values raise
/// std::invalid_argument with the line number.
ExperimentConfig parse_config_text(const std::string& content);
ExperimentConfig parse_config_file(const std::filesystem::path& path);

/// Canonical text form; parse_config_text(echo_config(c)) reproduces c.
std::string echo_config(const ExperimentConfig& config);

bool operator==(const DatasetConfig& a, const DatasetConfig& b);
bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

/// Materialize the configured dataset, including split tags.
data::Dataset build_dataset(const DatasetConfig& config);

}  // namespace ccl::cli
