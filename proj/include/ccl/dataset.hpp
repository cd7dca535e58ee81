#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "ccl/nnet.hpp"

namespace ccl::data {

enum class Split : std::uint8_t { Train, Val, Test };

struct Dataset {
    Eigen::MatrixXd X;
    Eigen::VectorXi y;
    int classes = 0;
    std::vector<Split> split;  // one tag per row; defaults to Train

    Eigen::Index rows() const { return X.rows(); }
    Eigen::Index features() const { return X.cols(); }

    std::vector<int> indices(Split which) const;
    long count(Split which) const;

    /// Materialize the rows at `rows` (dataset-global indices) as a batch.
    nn::Batch batch(const std::vector<int>& rows) const;
    nn::Batch batch(Split which) const { return batch(indices(which)); }
};

/// C isotropic Gaussian clusters with centers spaced on a circle of radius 3;
/// balanced classes (remainder rows go to the lowest class ids).
Dataset gen_blobs(int n, int classes, double noise, std::uint64_t seed);

/// Two interleaved spirals (classes 0/1, n/2 points each) with Gaussian
/// coordinate noise.
Dataset gen_two_spirals(int n, double noise, std::uint64_t seed);

/// IDX image/label file pair (big-endian, magic 0x803/0x801). Pixels are
/// scaled to [0,1] and images flattened row-major.
Dataset load_idx(const std::filesystem::path& images_path,
                 const std::filesystem::path& labels_path);

/// Numeric CSV with a header row; `label_column` holds the class labels,
/// which are remapped to dense ids 0..C-1 in sorted order.
Dataset load_csv(const std::filesystem::path& path, const std::string& label_column);

/// Tag rows with train/val/test splits. Stratified mode preserves class
/// ratios within one sample per class. Throws if a class would vanish from
/// the train split.
void split_dataset(Dataset& dataset, double val_fraction, double test_fraction,
                   std::uint64_t seed, bool stratified);

}  // namespace ccl::data
