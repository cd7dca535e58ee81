#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace ccl::nn {

enum class Activation { Relu, SoftmaxOutput };

struct LayerSpec {
    int input_dim = 1;
    int output_dim = 1;
    Activation activation = Activation::Relu;
};

struct AdamParams {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    bool operator==(const AdamParams&) const = default;
};

// Weight matrices are (input_dim x output_dim); activations flow as
// row-major sample batches, A_next = relu(A * W + b).
struct Layer {
    Eigen::MatrixXd W;
    Eigen::RowVectorXd b;
    Eigen::MatrixXd mW, vW;       // Adam first/second moments
    Eigen::RowVectorXd mb, vb;
};

struct ModelState {
    std::vector<LayerSpec> specs;
    std::vector<Layer> layers;
    long adam_step = 0;
    std::uint64_t init_seed = 0;
};

struct Batch {
    Eigen::MatrixXd X;    // rows = samples
    Eigen::VectorXi y;    // class labels in [0, C)
};

struct Gradients {
    std::vector<Eigen::MatrixXd> dW;
    std::vector<Eigen::RowVectorXd> db;
};

/// Layer chain for an MLP: input_dim -> hidden... -> classes, ReLU between,
/// softmax on the output.
std::vector<LayerSpec> mlp_specs(int input_dim, const std::vector<int>& hidden, int classes);

/// He-scaled Gaussian weights (std = sqrt(2/input_dim)), zero biases, zeroed
/// Adam state. Deterministic per seed.
ModelState init_model(const std::vector<LayerSpec>& specs, std::uint64_t seed);

/// Class probabilities, one row per sample; rows lie on the simplex.
Eigen::MatrixXd forward(const ModelState& model, const Eigen::MatrixXd& X);

/// Cross-entropy -log p[y_i] per sample, log-sum-exp stabilized and clamped
/// so the loss never exceeds -log(1e-12).
std::vector<double> per_sample_losses(const ModelState& model, const Batch& batch);

/// Backpropagation gradients of the mean cross-entropy over the batch.
Gradients gradients(const ModelState& model, const Batch& batch);

/// In-place Adam update with bias correction; increments the step counter.
void adam_step(ModelState& model, const Gradients& grads, const AdamParams& params);

/// Fraction of samples whose argmax probability matches the label; argmax
/// ties break to the lowest class index.
double accuracy(const ModelState& model, const Batch& batch);

/// Text checkpoint (layer dims header + row-major parameters + Adam state);
/// round-trips exactly.
void save_model(const ModelState& model, const std::filesystem::path& path);
ModelState load_model(const std::filesystem::path& path);

}  // namespace ccl::nn
