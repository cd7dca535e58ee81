#include "ccl/nnet.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ccl/rng.hpp"

namespace ccl::nn {

namespace {

constexpr double kProbClamp = 1e-12;  // floor on probabilities before log

void validate_chain(const std::vector<LayerSpec>& specs) {
    if (specs.empty()) throw std::invalid_argument("nnet: empty layer chain");
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const LayerSpec& s = specs[i];
        if (s.input_dim < 1 || s.output_dim < 1)
            throw std::invalid_argument("nnet: layer dims must be >= 1");
        const bool last = i + 1 == specs.size();
        if (last && s.activation != Activation::SoftmaxOutput)
            throw std::invalid_argument("nnet: final layer must be softmax output");
        if (!last && s.activation != Activation::Relu)
            throw std::invalid_argument("nnet: softmax is only allowed on the final layer");
        if (!last && s.output_dim != specs[i + 1].input_dim)
            throw std::invalid_argument("nnet: layer dims do not chain");
    }
}

void check_input(const ModelState& model, const Eigen::MatrixXd& X) {
    if (X.cols() != model.specs.front().input_dim)
        throw std::invalid_argument("nnet: feature dimension does not match first layer");
}

void check_labels(const ModelState& model, const Batch& batch) {
    if (batch.X.rows() != batch.y.size())
        throw std::invalid_argument("nnet: X rows and label count differ");
    const int classes = model.specs.back().output_dim;
    for (Eigen::Index i = 0; i < batch.y.size(); ++i)
        if (batch.y[i] < 0 || batch.y[i] >= classes)
            throw std::invalid_argument("nnet: label out of range at row " + std::to_string(i));
}

// Activations per layer boundary: acts[0] = X, acts[l+1] = relu output of
// layer l for hidden layers; the final entry holds raw logits.
std::vector<Eigen::MatrixXd> forward_cached(const ModelState& model, const Eigen::MatrixXd& X) {
    std::vector<Eigen::MatrixXd> acts;
    acts.reserve(model.layers.size() + 1);
    acts.push_back(X);
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        const Layer& layer = model.layers[l];
        Eigen::MatrixXd z = (acts.back() * layer.W).rowwise() + layer.b;
        if (l + 1 < model.layers.size()) z = z.cwiseMax(0.0);
        acts.push_back(std::move(z));
    }
    return acts;
}

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
    Eigen::MatrixXd p = logits;
    for (Eigen::Index r = 0; r < p.rows(); ++r) {
        const double m = p.row(r).maxCoeff();
        p.row(r) = (p.row(r).array() - m).exp();
        p.row(r) /= p.row(r).sum();
    }
    return p;
}

}  // namespace

std::vector<LayerSpec> mlp_specs(int input_dim, const std::vector<int>& hidden, int classes) {
    std::vector<LayerSpec> specs;
    int in = input_dim;
    for (int h : hidden) {
        specs.push_back({in, h, Activation::Relu});
        in = h;
    }
    specs.push_back({in, classes, Activation::SoftmaxOutput});
    return specs;
}

ModelState init_model(const std::vector<LayerSpec>& specs, std::uint64_t seed) {
    validate_chain(specs);
    ModelState model;
    model.specs = specs;
    model.init_seed = seed;
    Rng rng = seeded_rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (const LayerSpec& s : specs) {
        Layer layer;
        const double scale = std::sqrt(2.0 / s.input_dim);
        layer.W.resize(s.input_dim, s.output_dim);
        for (Eigen::Index i = 0; i < layer.W.size(); ++i)
            layer.W.data()[i] = scale * normal(rng);
        layer.b = Eigen::RowVectorXd::Zero(s.output_dim);
        layer.mW = Eigen::MatrixXd::Zero(s.input_dim, s.output_dim);
        layer.vW = Eigen::MatrixXd::Zero(s.input_dim, s.output_dim);
        layer.mb = Eigen::RowVectorXd::Zero(s.output_dim);
        layer.vb = Eigen::RowVectorXd::Zero(s.output_dim);
        model.layers.push_back(std::move(layer));
    }
    return model;
}

Eigen::MatrixXd forward(const ModelState& model, const Eigen::MatrixXd& X) {
    check_input(model, X);
    return softmax_rows(forward_cached(model, X).back());
}

std::vector<double> per_sample_losses(const ModelState& model, const Batch& batch) {
    check_input(model, batch.X);
    check_labels(model, batch);
    const Eigen::MatrixXd logits = forward_cached(model, batch.X).back();
    std::vector<double> losses(static_cast<std::size_t>(batch.X.rows()));
    const double max_loss = -std::log(kProbClamp);
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
        const double m = logits.row(r).maxCoeff();
        const double lse = m + std::log((logits.row(r).array() - m).exp().sum());
        const double logp = logits(r, batch.y[r]) - lse;
        losses[static_cast<std::size_t>(r)] = std::clamp(-logp, 0.0, max_loss);
    }
    return losses;
}

Gradients gradients(const ModelState& model, const Batch& batch) {
    check_input(model, batch.X);
    check_labels(model, batch);
    const auto acts = forward_cached(model, batch.X);
    const Eigen::Index n = batch.X.rows();
    const std::size_t L = model.layers.size();

    Eigen::MatrixXd delta = softmax_rows(acts.back());
    for (Eigen::Index r = 0; r < n; ++r) delta(r, batch.y[r]) -= 1.0;
    delta /= static_cast<double>(n);

    Gradients grads;
    grads.dW.resize(L);
    grads.db.resize(L);
    for (std::size_t l = L; l-- > 0;) {
        grads.dW[l] = acts[l].transpose() * delta;
        grads.db[l] = delta.colwise().sum();
        if (l > 0)
            delta = (delta * model.layers[l].W.transpose())
                        .cwiseProduct((acts[l].array() > 0.0).cast<double>().matrix());
    }
    return grads;
}

void adam_step(ModelState& model, const Gradients& grads, const AdamParams& params) {
    if (grads.dW.size() != model.layers.size() || grads.db.size() != model.layers.size())
        throw std::invalid_argument("adam_step: gradient count does not match layers");
    const long t = ++model.adam_step;
    const double bc1 = 1.0 - std::pow(params.beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(params.beta2, static_cast<double>(t));
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        Layer& layer = model.layers[l];
        const Eigen::MatrixXd& gW = grads.dW[l];
        const Eigen::RowVectorXd& gb = grads.db[l];
        if (gW.rows() != layer.W.rows() || gW.cols() != layer.W.cols() ||
            gb.size() != layer.b.size())
            throw std::invalid_argument("adam_step: gradient shape mismatch at layer " +
                                        std::to_string(l));
        layer.mW = params.beta1 * layer.mW + (1.0 - params.beta1) * gW;
        layer.vW = params.beta2 * layer.vW + (1.0 - params.beta2) * gW.cwiseProduct(gW);
        layer.W.array() -=
            params.lr * (layer.mW.array() / bc1) / ((layer.vW.array() / bc2).sqrt() + params.eps);
        layer.mb = params.beta1 * layer.mb + (1.0 - params.beta1) * gb;
        layer.vb = params.beta2 * layer.vb + (1.0 - params.beta2) * gb.cwiseProduct(gb);
        layer.b.array() -=
            params.lr * (layer.mb.array() / bc1) / ((layer.vb.array() / bc2).sqrt() + params.eps);
    }
}

double accuracy(const ModelState& model, const Batch& batch) {
    check_input(model, batch.X);
    check_labels(model, batch);
    const Eigen::MatrixXd p = forward(model, batch.X);
    long correct = 0;
    for (Eigen::Index r = 0; r < p.rows(); ++r) {
        int best = 0;
        for (Eigen::Index c = 1; c < p.cols(); ++c)
            if (p(r, c) > p(r, best)) best = static_cast<int>(c);
        if (best == batch.y[r]) ++correct;
    }
    return p.rows() == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(p.rows());
}

namespace {

void write_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
    char buf[32];
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            std::snprintf(buf, sizeof buf, "%.17g", m(r, c));
            out << buf << (c + 1 == m.cols() ? '\n' : ' ');
        }
    }
}

Eigen::MatrixXd read_matrix(std::istream& in, Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c)
            if (!(in >> m(r, c))) throw std::runtime_error("load_model: truncated matrix data");
    return m;
}

}  // namespace

void save_model(const ModelState& model, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_model: cannot open " + path.string());
    out << "ccl-model v1\n";
    out << "init_seed " << model.init_seed << "\n";
    out << "adam_step " << model.adam_step << "\n";
    out << "layers " << model.specs.size() << "\n";
    for (const LayerSpec& s : model.specs)
        out << s.input_dim << ' ' << s.output_dim << ' '
            << (s.activation == Activation::Relu ? "relu" : "softmax") << "\n";
    for (const Layer& layer : model.layers) {
        write_matrix(out, layer.W);
        write_matrix(out, layer.b);
        write_matrix(out, layer.mW);
        write_matrix(out, layer.vW);
        write_matrix(out, layer.mb);
        write_matrix(out, layer.vb);
    }
    if (!out) throw std::runtime_error("save_model: write failed for " + path.string());
}

ModelState load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_model: cannot open " + path.string());
    std::string magic, version, key;
    in >> magic >> version;
    if (magic != "ccl-model" || version != "v1")
        throw std::runtime_error("load_model: bad header in " + path.string());
    ModelState model;
    std::size_t layer_count = 0;
    in >> key >> model.init_seed;
    if (key != "init_seed") throw std::runtime_error("load_model: expected init_seed");
    in >> key >> model.adam_step;
    if (key != "adam_step") throw std::runtime_error("load_model: expected adam_step");
    in >> key >> layer_count;
    if (key != "layers" || !in) throw std::runtime_error("load_model: expected layer count");
    for (std::size_t l = 0; l < layer_count; ++l) {
        LayerSpec s;
        std::string act;
        if (!(in >> s.input_dim >> s.output_dim >> act))
            throw std::runtime_error("load_model: truncated layer spec");
        s.activation = act == "relu" ? Activation::Relu : Activation::SoftmaxOutput;
        model.specs.push_back(s);
    }
    validate_chain(model.specs);
    for (const LayerSpec& s : model.specs) {
        Layer layer;
        layer.W = read_matrix(in, s.input_dim, s.output_dim);
        layer.b = read_matrix(in, 1, s.output_dim);
        layer.mW = read_matrix(in, s.input_dim, s.output_dim);
        layer.vW = read_matrix(in, s.input_dim, s.output_dim);
        layer.mb = read_matrix(in, 1, s.output_dim);
        layer.vb = read_matrix(in, 1, s.output_dim);
        model.layers.push_back(std::move(layer));
    }
    return model;
}

}  // namespace ccl::nn
