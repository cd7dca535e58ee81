#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <stdexcept>

#include "ccl/config.hpp"
#include "ccl/dataset.hpp"
#include "ccl/nnet.hpp"
#include "ccl/schedule.hpp"
#include "ccl/selection.hpp"
#include "ccl/theory.hpp"
#include "ccl/trainer.hpp"

namespace py = pybind11;
using namespace ccl;

namespace {

select::ScoreMode score_mode(const std::string& name) {
    if (name == "curriculum") return select::ScoreMode::Curriculum;
    if (name == "anti") return select::ScoreMode::Anti;
    if (name == "uniform") return select::ScoreMode::Uniform;
    throw std::invalid_argument("score mode must be curriculum | anti | uniform");
}

theory::DistSpec dist_spec(const std::string& family, double mu, double sigma) {
    if (family == "normal") return {theory::DistFamily::Normal, mu, sigma};
    if (family == "half_normal") return {theory::DistFamily::HalfNormal, mu, sigma};
    throw std::invalid_argument("family must be normal | half_normal");
}

theory::WeightingSpec weighting_spec(const std::string& kind, double lambda) {
    if (kind == "uniform") return {theory::Weighting::Uniform, lambda};
    if (kind == "exponential") return {theory::Weighting::Exponential, lambda};
    if (kind == "inverse") return {theory::Weighting::Inverse, lambda};
    throw std::invalid_argument("weighting must be uniform | exponential | inverse");
}

std::vector<train::Method> method_list(const std::vector<std::string>& names) {
    std::vector<train::Method> methods;
    for (const std::string& name : names) {
        const auto m = train::method_from_name(name);
        if (!m) throw std::invalid_argument("unknown method '" + name + "'");
        methods.push_back(*m);
    }
    return methods;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Cyclical curriculum learning: schedules, weighted sampling, training loop and "
              "selection-error analysis";

    // ---- schedules ----
    m.def(
        "cyclical_sizes",
        [](double sp, double ep, double alpha, int epochs) {
            return schedule::cyclical_sizes({sp, ep, alpha, epochs});
        },
        py::arg("sp"), py::arg("ep"), py::arg("alpha"), py::arg("epochs"),
        "Cyclical per-epoch dataset fractions");
    m.def("constant_sizes", &schedule::constant_sizes, py::arg("p"), py::arg("epochs"));
    m.def(
        "monotonic_sizes",
        [](double sp, double ep, int epochs, int stages, const std::string& direction) {
            if (direction != "increasing" && direction != "decreasing")
                throw std::invalid_argument("direction must be increasing | decreasing");
            return schedule::monotonic_sizes(sp, ep, epochs, stages,
                                             direction == "increasing"
                                                 ? schedule::Direction::Increasing
                                                 : schedule::Direction::Decreasing);
        },
        py::arg("sp"), py::arg("ep"), py::arg("epochs"), py::arg("stages"),
        py::arg("direction") = "increasing");

    // ---- selection ----
    m.def(
        "losses_to_scores",
        [](const std::vector<double>& losses, const std::string& mode) {
            return select::losses_to_scores(losses, score_mode(mode));
        },
        py::arg("losses"), py::arg("mode") = "curriculum");
    m.def("subset_size", &select::subset_size, py::arg("fraction"), py::arg("n"));
    m.def(
        "sample_without_replacement",
        [](const std::vector<double>& scores, int k, std::uint64_t seed) {
            Rng rng = seeded_rng(seed);
            return select::sample_without_replacement(scores, k, rng);
        },
        py::arg("scores"), py::arg("k"), py::arg("seed"));
    m.def(
        "inclusion_probabilities_bruteforce",
        [](const std::vector<double>& scores, int k) {
            return select::inclusion_probabilities_bruteforce(scores, k);
        },
        py::arg("scores"), py::arg("k"));
    m.def("save_scores_csv",
          [](const std::filesystem::path& p, const std::vector<double>& s) {
              select::save_scores_csv(p, s);
          },
          py::arg("path"), py::arg("scores"));
    m.def("load_scores_csv", &select::load_scores_csv, py::arg("path"));

    // ---- datasets ----
    py::class_<data::Dataset>(m, "Dataset")
        .def_readonly("X", &data::Dataset::X)
        .def_readonly("y", &data::Dataset::y)
        .def_readonly("classes", &data::Dataset::classes)
        .def_property_readonly("split",
                               [](const data::Dataset& ds) {
                                   std::vector<int> tags;
                                   tags.reserve(ds.split.size());
                                   for (auto s : ds.split) tags.push_back(static_cast<int>(s));
                                   return tags;
                               })
        .def("count",
             [](const data::Dataset& ds, const std::string& which) {
                 if (which == "train") return ds.count(data::Split::Train);
                 if (which == "val") return ds.count(data::Split::Val);
                 if (which == "test") return ds.count(data::Split::Test);
                 throw std::invalid_argument("split must be train | val | test");
             })
        .def("__repr__", [](const data::Dataset& ds) {
            return "<Dataset rows=" + std::to_string(ds.rows()) +
                   " features=" + std::to_string(ds.features()) +
                   " classes=" + std::to_string(ds.classes) + ">";
        });
    m.def("gen_blobs", &data::gen_blobs, py::arg("n"), py::arg("classes"), py::arg("noise"),
          py::arg("seed"));
    m.def("gen_two_spirals", &data::gen_two_spirals, py::arg("n"), py::arg("noise"),
          py::arg("seed"));
    m.def("load_idx", &data::load_idx, py::arg("images_path"), py::arg("labels_path"));
    m.def("load_csv", &data::load_csv, py::arg("path"), py::arg("label_column"));
    m.def("split_dataset", &data::split_dataset, py::arg("dataset"), py::arg("val_fraction"),
          py::arg("test_fraction"), py::arg("seed"), py::arg("stratified") = false);

    // ---- model ----
    py::class_<nn::ModelState>(m, "ModelState")
        .def_readonly("adam_step", &nn::ModelState::adam_step)
        .def_readonly("init_seed", &nn::ModelState::init_seed);
    m.def(
        "init_mlp",
        [](int input_dim, const std::vector<int>& hidden, int classes, std::uint64_t seed) {
            return nn::init_model(nn::mlp_specs(input_dim, hidden, classes), seed);
        },
        py::arg("input_dim"), py::arg("hidden"), py::arg("classes"), py::arg("seed"));
    m.def("forward", &nn::forward, py::arg("model"), py::arg("X"));
    m.def(
        "per_sample_losses",
        [](const nn::ModelState& model, const Eigen::MatrixXd& X, const Eigen::VectorXi& y) {
            return nn::per_sample_losses(model, {X, y});
        },
        py::arg("model"), py::arg("X"), py::arg("y"));
    m.def(
        "accuracy",
        [](const nn::ModelState& model, const Eigen::MatrixXd& X, const Eigen::VectorXi& y) {
            return nn::accuracy(model, {X, y});
        },
        py::arg("model"), py::arg("X"), py::arg("y"));
    m.def("save_model", &nn::save_model, py::arg("model"), py::arg("path"));
    m.def("load_model", &nn::load_model, py::arg("path"));

    // ---- training ----
    py::class_<train::TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("hidden", &train::TrainConfig::hidden)
        .def_readwrite("batch_size", &train::TrainConfig::batch_size)
        .def_readwrite("sp", &train::TrainConfig::sp)
        .def_readwrite("ep", &train::TrainConfig::ep)
        .def_readwrite("alpha", &train::TrainConfig::alpha)
        .def_readwrite("eval_interval", &train::TrainConfig::eval_interval)
        .def_readwrite("seeds", &train::TrainConfig::seeds)
        .def_readwrite("epoch_multiplier", &train::TrainConfig::epoch_multiplier)
        .def_readwrite("max_scoring_epochs", &train::TrainConfig::max_scoring_epochs)
        .def_readwrite("cl_stages", &train::TrainConfig::cl_stages)
        .def_readwrite("class_balanced", &train::TrainConfig::class_balanced)
        .def_readwrite("diagnostics", &train::TrainConfig::diagnostics)
        .def_readwrite("jobs", &train::TrainConfig::jobs)
        .def_property(
            "learning_rate", [](const train::TrainConfig& c) { return c.adam.lr; },
            [](train::TrainConfig& c, double lr) { c.adam.lr = lr; })
        .def_property(
            "methods",
            [](const train::TrainConfig& c) {
                std::vector<std::string> names;
                for (auto m : c.methods) names.emplace_back(train::method_name(m));
                return names;
            },
            [](train::TrainConfig& c, const std::vector<std::string>& names) {
                c.methods = method_list(names);
            });

    py::class_<train::EvalPoint>(m, "EvalPoint")
        .def_readonly("update", &train::EvalPoint::update)
        .def_readonly("accuracy", &train::EvalPoint::accuracy);
    py::class_<train::RunResult>(m, "RunResult")
        .def_property_readonly(
            "method", [](const train::RunResult& r) { return train::method_name(r.method); })
        .def_readonly("seed", &train::RunResult::seed)
        .def_readonly("epochs_used", &train::RunResult::epochs_used)
        .def_readonly("max_test_accuracy", &train::RunResult::max_test_accuracy)
        .def_readonly("trace", &train::RunResult::trace);
    py::class_<train::MethodStats>(m, "MethodStats")
        .def_property_readonly(
            "method", [](const train::MethodStats& s) { return train::method_name(s.method); })
        .def_readonly("max_accuracies", &train::MethodStats::max_accuracies)
        .def_readonly("mean", &train::MethodStats::mean)
        .def_readonly("stddev", &train::MethodStats::stddev)
        .def_readonly("t_vs_vanilla", &train::MethodStats::t_vs_vanilla)
        .def_readonly("p_vs_vanilla", &train::MethodStats::p_vs_vanilla)
        .def_property_readonly("verdict", [](const train::MethodStats& s) {
            return train::verdict_name(s.verdict);
        });
    py::class_<train::ComparisonReport>(m, "ComparisonReport")
        .def_readonly("methods", &train::ComparisonReport::methods)
        .def_readonly("runs", &train::ComparisonReport::runs)
        .def_readonly("scoring_epochs", &train::ComparisonReport::scoring_epochs);

    m.def("train_scoring_model", &train::train_scoring_model, py::arg("dataset"),
          py::arg("config"), py::arg("seed"));
    m.def("extract_scores", &train::extract_scores, py::arg("model"), py::arg("dataset"));
    m.def(
        "train_ccl",
        [](const data::Dataset& ds, const train::TrainConfig& config,
           const std::vector<double>& scores, const std::vector<double>& sched,
           std::uint64_t seed) { return train::train_ccl(ds, config, scores, sched, seed); },
        py::arg("dataset"), py::arg("config"), py::arg("scores"), py::arg("schedule"),
        py::arg("seed"));
    m.def("train_vanilla", &train::train_vanilla, py::arg("dataset"), py::arg("config"),
          py::arg("seed"), py::arg("epochs"));
    m.def("run_experiment", &train::run_experiment, py::arg("dataset"), py::arg("config"));
    m.def(
        "ttest_two_sample",
        [](const std::vector<double>& a, const std::vector<double>& b) {
            const auto r = train::ttest_two_sample(a, b);
            return py::make_tuple(r.t, r.p);
        },
        py::arg("a"), py::arg("b"));
    m.def(
        "loss_distribution_diagnostics",
        [](const std::vector<double>& losses) {
            const auto d = train::loss_distribution_diagnostics(losses);
            return py::make_tuple(d.mean, d.stddev, d.skewness, d.excess_kurtosis);
        },
        py::arg("losses"));

    // ---- selection-error analysis ----
    m.def("erfc", &theory::erfc, py::arg("x"));
    m.def(
        "analytic_error",
        [](const std::string& family, const std::string& weighting, double mu, double sigma,
           double lam) {
            return theory::analytic_error(dist_spec(family, mu, sigma),
                                          weighting_spec(weighting, lam));
        },
        py::arg("family"), py::arg("weighting"), py::arg("mu") = 0.0, py::arg("sigma") = 1.0,
        py::arg("lambda_") = 1.0);
    m.def(
        "mc_error",
        [](const std::string& family, const std::string& weighting, double mu, double sigma,
           double lam, long n, std::uint64_t seed) {
            const auto est = theory::mc_error(dist_spec(family, mu, sigma),
                                              weighting_spec(weighting, lam), n, seed);
            return py::make_tuple(est.value, est.std_error, est.n_samples);
        },
        py::arg("family"), py::arg("weighting"), py::arg("mu") = 0.0, py::arg("sigma") = 1.0,
        py::arg("lambda_") = 1.0, py::arg("n") = 1000000, py::arg("seed") = 1);
    m.def(
        "region_grid",
        [](double sigma_min, double sigma_max, double lambda_min, double lambda_max, int steps) {
            const auto grid =
                theory::region_grid(sigma_min, sigma_max, lambda_min, lambda_max, steps);
            Eigen::MatrixXd out(static_cast<Eigen::Index>(grid.size()), 3);
            for (std::size_t i = 0; i < grid.size(); ++i) {
                out(static_cast<Eigen::Index>(i), 0) = grid[i].sigma;
                out(static_cast<Eigen::Index>(i), 1) = grid[i].lambda;
                out(static_cast<Eigen::Index>(i), 2) = grid[i].diff;
            }
            return out;
        },
        py::arg("sigma_min"), py::arg("sigma_max"), py::arg("lambda_min"), py::arg("lambda_max"),
        py::arg("steps"));
    m.def(
        "theorem4_bound_check",
        [](const std::vector<double>& sigmas, long n, int seeds_per_sigma, std::uint64_t seed) {
            const auto rep = theory::theorem4_bound_check(sigmas, n, seeds_per_sigma, seed);
            py::dict out;
            out["argmax_x"] = rep.argmax_x;
            out["max_value"] = rep.max_value;
            out["sigma_bound"] = rep.sigma_bound;
            py::list rows;
            for (const auto& row : rep.rows) {
                py::dict r;
                r["sigma"] = row.sigma;
                r["inverse_error"] = row.inverse_error;
                r["uniform_error"] = row.uniform_error;
                r["wins"] = row.wins;
                r["seeds"] = row.seeds;
                rows.append(r);
            }
            out["rows"] = rows;
            return out;
        },
        py::arg("sigmas"), py::arg("n") = 1000000, py::arg("seeds_per_sigma") = 5,
        py::arg("seed") = 1);
    m.def(
        "cyclical_error_simulation",
        [](long n, int steps, std::uint64_t seed) {
            const auto trace = theory::cyclical_error_simulation(n, steps, seed);
            return py::make_tuple(trace.ccl_total, trace.uniform_total);
        },
        py::arg("n"), py::arg("steps"), py::arg("seed"));

    m.attr("__version__") = "0.1.0";
}
