#include "ccl/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "ccl/rng.hpp"
#include "ccl/text.hpp"

namespace ccl::cli {

namespace {

[[noreturn]] void fail_line(long lineno, const std::string& message) {
    throw std::invalid_argument("config: line " + std::to_string(lineno) + ": " + message);
}

double parse_double(const std::string& value, long lineno) {
    double out = 0.0;
    const char* begin = value.data();
    const char* end = begin + value.size();
    const auto [ptr, ec] = std::from_chars(begin, end, out);
    if (ec != std::errc() || ptr != end) fail_line(lineno, "expected a number, got '" + value + "'");
    return out;
}

long parse_long(const std::string& value, long lineno) {
    long out = 0;
    const char* begin = value.data();
    const char* end = begin + value.size();
    const auto [ptr, ec] = std::from_chars(begin, end, out);
    if (ec != std::errc() || ptr != end)
        fail_line(lineno, "expected an integer, got '" + value + "'");
    return out;
}

bool parse_bool(const std::string& value, long lineno) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    fail_line(lineno, "expected a boolean, got '" + value + "'");
}

std::vector<std::string> parse_list(const std::string& value) {
    std::vector<std::string> items;
    for (const std::string& piece : text::split(value, ',')) {
        const std::string item = text::trim(piece);
        if (!item.empty()) items.push_back(item);
    }
    return items;
}

const char* dataset_kind_name(DatasetKind k) {
    switch (k) {
        case DatasetKind::Blobs: return "blobs";
        case DatasetKind::Spirals: return "spirals";
        case DatasetKind::Csv: return "csv";
        case DatasetKind::Idx: return "idx";
    }
    return "?";
}

}  // namespace

void ExperimentConfig::resolve_output_dir(const std::string& override_dir) {
    if (!override_dir.empty()) {
        output_dir = override_dir;
        return;
    }
    if (!output_dir.empty()) return;
    if (const char* env = std::getenv("CCL_OUTPUT_DIR"); env && *env) {
        output_dir = env;
        return;
    }
    output_dir = "runs_out";
}

void ExperimentConfig::validate() const {
    train.validate();
    if (output_dir.empty()) throw std::invalid_argument("config: output dir must not be empty");
    if (dataset.kind == DatasetKind::Csv) {
        if (dataset.csv_path.empty())
            throw std::invalid_argument("config: csv dataset needs csv_path");
        if (!std::filesystem::exists(dataset.csv_path))
            throw std::invalid_argument("config: missing dataset file " + dataset.csv_path);
    }
    if (dataset.kind == DatasetKind::Idx) {
        for (const std::string& p :
             {dataset.idx_images, dataset.idx_labels}) {
            if (p.empty()) throw std::invalid_argument("config: idx dataset needs images and labels paths");
            if (!std::filesystem::exists(p))
                throw std::invalid_argument("config: missing dataset file " + p);
        }
        for (const std::string& p : {dataset.idx_test_images, dataset.idx_test_labels})
            if (!p.empty() && !std::filesystem::exists(p))
                throw std::invalid_argument("config: missing dataset file " + p);
        if (dataset.idx_test_images.empty() != dataset.idx_test_labels.empty())
            throw std::invalid_argument("config: idx test images and labels must be given together");
    }
}

ExperimentConfig parse_config_text(const std::string& content) {
    ExperimentConfig config;
    std::istringstream in(content);
    std::string line;
    std::string section;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = text::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail_line(lineno, "unterminated section header");
            section = text::trim(line.substr(1, line.size() - 2));
            if (section != "dataset" && section != "model" && section != "schedule" &&
                section != "train" && section != "output")
                fail_line(lineno, "unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail_line(lineno, "expected key = value");
        const std::string key = text::trim(line.substr(0, eq));
        const std::string value = text::trim(line.substr(eq + 1));
        if (section.empty()) fail_line(lineno, "key outside of any section");

        if (section == "dataset") {
            DatasetConfig& d = config.dataset;
            if (key == "kind") {
                if (value == "blobs") d.kind = DatasetKind::Blobs;
                else if (value == "spirals") d.kind = DatasetKind::Spirals;
                else if (value == "csv") d.kind = DatasetKind::Csv;
                else if (value == "idx") d.kind = DatasetKind::Idx;
                else fail_line(lineno, "unknown dataset kind '" + value + "'");
            } else if (key == "n") d.n = static_cast<int>(parse_long(value, lineno));
            else if (key == "classes") d.classes = static_cast<int>(parse_long(value, lineno));
            else if (key == "noise") d.noise = parse_double(value, lineno);
            else if (key == "csv_path") d.csv_path = value;
            else if (key == "label_column") d.label_column = value;
            else if (key == "idx_images") d.idx_images = value;
            else if (key == "idx_labels") d.idx_labels = value;
            else if (key == "idx_test_images") d.idx_test_images = value;
            else if (key == "idx_test_labels") d.idx_test_labels = value;
            else if (key == "val_fraction") d.val_fraction = parse_double(value, lineno);
            else if (key == "test_fraction") d.test_fraction = parse_double(value, lineno);
            else if (key == "stratified") d.stratified = parse_bool(value, lineno);
            else if (key == "seed") d.seed = static_cast<std::uint64_t>(parse_long(value, lineno));
            else fail_line(lineno, "unknown dataset key '" + key + "'");
        } else if (section == "model") {
            train::TrainConfig& t = config.train;
            if (key == "hidden") {
                t.hidden.clear();
                for (const std::string& item : parse_list(value))
                    t.hidden.push_back(static_cast<int>(parse_long(item, lineno)));
            } else if (key == "batch_size") t.batch_size = static_cast<int>(parse_long(value, lineno));
            else if (key == "learning_rate") t.adam.lr = parse_double(value, lineno);
            else if (key == "beta1") t.adam.beta1 = parse_double(value, lineno);
            else if (key == "beta2") t.adam.beta2 = parse_double(value, lineno);
            else if (key == "epsilon") t.adam.eps = parse_double(value, lineno);
            else fail_line(lineno, "unknown model key '" + key + "'");
        } else if (section == "schedule") {
            if (key == "sp") config.train.sp = parse_double(value, lineno);
            else if (key == "ep") config.train.ep = parse_double(value, lineno);
            else if (key == "alpha") config.train.alpha = parse_double(value, lineno);
            else fail_line(lineno, "unknown schedule key '" + key + "'");
        } else if (section == "train") {
            train::TrainConfig& t = config.train;
            if (key == "methods") {
                t.methods.clear();
                for (const std::string& item : parse_list(value)) {
                    const auto m = train::method_from_name(item);
                    if (!m) fail_line(lineno, "unknown method '" + item + "'");
                    t.methods.push_back(*m);
                }
            } else if (key == "seeds") {
                t.seeds.clear();
                for (const std::string& item : parse_list(value))
                    t.seeds.push_back(static_cast<std::uint64_t>(parse_long(item, lineno)));
            } else if (key == "epoch_multiplier") t.epoch_multiplier = static_cast<int>(parse_long(value, lineno));
            else if (key == "eval_interval") t.eval_interval = static_cast<int>(parse_long(value, lineno));
            else if (key == "max_scoring_epochs") t.max_scoring_epochs = static_cast<int>(parse_long(value, lineno));
            else if (key == "cl_stages") t.cl_stages = static_cast<int>(parse_long(value, lineno));
            else if (key == "class_balanced") t.class_balanced = parse_bool(value, lineno);
            else if (key == "diagnostics") t.diagnostics = parse_bool(value, lineno);
            else if (key == "jobs") t.jobs = static_cast<int>(parse_long(value, lineno));
            else if (key == "scores_csv") config.scores_csv = value;
            else fail_line(lineno, "unknown train key '" + key + "'");
        } else if (section == "output") {
            if (key == "dir") config.output_dir = value;
            else fail_line(lineno, "unknown output key '" + key + "'");
        }
    }
    return config;
}

ExperimentConfig parse_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str());
}

std::string echo_config(const ExperimentConfig& config) {
    std::ostringstream out;
    const DatasetConfig& d = config.dataset;
    out << "[dataset]\n";
    out << "kind = " << dataset_kind_name(d.kind) << "\n";
    out << "n = " << d.n << "\n";
    out << "classes = " << d.classes << "\n";
    out << "noise = " << text::format_double(d.noise) << "\n";
    out << "csv_path = " << d.csv_path << "\n";
    out << "label_column = " << d.label_column << "\n";
    out << "idx_images = " << d.idx_images << "\n";
    out << "idx_labels = " << d.idx_labels << "\n";
    out << "idx_test_images = " << d.idx_test_images << "\n";
    out << "idx_test_labels = " << d.idx_test_labels << "\n";
    out << "val_fraction = " << text::format_double(d.val_fraction) << "\n";
    out << "test_fraction = " << text::format_double(d.test_fraction) << "\n";
    out << "stratified = " << (d.stratified ? "true" : "false") << "\n";
    out << "seed = " << d.seed << "\n";
    const train::TrainConfig& t = config.train;
    out << "\n[model]\n";
    out << "hidden = ";
    for (std::size_t i = 0; i < t.hidden.size(); ++i) out << (i ? "," : "") << t.hidden[i];
    out << "\n";
    out << "batch_size = " << t.batch_size << "\n";
    out << "learning_rate = " << text::format_double(t.adam.lr) << "\n";
    out << "beta1 = " << text::format_double(t.adam.beta1) << "\n";
    out << "beta2 = " << text::format_double(t.adam.beta2) << "\n";
    out << "epsilon = " << text::format_double(t.adam.eps) << "\n";
    out << "\n[schedule]\n";
    out << "sp = " << text::format_double(t.sp) << "\n";
    out << "ep = " << text::format_double(t.ep) << "\n";
    out << "alpha = " << text::format_double(t.alpha) << "\n";
    out << "\n[train]\n";
    out << "methods = ";
    for (std::size_t i = 0; i < t.methods.size(); ++i)
        out << (i ? "," : "") << train::method_name(t.methods[i]);
    out << "\n";
    out << "seeds = ";
    for (std::size_t i = 0; i < t.seeds.size(); ++i) out << (i ? "," : "") << t.seeds[i];
    out << "\n";
    out << "epoch_multiplier = " << t.epoch_multiplier << "\n";
    out << "eval_interval = " << t.eval_interval << "\n";
    out << "max_scoring_epochs = " << t.max_scoring_epochs << "\n";
    out << "cl_stages = " << t.cl_stages << "\n";
    out << "class_balanced = " << (t.class_balanced ? "true" : "false") << "\n";
    out << "diagnostics = " << (t.diagnostics ? "true" : "false") << "\n";
    out << "jobs = " << t.jobs << "\n";
    out << "scores_csv = " << config.scores_csv << "\n";
    out << "\n[output]\n";
    out << "dir = " << config.output_dir << "\n";
    return out.str();
}

bool operator==(const DatasetConfig& a, const DatasetConfig& b) {
    return a.kind == b.kind && a.n == b.n && a.classes == b.classes && a.noise == b.noise &&
           a.csv_path == b.csv_path && a.label_column == b.label_column &&
           a.idx_images == b.idx_images && a.idx_labels == b.idx_labels &&
           a.idx_test_images == b.idx_test_images && a.idx_test_labels == b.idx_test_labels &&
           a.val_fraction == b.val_fraction && a.test_fraction == b.test_fraction &&
           a.stratified == b.stratified && a.seed == b.seed;
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
    return a.dataset == b.dataset && a.train == b.train && a.output_dir == b.output_dir &&
           a.scores_csv == b.scores_csv;
}

data::Dataset build_dataset(const DatasetConfig& config) {
    switch (config.kind) {
        case DatasetKind::Blobs: {
            data::Dataset ds = data::gen_blobs(config.n, config.classes, config.noise, config.seed);
            data::split_dataset(ds, config.val_fraction, config.test_fraction, config.seed + 1,
                                config.stratified);
            return ds;
        }
        case DatasetKind::Spirals: {
            data::Dataset ds = data::gen_two_spirals(config.n, config.noise, config.seed);
            data::split_dataset(ds, config.val_fraction, config.test_fraction, config.seed + 1,
                                config.stratified);
            return ds;
        }
        case DatasetKind::Csv: {
            data::Dataset ds = data::load_csv(config.csv_path, config.label_column);
            data::split_dataset(ds, config.val_fraction, config.test_fraction, config.seed + 1,
                                config.stratified);
            return ds;
        }
        case DatasetKind::Idx: {
            data::Dataset ds = data::load_idx(config.idx_images, config.idx_labels);
            if (!config.idx_test_images.empty()) {
                const data::Dataset test =
                    data::load_idx(config.idx_test_images, config.idx_test_labels);
                if (test.features() != ds.features())
                    throw std::invalid_argument("config: idx train/test image sizes differ");
                const Eigen::Index n_train = ds.rows();
                const Eigen::Index n_test = test.rows();
                data::Dataset merged;
                merged.X.resize(n_train + n_test, ds.features());
                merged.X.topRows(n_train) = ds.X;
                merged.X.bottomRows(n_test) = test.X;
                merged.y.resize(n_train + n_test);
                merged.y.head(n_train) = ds.y;
                merged.y.tail(n_test) = test.y;
                merged.classes = std::max(ds.classes, test.classes);
                merged.split.assign(static_cast<std::size_t>(n_train + n_test),
                                    data::Split::Train);
                for (Eigen::Index i = 0; i < n_test; ++i)
                    merged.split[static_cast<std::size_t>(n_train + i)] = data::Split::Test;
                // Carve the validation set from the train portion only.
                std::vector<int> train_rows(static_cast<std::size_t>(n_train));
                std::iota(train_rows.begin(), train_rows.end(), 0);
                Rng rng = seeded_rng(config.seed + 1);
                std::shuffle(train_rows.begin(), train_rows.end(), rng);
                const long n_val =
                    std::lround(config.val_fraction * static_cast<double>(n_train));
                for (long i = 0; i < n_val; ++i)
                    merged.split[static_cast<std::size_t>(train_rows[static_cast<std::size_t>(i)])] =
                        data::Split::Val;
                return merged;
            }
            data::Dataset train_only = std::move(ds);
            data::split_dataset(train_only, config.val_fraction, config.test_fraction,
                                config.seed + 1, config.stratified);
            return train_only;
        }
    }
    throw std::logic_error("build_dataset: unreachable");
}

}  // namespace ccl::cli
