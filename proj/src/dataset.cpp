#include "ccl/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "ccl/rng.hpp"

namespace ccl::data {

std::vector<int> Dataset::indices(Split which) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < split.size(); ++i)
        if (split[i] == which) out.push_back(static_cast<int>(i));
    return out;
}

long Dataset::count(Split which) const {
    return std::count(split.begin(), split.end(), which);
}

nn::Batch Dataset::batch(const std::vector<int>& rows) const {
    nn::Batch b;
    b.X.resize(static_cast<Eigen::Index>(rows.size()), X.cols());
    b.y.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        b.X.row(static_cast<Eigen::Index>(i)) = X.row(rows[i]);
        b.y[static_cast<Eigen::Index>(i)] = y[rows[i]];
    }
    return b;
}

Dataset gen_blobs(int n, int classes, double noise, std::uint64_t seed) {
    if (classes < 2 || n < classes) throw std::invalid_argument("gen_blobs: need n >= classes >= 2");
    if (!(noise > 0.0)) throw std::invalid_argument("gen_blobs: noise must be > 0");
    Dataset ds;
    ds.classes = classes;
    ds.X.resize(n, 2);
    ds.y.resize(n);
    ds.split.assign(static_cast<std::size_t>(n), Split::Train);
    Rng rng = seeded_rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const int base = n / classes;
    const int extra = n % classes;
    int row = 0;
    for (int c = 0; c < classes; ++c) {
        const double angle = 2.0 * std::numbers::pi * c / classes;
        const double cx = 3.0 * std::cos(angle);
        const double cy = 3.0 * std::sin(angle);
        const int count = base + (c < extra ? 1 : 0);
        for (int i = 0; i < count; ++i, ++row) {
            ds.X(row, 0) = cx + noise * normal(rng);
            ds.X(row, 1) = cy + noise * normal(rng);
            ds.y[row] = c;
        }
    }
    return ds;
}

Dataset gen_two_spirals(int n, double noise, std::uint64_t seed) {
    if (n < 4 || n % 2 != 0) throw std::invalid_argument("gen_two_spirals: n must be even and >= 4");
    if (noise < 0.0) throw std::invalid_argument("gen_two_spirals: noise must be >= 0");
    Dataset ds;
    ds.classes = 2;
    ds.X.resize(n, 2);
    ds.y.resize(n);
    ds.split.assign(static_cast<std::size_t>(n), Split::Train);
    Rng rng = seeded_rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const int m = n / 2;
    for (int i = 0; i < m; ++i) {
        const double t = static_cast<double>(i) / (m - 1);
        const double theta = 4.0 * std::numbers::pi * t;  // two full turns
        const double r = 0.3 + 1.2 * t;
        const double px = r * std::cos(theta);
        const double py = r * std::sin(theta);
        ds.X(i, 0) = px + noise * normal(rng);
        ds.X(i, 1) = py + noise * normal(rng);
        ds.y[i] = 0;
        ds.X(m + i, 0) = -px + noise * normal(rng);
        ds.X(m + i, 1) = -py + noise * normal(rng);
        ds.y[m + i] = 1;
    }
    return ds;
}

namespace {

constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

std::uint32_t read_u32_be(std::istream& in, const std::filesystem::path& path, long& offset) {
    unsigned char bytes[4];
    in.read(reinterpret_cast<char*>(bytes), 4);
    if (in.gcount() != 4)
        throw std::runtime_error("load_idx: format error in " + path.string() +
                                 ": truncated at byte offset " + std::to_string(offset));
    offset += 4;
    return (std::uint32_t(bytes[0]) << 24) | (std::uint32_t(bytes[1]) << 16) |
           (std::uint32_t(bytes[2]) << 8) | std::uint32_t(bytes[3]);
}

std::vector<std::uint8_t> read_bytes(std::istream& in, std::size_t count,
                                     const std::filesystem::path& path, long& offset) {
    std::vector<std::uint8_t> data(count);
    in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(count));
    if (static_cast<std::size_t>(in.gcount()) != count)
        throw std::runtime_error("load_idx: format error in " + path.string() +
                                 ": truncated at byte offset " +
                                 std::to_string(offset + in.gcount()));
    offset += static_cast<long>(count);
    return data;
}

}  // namespace

Dataset load_idx(const std::filesystem::path& images_path,
                 const std::filesystem::path& labels_path) {
    std::ifstream img(images_path, std::ios::binary);
    if (!img) throw std::runtime_error("load_idx: cannot open " + images_path.string());
    std::ifstream lab(labels_path, std::ios::binary);
    if (!lab) throw std::runtime_error("load_idx: cannot open " + labels_path.string());

    long img_off = 0, lab_off = 0;
    const std::uint32_t img_magic = read_u32_be(img, images_path, img_off);
    if (img_magic != kIdxImagesMagic)
        throw std::runtime_error("load_idx: format error in " + images_path.string() +
                                 ": bad magic at byte offset 0");
    const std::uint32_t lab_magic = read_u32_be(lab, labels_path, lab_off);
    if (lab_magic != kIdxLabelsMagic)
        throw std::runtime_error("load_idx: format error in " + labels_path.string() +
                                 ": bad magic at byte offset 0");

    const std::uint32_t n_images = read_u32_be(img, images_path, img_off);
    const std::uint32_t rows = read_u32_be(img, images_path, img_off);
    const std::uint32_t cols = read_u32_be(img, images_path, img_off);
    const std::uint32_t n_labels = read_u32_be(lab, labels_path, lab_off);
    if (n_images != n_labels)
        throw std::runtime_error("load_idx: image count " + std::to_string(n_images) +
                                 " does not match label count " + std::to_string(n_labels));
    if (n_images == 0) throw std::runtime_error("load_idx: empty file pair");

    const std::size_t pixels = std::size_t(rows) * cols;
    const auto image_data = read_bytes(img, std::size_t(n_images) * pixels, images_path, img_off);
    const auto label_data = read_bytes(lab, n_labels, labels_path, lab_off);

    Dataset ds;
    ds.X.resize(static_cast<Eigen::Index>(n_images), static_cast<Eigen::Index>(pixels));
    ds.y.resize(static_cast<Eigen::Index>(n_images));
    ds.split.assign(n_images, Split::Train);
    int max_label = 0;
    for (std::uint32_t i = 0; i < n_images; ++i) {
        for (std::size_t p = 0; p < pixels; ++p)
            ds.X(i, static_cast<Eigen::Index>(p)) = image_data[i * pixels + p] / 255.0;
        ds.y[i] = label_data[i];
        max_label = std::max(max_label, static_cast<int>(label_data[i]));
    }
    ds.classes = max_label + 1;
    return ds;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

double parse_number(const std::string& text, long lineno, const std::string& column) {
    const char* begin = text.data();
    const char* end = begin + text.size();
    while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
    while (end > begin && (end[-1] == ' ' || end[-1] == '\t' || end[-1] == '\r')) --end;
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end)
        throw std::runtime_error("load_csv: non-numeric value in column '" + column +
                                 "' at line " + std::to_string(lineno));
    return value;
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path, const std::string& label_column) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_csv: cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line.empty())
        throw std::runtime_error("load_csv: parse error: empty file " + path.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_csv_line(line);
    long label_idx = -1;
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == label_column) label_idx = static_cast<long>(i);
    if (label_idx < 0)
        throw std::runtime_error("load_csv: label column '" + label_column + "' not found");

    std::vector<std::vector<double>> features;
    std::vector<double> raw_labels;
    long lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != header.size())
            throw std::runtime_error("load_csv: parse error at line " + std::to_string(lineno) +
                                     ": expected " + std::to_string(header.size()) + " fields, got " +
                                     std::to_string(fields.size()));
        std::vector<double> row;
        row.reserve(fields.size() - 1);
        for (std::size_t i = 0; i < fields.size(); ++i) {
            const double v = parse_number(fields[i], lineno, header[i]);
            if (static_cast<long>(i) == label_idx)
                raw_labels.push_back(v);
            else
                row.push_back(v);
        }
        features.push_back(std::move(row));
    }
    if (features.empty())
        throw std::runtime_error("load_csv: parse error: no data rows in " + path.string());

    // Dense remap of label values in sorted order.
    std::vector<double> unique_labels = raw_labels;
    std::sort(unique_labels.begin(), unique_labels.end());
    unique_labels.erase(std::unique(unique_labels.begin(), unique_labels.end()),
                        unique_labels.end());

    Dataset ds;
    ds.classes = static_cast<int>(unique_labels.size());
    ds.X.resize(static_cast<Eigen::Index>(features.size()),
                static_cast<Eigen::Index>(features.front().size()));
    ds.y.resize(static_cast<Eigen::Index>(features.size()));
    ds.split.assign(features.size(), Split::Train);
    for (std::size_t r = 0; r < features.size(); ++r) {
        for (std::size_t c = 0; c < features[r].size(); ++c)
            ds.X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = features[r][c];
        const auto it =
            std::lower_bound(unique_labels.begin(), unique_labels.end(), raw_labels[r]);
        ds.y[static_cast<Eigen::Index>(r)] =
            static_cast<int>(std::distance(unique_labels.begin(), it));
    }
    if (!ds.X.allFinite()) throw std::runtime_error("load_csv: non-finite feature value");
    return ds;
}

void split_dataset(Dataset& dataset, double val_fraction, double test_fraction,
                   std::uint64_t seed, bool stratified) {
    if (!(val_fraction > 0.0) || !(test_fraction > 0.0) || val_fraction + test_fraction >= 1.0)
        throw std::invalid_argument("split_dataset: fractions must be positive with sum < 1");
    const long n = dataset.rows();
    if (n < 3) throw std::invalid_argument("split_dataset: dataset too small to split");
    Rng rng = seeded_rng(seed);
    std::vector<Split> tags(static_cast<std::size_t>(n), Split::Train);

    auto assign = [&tags](const std::vector<int>& rows, long n_test, long n_val) {
        for (long i = 0; i < static_cast<long>(rows.size()); ++i) {
            if (i < n_test)
                tags[static_cast<std::size_t>(rows[static_cast<std::size_t>(i)])] = Split::Test;
            else if (i < n_test + n_val)
                tags[static_cast<std::size_t>(rows[static_cast<std::size_t>(i)])] = Split::Val;
        }
    };

    if (stratified) {
        for (int c = 0; c < dataset.classes; ++c) {
            std::vector<int> members;
            for (long i = 0; i < n; ++i)
                if (dataset.y[i] == c) members.push_back(static_cast<int>(i));
            std::shuffle(members.begin(), members.end(), rng);
            const long n_test = std::lround(test_fraction * static_cast<double>(members.size()));
            const long n_val = std::lround(val_fraction * static_cast<double>(members.size()));
            assign(members, n_test, n_val);
        }
    } else {
        std::vector<int> order(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        const long n_test = std::lround(test_fraction * static_cast<double>(n));
        const long n_val = std::lround(val_fraction * static_cast<double>(n));
        assign(order, n_test, n_val);
    }

    std::vector<bool> seen(static_cast<std::size_t>(dataset.classes), false);
    for (long i = 0; i < n; ++i)
        if (tags[static_cast<std::size_t>(i)] == Split::Train)
            seen[static_cast<std::size_t>(dataset.y[i])] = true;
    for (int c = 0; c < dataset.classes; ++c)
        if (!seen[static_cast<std::size_t>(c)])
            throw std::runtime_error("split_dataset: class " + std::to_string(c) +
                                     " would vanish from the train split");
    dataset.split = std::move(tags);
}

}  // namespace ccl::data
