#include "ccl/selection.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace ccl::select {

std::vector<double> losses_to_scores(std::span<const double> losses, ScoreMode mode) {
    if (losses.empty()) throw std::invalid_argument("losses_to_scores: empty input");
    const std::size_t n = losses.size();
    std::vector<double> scores(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double l = std::max(losses[i], kLossFloor);
        switch (mode) {
            case ScoreMode::Curriculum: scores[i] = 1.0 / l; break;
            case ScoreMode::Anti: scores[i] = l; break;
            case ScoreMode::Uniform: scores[i] = 1.0; break;
        }
    }
    const double total = std::accumulate(scores.begin(), scores.end(), 0.0);
    for (double& s : scores) s /= total;
    return scores;
}

int subset_size(double fraction, int n) {
    if (n < 1) throw std::invalid_argument("subset_size: n must be >= 1");
    const int k = static_cast<int>(std::floor(fraction * n + 0.5));
    return std::clamp(k, 1, n);
}

namespace {

// Fenwick tree over the live weights; supports prefix sums and point updates
// so each sequential draw costs O(log N).
class WeightTree {
public:
    explicit WeightTree(std::span<const double> weights)
        : size_(weights.size()), tree_(weights.size() + 1, 0.0) {
        for (std::size_t i = 0; i < size_; ++i) tree_[i + 1] = weights[i];
        for (std::size_t i = 1; i <= size_; ++i) {
            const std::size_t parent = i + (i & (~i + 1));
            if (parent <= size_) tree_[parent] += tree_[i];
        }
    }

    double total() const { return prefix(size_); }

    double prefix(std::size_t count) const {
        double sum = 0.0;
        for (std::size_t i = count; i > 0; i -= i & (~i + 1)) sum += tree_[i];
        return sum;
    }

    // Smallest index whose running prefix sum exceeds target.
    std::size_t find(double target) const {
        std::size_t pos = 0;
        std::size_t mask = std::bit_floor(size_);
        for (; mask > 0; mask >>= 1) {
            const std::size_t next = pos + mask;
            if (next <= size_ && tree_[next] <= target) {
                target -= tree_[next];
                pos = next;
            }
        }
        return pos;  // 0-based index
    }

    void add(std::size_t index, double delta) {
        for (std::size_t i = index + 1; i <= size_; i += i & (~i + 1)) tree_[i] += delta;
    }

private:
    std::size_t size_;
    std::vector<double> tree_;
};

}  // namespace

std::vector<int> sample_without_replacement(std::span<const double> scores, int k, Rng& rng) {
    const int n = static_cast<int>(scores.size());
    if (k < 1 || k > n) throw std::invalid_argument("sample_without_replacement: need 1 <= k <= N");
    std::vector<int> picked;
    picked.reserve(static_cast<std::size_t>(k));
    if (k == n) {
        picked.resize(static_cast<std::size_t>(n));
        std::iota(picked.begin(), picked.end(), 0);
        return picked;
    }
    std::vector<double> live(scores.begin(), scores.end());
    WeightTree tree(live);
    for (int draw = 0; draw < k; ++draw) {
        const double mass = tree.total();
        std::size_t idx = tree.find(uniform01(rng) * mass);
        if (idx >= live.size() || live[idx] <= 0.0) {
            // Rounding pushed the target past the last live weight; take the
            // nearest live index below instead.
            idx = std::min(idx, live.size() - 1);
            while (idx > 0 && live[idx] <= 0.0) --idx;
        }
        picked.push_back(static_cast<int>(idx));
        tree.add(idx, -live[idx]);
        live[idx] = 0.0;
    }
    return picked;
}

namespace {

void enumerate_sequences(const std::vector<double>& scores, std::vector<bool>& taken,
                         double remaining, double prob, int depth, int k,
                         std::vector<int>& chosen, std::vector<double>& inclusion) {
    if (depth == k) {
        for (int c : chosen) inclusion[static_cast<std::size_t>(c)] += prob;
        return;
    }
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (taken[i] || scores[i] <= 0.0) continue;
        taken[i] = true;
        chosen.push_back(static_cast<int>(i));
        enumerate_sequences(scores, taken, remaining - scores[i],
                            prob * scores[i] / remaining, depth + 1, k, chosen, inclusion);
        chosen.pop_back();
        taken[i] = false;
    }
}

}  // namespace

std::vector<double> inclusion_probabilities_bruteforce(std::span<const double> scores, int k) {
    const int n = static_cast<int>(scores.size());
    if (n > 12 || k > 6)
        throw std::invalid_argument("inclusion_probabilities_bruteforce: bounds N <= 12, k <= 6 exceeded");
    if (k < 1 || k > n) throw std::invalid_argument("inclusion_probabilities_bruteforce: need 1 <= k <= N");
    std::vector<double> inclusion(static_cast<std::size_t>(n), 0.0);
    if (k == n) {
        std::fill(inclusion.begin(), inclusion.end(), 1.0);
        return inclusion;
    }
    std::vector<double> sc(scores.begin(), scores.end());
    const double total = std::accumulate(sc.begin(), sc.end(), 0.0);
    std::vector<bool> taken(sc.size(), false);
    std::vector<int> chosen;
    enumerate_sequences(sc, taken, total, 1.0, 0, k, chosen, inclusion);
    return inclusion;
}

void save_scores_csv(const std::filesystem::path& path, std::span<const double> scores) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_scores_csv: cannot open " + path.string());
    out << "index,score\n";
    char buf[64];
    for (std::size_t i = 0; i < scores.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i, scores[i]);
        out << buf;
    }
    if (!out) throw std::runtime_error("save_scores_csv: write failed for " + path.string());
}

std::vector<double> load_scores_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_scores_csv: cannot open " + path.string());
    std::vector<std::pair<long, double>> rows;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (lineno == 1 && line.find("index") != std::string::npos) continue;
        std::istringstream ss(line);
        std::string idx_str, score_str;
        if (!std::getline(ss, idx_str, ',') || !std::getline(ss, score_str))
            throw std::runtime_error("load_scores_csv: malformed line " + std::to_string(lineno));
        try {
            rows.emplace_back(std::stol(idx_str), std::stod(score_str));
        } catch (const std::exception&) {
            throw std::runtime_error("load_scores_csv: non-numeric value at line " +
                                     std::to_string(lineno));
        }
    }
    if (rows.empty()) throw std::runtime_error("load_scores_csv: no rows in " + path.string());
    std::sort(rows.begin(), rows.end());
    std::vector<double> scores;
    scores.reserve(rows.size());
    double total = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].first != static_cast<long>(i))
            throw std::runtime_error("load_scores_csv: indices must cover 0..N-1 exactly");
        if (!(rows[i].second > 0.0))
            throw std::runtime_error("load_scores_csv: scores must be positive");
        scores.push_back(rows[i].second);
        total += rows[i].second;
    }
    for (double& s : scores) s /= total;
    return scores;
}

}  // namespace ccl::select
