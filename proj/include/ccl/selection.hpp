#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "ccl/rng.hpp"

namespace ccl::select {

// Losses are clamped below at this value before inversion, so perfectly fit
// samples (zero loss) keep a finite, maximal score.
inline constexpr double kLossFloor = 1e-8;

enum class ScoreMode { Curriculum, Anti, Uniform };

/// Per-sample selection probabilities from per-sample losses.
/// Curriculum favors low loss (r_i proportional to 1/l_i), Anti favors high
/// loss, Uniform ignores the losses. The result sums to 1.
std::vector<double> losses_to_scores(std::span<const double> losses, ScoreMode mode);

/// Number of samples for a schedule fraction: round-half-up of fraction*n,
/// clamped to [1, n].
int subset_size(double fraction, int n);

/// k distinct indices in [0, N) by sequential weighted draws: each draw picks
/// index i with probability scores[i] / remaining mass, then removes it.
/// k == N returns all indices (in order) regardless of the scores.
std::vector<int> sample_without_replacement(std::span<const double> scores, int k, Rng& rng);

/// Exact per-index inclusion probabilities of the sequential scheme,
/// obtained by enumerating every ordered draw sequence. Test oracle;
/// requires N <= 12 and k <= 6.
std::vector<double> inclusion_probabilities_bruteforce(std::span<const double> scores, int k);

/// Two-column CSV (index,score) so externally produced scores can be
/// injected. load validates the simplex constraint loosely (positive values)
/// and renormalizes.
void save_scores_csv(const std::filesystem::path& path, std::span<const double> scores);
std::vector<double> load_scores_csv(const std::filesystem::path& path);

}  // namespace ccl::select
