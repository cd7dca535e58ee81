#pragma once

#include <vector>

namespace ccl::schedule {

// Parameters of the cyclical dataset-size generator: start fraction sp,
// peak fraction ep, cycle speed alpha and the number of training epochs.
struct ScheduleParams {
    double sp = 0.25;
    double ep = 1.0;
    double alpha = 0.5;
    int epochs = 1;

    void validate() const;
};

enum class Direction { Increasing, Decreasing };

/// Cyclical per-epoch dataset fractions: starts at sp, climbs by factor
/// 1/alpha until clamped at ep, then falls by factor alpha back to sp,
/// repeating for `epochs` entries.
std::vector<double> cyclical_sizes(const ScheduleParams& params);

/// Constant schedule: `epochs` copies of p.
std::vector<double> constant_sizes(double p, int epochs);

/// Stepwise schedule of `stages` equal-length plateaus linearly spaced
/// between sp and ep (reversed for Decreasing). The last plateau absorbs
/// the remainder when epochs is not divisible by stages.
std::vector<double> monotonic_sizes(double sp, double ep, int epochs, int stages,
                                    Direction direction);

}  // namespace ccl::schedule
