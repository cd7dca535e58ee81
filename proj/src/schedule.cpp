#include "ccl/schedule.hpp"

#include <algorithm>
#include <stdexcept>

namespace ccl::schedule {

void ScheduleParams::validate() const {
    if (!(sp > 0.0 && sp <= 1.0)) throw std::invalid_argument("schedule: sp must be in (0,1]");
    if (!(ep > 0.0 && ep <= 1.0)) throw std::invalid_argument("schedule: ep must be in (0,1]");
    if (sp > ep) throw std::invalid_argument("schedule: sp must be <= ep");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("schedule: alpha must be in (0,1]");
    if (epochs < 1) throw std::invalid_argument("schedule: epochs must be >= 1");
}

std::vector<double> cyclical_sizes(const ScheduleParams& params) {
    params.validate();
    std::vector<double> sizes;
    sizes.reserve(static_cast<std::size_t>(params.epochs));
    double n = params.sp;
    sizes.push_back(n);
    for (int t = 1; t < params.epochs; ++t) {
        // The run is increasing iff the last appended value is strictly
        // greater than its predecessor. Values are exact products of sp with
        // powers of 1/alpha, then clamped, so == against sp/ep is exact.
        const std::size_t m = sizes.size();
        const bool increasing = m >= 2 && sizes[m - 1] > sizes[m - 2];
        if (n == params.sp || (increasing && n != params.ep)) {
            n = std::min(n * (1.0 / params.alpha), params.ep);
        } else {
            n = std::max(n * params.alpha, params.sp);
        }
        sizes.push_back(n);
    }
    return sizes;
}

std::vector<double> constant_sizes(double p, int epochs) {
    if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("schedule: p must be in (0,1]");
    if (epochs < 1) throw std::invalid_argument("schedule: epochs must be >= 1");
    return std::vector<double>(static_cast<std::size_t>(epochs), p);
}

std::vector<double> monotonic_sizes(double sp, double ep, int epochs, int stages,
                                    Direction direction) {
    if (!(sp > 0.0 && sp <= 1.0) || !(ep > 0.0 && ep <= 1.0) || sp > ep)
        throw std::invalid_argument("schedule: need 0 < sp <= ep <= 1");
    if (epochs < 1) throw std::invalid_argument("schedule: epochs must be >= 1");
    if (stages < 1 || stages > epochs)
        throw std::invalid_argument("schedule: need 1 <= stages <= epochs");

    std::vector<double> levels(static_cast<std::size_t>(stages));
    if (stages == 1) {
        levels[0] = ep;  // single plateau trains on the final fraction
    } else {
        for (int s = 0; s < stages; ++s)
            levels[static_cast<std::size_t>(s)] = sp + (ep - sp) * s / (stages - 1);
    }
    if (direction == Direction::Decreasing) std::reverse(levels.begin(), levels.end());

    std::vector<double> sizes;
    sizes.reserve(static_cast<std::size_t>(epochs));
    const int per_stage = epochs / stages;
    for (int s = 0; s < stages; ++s) {
        const int len = (s == stages - 1) ? epochs - per_stage * (stages - 1) : per_stage;
        for (int i = 0; i < len; ++i) sizes.push_back(levels[static_cast<std::size_t>(s)]);
    }
    return sizes;
}

}  // namespace ccl::schedule
