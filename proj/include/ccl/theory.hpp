#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace ccl::theory {

enum class DistFamily { Normal, HalfNormal };

// Half-normal uses location mu plus the scale sigma of the underlying
// normal, so its mean is mu + sigma*sqrt(2/pi).
struct DistSpec {
    DistFamily family = DistFamily::Normal;
    double mu = 0.0;
    double sigma = 1.0;
};

enum class Weighting { Uniform, Exponential, Inverse };

struct WeightingSpec {
    Weighting kind = Weighting::Uniform;
    double lambda = 1.0;  // exponential rate; ignored otherwise
};

struct ErrorEstimate {
    double value = 0.0;
    double std_error = 0.0;
    long n_samples = 0;
};

/// Complementary error function via the Maclaurin series for small |x| and a
/// Lentz continued fraction for large |x|; absolute accuracy well under 1e-7
/// on [-6, 6].
double erfc(double x);

/// Closed-form expected squared selection error:
///   normal x uniform        -> sigma^2
///   normal x exponential    -> lambda^2 sigma^4 + sigma^2
///   half-normal x uniform   -> sigma^2 (1 - 2/pi)
///   half-normal x exponential -> erfc-based closed form with the C term
/// Inverse weighting has no closed form and throws.
double analytic_error(const DistSpec& dist, const WeightingSpec& weighting);

/// Monte-Carlo estimate of the weighted squared selection error over a
/// population of n draws, with a bootstrap standard error. Inverse weighting
/// uses 1/max(f, 1e-8), matching the curriculum score rule.
ErrorEstimate mc_error(const DistSpec& dist, const WeightingSpec& weighting, long n,
                       std::uint64_t seed);

struct RegionPoint {
    double sigma = 0.0;
    double lambda = 0.0;
    double diff = 0.0;  // E_esg - E_sgd on the half-normal family
};

/// Analytic (E_esg - E_sgd) on a steps x steps grid over the given ranges
/// (half-normal, mu = 0).
std::vector<RegionPoint> region_grid(double sigma_min, double sigma_max, double lambda_min,
                                     double lambda_max, int steps);

struct Theorem4Row {
    double sigma = 0.0;
    double inverse_error = 0.0;   // mean over seeds
    double uniform_error = 0.0;   // mean over seeds
    int wins = 0;                 // seeds where inverse < uniform
    int seeds = 0;
};

struct Theorem4Report {
    double argmax_x = 0.0;        // golden-section argmax of ln(x)/x
    double max_value = 0.0;       // ln(argmax_x)/argmax_x
    double sigma_bound = 0.0;     // pi * e
    std::vector<Theorem4Row> rows;
};

/// For each sigma below pi*e, checks that inverse weighting yields a lower
/// Monte-Carlo error than uniform weighting on half-normal populations
/// (location 1), and verifies max ln(x)/x = 1/e at x = e by golden-section
/// search.
Theorem4Report theorem4_bound_check(std::span<const double> sigmas, long n = 1000000,
                                    int seeds_per_sigma = 5, std::uint64_t seed = 1);

struct SimulationStep {
    int step = 0;
    double fraction = 0.0;        // schedule value driving the CCL policy
    double ccl_error = 0.0;
    double uniform_error = 0.0;
};

struct SimulationTrace {
    std::vector<SimulationStep> steps;
    double ccl_total = 0.0;
    double uniform_total = 0.0;
};

/// Stylized regime-switching simulation of cyclical training. Each policy
/// owns a loss population whose distribution is normal after an inverse-
/// weighted step and half-normal after a uniform step (starting normal); the
/// CCL policy applies uniform weighting when the schedule is at 1 and inverse
/// weighting below it, the reference policy is always uniform. Accumulates
/// each policy's squared selection error per step.
SimulationTrace cyclical_error_simulation(long n, std::span<const double> schedule,
                                          std::uint64_t seed);

/// Convenience overload running the default cyclical schedule
/// (sp=0.25, ep=1, alpha=0.5) for `steps` steps.
SimulationTrace cyclical_error_simulation(long n, int steps, std::uint64_t seed);

}  // namespace ccl::theory
