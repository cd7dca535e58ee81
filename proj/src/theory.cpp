#include "ccl/theory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ccl/rng.hpp"
#include "ccl/schedule.hpp"
#include "ccl/selection.hpp"

namespace ccl::theory {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSqrtPi = 1.7724538509055160273;

double erf_series(double x) {
    // Maclaurin series of erf; converges quickly for |x| < 2.
    double term = x;
    double sum = x;
    for (int k = 1; k < 64; ++k) {
        term *= -x * x / k;
        const double contrib = term / (2 * k + 1);
        sum += contrib;
        if (std::fabs(contrib) < 1e-18 * std::fabs(sum)) break;
    }
    return 2.0 / kSqrtPi * sum;
}

double erfc_continued_fraction(double x) {
    // erfc(x) = exp(-x^2)/sqrt(pi) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    // evaluated with the modified Lentz algorithm; x >= 2.
    constexpr double kTiny = 1e-300;
    double f = x;
    double c = x;
    double d = 0.0;
    for (int k = 1; k < 200; ++k) {
        const double a = k / 2.0;
        d = x + a * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = x + a / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double delta = c * d;
        f *= delta;
        if (std::fabs(delta - 1.0) < 1e-16) break;
    }
    return std::exp(-x * x) / kSqrtPi / f;
}

}  // namespace

double erfc(double x) {
    if (x < 0.0) return 2.0 - erfc(-x);
    if (x < 2.0) return 1.0 - erf_series(x);
    return erfc_continued_fraction(x);
}

namespace {

// C term of the half-normal ESG error (the bias correction produced by the
// truncated Gaussian integral).
double c_term(double sigma, double lambda) {
    const double x = sigma * lambda;
    return sigma * std::sqrt(2.0) * std::exp(-x * x / 2.0) /
           (erfc(x * std::sqrt(2.0) / 2.0) * kSqrtPi);
}

double half_normal_esg_error(double sigma, double lambda) {
    const double c = c_term(sigma, lambda);
    const double bias = sigma * std::sqrt(2.0 / kPi) + sigma * sigma * lambda - c;
    return bias * bias + sigma * sigma + c * sigma * sigma * lambda - c * c;
}

}  // namespace

double analytic_error(const DistSpec& dist, const WeightingSpec& weighting) {
    if (!(dist.sigma > 0.0)) throw std::invalid_argument("analytic_error: sigma must be > 0");
    const double s2 = dist.sigma * dist.sigma;
    switch (dist.family) {
        case DistFamily::Normal:
            if (weighting.kind == Weighting::Uniform) return s2;
            if (weighting.kind == Weighting::Exponential)
                return weighting.lambda * weighting.lambda * s2 * s2 + s2;
            break;
        case DistFamily::HalfNormal:
            if (weighting.kind == Weighting::Uniform) return s2 * (1.0 - 2.0 / kPi);
            if (weighting.kind == Weighting::Exponential)
                return half_normal_esg_error(dist.sigma, weighting.lambda);
            break;
    }
    throw std::invalid_argument("analytic_error: no closed form for inverse weighting");
}

namespace {

std::vector<double> draw_population(const DistSpec& dist, long n, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> f(static_cast<std::size_t>(n));
    if (dist.family == DistFamily::Normal) {
        for (double& v : f) v = dist.mu + dist.sigma * normal(rng);
    } else {
        for (double& v : f) v = dist.mu + dist.sigma * std::fabs(normal(rng));
    }
    return f;
}

std::vector<double> population_weights(const std::vector<double>& f,
                                       const WeightingSpec& weighting) {
    std::vector<double> w(f.size());
    switch (weighting.kind) {
        case Weighting::Uniform:
            std::fill(w.begin(), w.end(), 1.0);
            break;
        case Weighting::Exponential: {
            // Shift by the minimum so exp stays in range; the constant factor
            // cancels in the normalization.
            const double fmin = *std::min_element(f.begin(), f.end());
            for (std::size_t i = 0; i < f.size(); ++i)
                w[i] = std::exp(-weighting.lambda * (f[i] - fmin));
            break;
        }
        case Weighting::Inverse:
            for (std::size_t i = 0; i < f.size(); ++i)
                w[i] = 1.0 / std::max(f[i], select::kLossFloor);
            break;
    }
    return w;
}

double weighted_error(const std::vector<double>& f, const std::vector<double>& w,
                      double reference_mean) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double d = f[i] - reference_mean;
        num += w[i] * d * d;
        den += w[i];
    }
    return num / den;
}

}  // namespace

ErrorEstimate mc_error(const DistSpec& dist, const WeightingSpec& weighting, long n,
                       std::uint64_t seed) {
    if (n < 10000) throw std::invalid_argument("mc_error: n must be >= 10^4");
    Rng rng = seeded_rng(seed);
    const std::vector<double> f = draw_population(dist, n, rng);
    const std::vector<double> w = population_weights(f, weighting);
    double mean = 0.0;
    for (double v : f) mean += v;
    mean /= static_cast<double>(n);

    ErrorEstimate est;
    est.n_samples = n;
    est.value = weighted_error(f, w, mean);

    // Bootstrap over resampled populations.
    constexpr int kReplicates = 16;
    std::uniform_int_distribution<long> pick(0, n - 1);
    double sum = 0.0, sum_sq = 0.0;
    std::vector<double> fr(static_cast<std::size_t>(n)), wr(static_cast<std::size_t>(n));
    for (int r = 0; r < kReplicates; ++r) {
        double m = 0.0;
        for (long i = 0; i < n; ++i) {
            const long j = pick(rng);
            fr[static_cast<std::size_t>(i)] = f[static_cast<std::size_t>(j)];
            wr[static_cast<std::size_t>(i)] = w[static_cast<std::size_t>(j)];
            m += f[static_cast<std::size_t>(j)];
        }
        const double value = weighted_error(fr, wr, m / static_cast<double>(n));
        sum += value;
        sum_sq += value * value;
    }
    const double var = std::max(0.0, (sum_sq - sum * sum / kReplicates) / (kReplicates - 1));
    est.std_error = std::sqrt(var);
    return est;
}

std::vector<RegionPoint> region_grid(double sigma_min, double sigma_max, double lambda_min,
                                     double lambda_max, int steps) {
    if (!(sigma_min > 0.0 && lambda_min > 0.0) || sigma_max < sigma_min ||
        lambda_max < lambda_min)
        throw std::invalid_argument("region_grid: ranges must be positive and ordered");
    if (steps < 2) throw std::invalid_argument("region_grid: steps must be >= 2");
    std::vector<RegionPoint> grid;
    grid.reserve(static_cast<std::size_t>(steps) * static_cast<std::size_t>(steps));
    for (int i = 0; i < steps; ++i) {
        const double sigma = sigma_min + (sigma_max - sigma_min) * i / (steps - 1);
        for (int j = 0; j < steps; ++j) {
            const double lambda = lambda_min + (lambda_max - lambda_min) * j / (steps - 1);
            const double diff = half_normal_esg_error(sigma, lambda) -
                                sigma * sigma * (1.0 - 2.0 / kPi);
            grid.push_back({sigma, lambda, diff});
        }
    }
    return grid;
}

namespace {

// Location of the half-normal populations used for the inverse-weighting
// checks; keeps losses bounded away from zero so 1/f stays integrable.
constexpr double kInverseCheckMu = 1.0;

double golden_section_max(double lo, double hi, double tol, double (*f)(double)) {
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - phi * (b - a);
    double d = a + phi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    return (a + b) / 2.0;
}

double log_over_x(double x) { return std::log(x) / x; }

}  // namespace

Theorem4Report theorem4_bound_check(std::span<const double> sigmas, long n, int seeds_per_sigma,
                                    std::uint64_t seed) {
    Theorem4Report report;
    report.argmax_x = golden_section_max(1.0, 10.0, 1e-9, log_over_x);
    report.max_value = log_over_x(report.argmax_x);
    report.sigma_bound = kPi * std::numbers::e;
    for (double sigma : sigmas) {
        if (!(sigma > 0.0)) throw std::invalid_argument("theorem4_bound_check: sigma must be > 0");
        Theorem4Row row;
        row.sigma = sigma;
        row.seeds = seeds_per_sigma;
        const DistSpec dist{DistFamily::HalfNormal, kInverseCheckMu, sigma};
        for (int s = 0; s < seeds_per_sigma; ++s) {
            const std::uint64_t run_seed = mix64(seed + 31 * static_cast<std::uint64_t>(s)) +
                                           static_cast<std::uint64_t>(sigma * 1e6);
            const double inv = mc_error(dist, {Weighting::Inverse, 0.0}, n, run_seed).value;
            const double uni = mc_error(dist, {Weighting::Uniform, 0.0}, n, run_seed + 1).value;
            row.inverse_error += inv / seeds_per_sigma;
            row.uniform_error += uni / seeds_per_sigma;
            if (inv < uni) ++row.wins;
        }
        report.rows.push_back(row);
    }
    return report;
}

namespace {

// Regime parameters for the stylized simulation. The half-normal regime is
// the post-uniform-step (spread, skewed) population; the normal regime is the
// post-inverse-step (tightened, symmetric) population.
constexpr double kSimNormalMu = 1.4;
constexpr double kSimNormalSigma = 0.2;
constexpr double kSimHalfMu = 1.0;
constexpr double kSimHalfSigma = 0.5;

}  // namespace

SimulationTrace cyclical_error_simulation(long n, std::span<const double> schedule,
                                          std::uint64_t seed) {
    if (n < 10000) throw std::invalid_argument("cyclical_error_simulation: n must be >= 10^4");
    if (schedule.empty()) throw std::invalid_argument("cyclical_error_simulation: empty schedule");

    struct Policy {
        Rng rng;
        bool half_normal = false;  // regime; training starts with normal losses
        double total = 0.0;
    };
    Policy ccl{seeded_rng(seed, 11), false, 0.0};
    Policy uniform{seeded_rng(seed, 11), false, 0.0};

    SimulationTrace trace;
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> f(static_cast<std::size_t>(n));
    auto step_error = [&](Policy& p, bool inverse_weighting) {
        for (double& v : f) {
            const double z = normal(p.rng);
            v = p.half_normal ? kSimHalfMu + kSimHalfSigma * std::fabs(z)
                              : kSimNormalMu + kSimNormalSigma * z;
        }
        double mean = 0.0;
        for (double v : f) mean += v;
        mean /= static_cast<double>(n);
        double num = 0.0, den = 0.0;
        for (double v : f) {
            const double w = inverse_weighting ? 1.0 / std::max(v, select::kLossFloor) : 1.0;
            const double d = v - mean;
            num += w * d * d;
            den += w;
        }
        // A uniform step spreads the losses into the half-normal regime, an
        // inverse-weighted step tightens them back to the normal regime.
        p.half_normal = !inverse_weighting;
        return num / den;
    };

    for (std::size_t t = 0; t < schedule.size(); ++t) {
        SimulationStep row;
        row.step = static_cast<int>(t);
        row.fraction = schedule[t];
        const bool ccl_inverse = row.fraction < 1.0;
        row.ccl_error = step_error(ccl, ccl_inverse);
        row.uniform_error = step_error(uniform, false);
        ccl.total += row.ccl_error;
        uniform.total += row.uniform_error;
        trace.steps.push_back(row);
    }
    trace.ccl_total = ccl.total;
    trace.uniform_total = uniform.total;
    return trace;
}

SimulationTrace cyclical_error_simulation(long n, int steps, std::uint64_t seed) {
    if (steps < 1) throw std::invalid_argument("cyclical_error_simulation: steps must be >= 1");
    const auto fractions = schedule::cyclical_sizes({0.25, 1.0, 0.5, steps});
    return cyclical_error_simulation(n, fractions, seed);
}

}  // namespace ccl::theory
