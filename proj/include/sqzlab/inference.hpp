#pragma once

// Parameter recovery from squeezing measurements. All estimators are
// deterministic: closed forms where they exist, bracketed bisection otherwise.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <span>

#include "sqzlab/error.hpp"
#include "sqzlab/physics.hpp"
#include "sqzlab/timeseries.hpp"

namespace sqz {

struct MeasurementPair {
    double squeezing_db = 0.0;       // negative below the SQL
    double anti_squeezing_db = 0.0;  // positive above the SQL
    double frequency = 0.0;          // Hz

    QuadratureVariancePair linear() const { return {from_db(squeezing_db), from_db(anti_squeezing_db)}; }
};

/// Root of a continuous function on [lo, hi] with a sign change, to |hi - lo| <= tol.
inline double bisect(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-12) {
    double flo = f(lo);
    const double fhi = f(hi);
    detail::require(std::signbit(flo) != std::signbit(fhi) || flo == 0.0 || fhi == 0.0, ErrorKind::infeasible,
                    "bisection bracket does not straddle a root");
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if (std::signbit(fm) == std::signbit(flo)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

struct PhaseJitterFit {
    PhaseJitter jitter;                 // joint two-quadrature estimate
    double from_squeezing = 0.0;        // rad, squeezing quadrature alone
    double from_anti_squeezing = 0.0;   // rad, NaN when the anti-squeezing rose instead of fell
    double residual_db = 0.0;           // RMS dB residual of the joint fit
};

/// Jitter RMS that maps `ideal` onto `observed` under quadrature mixing. The joint
/// estimate minimizes the squared dB residuals of both quadratures over
/// s = sin^2(theta) in [0, 1/2]; per-quadrature closed forms are reported alongside.
inline PhaseJitterFit fit_phase_jitter(const MeasurementPair& observed, const MeasurementPair& ideal) {
    const auto obs = observed.linear();
    const auto id = ideal.linear();
    detail::require(id.r_minus < id.r_plus, ErrorKind::inconsistent_data,
                    "ideal pair must have anti-squeezing above squeezing");
    detail::require(observed.squeezing_db >= ideal.squeezing_db - 1e-12, ErrorKind::inconsistent_data,
                    "observed squeezing is stronger than the ideal squeezing");
    const double spread = id.r_plus - id.r_minus;

    auto model_db = [&](double s) {
        return std::pair{to_db(id.r_minus + spread * s), to_db(id.r_plus - spread * s)};
    };
    // d/ds of the summed squared residuals.
    auto gradient = [&](double s) {
        const auto [m, p] = model_db(s);
        const double dm = 10.0 / std::numbers::ln10 * spread / (id.r_minus + spread * s);
        const double dp = -10.0 / std::numbers::ln10 * spread / (id.r_plus - spread * s);
        return 2.0 * ((m - observed.squeezing_db) * dm + (p - observed.anti_squeezing_db) * dp);
    };
    double s = 0.0;
    // The dead-band keeps dB round-off from turning identical pairs into a tiny jitter.
    if (gradient(0.0) < -1e-9) {
        const double hi = 0.5 - 1e-15;
        s = gradient(hi) <= 0.0 ? hi : bisect(gradient, 0.0, hi);
    }
    PhaseJitterFit fit;
    fit.jitter.rms = std::asin(std::sqrt(s));
    const auto [m, p] = model_db(s);
    fit.residual_db = std::sqrt(0.5 * ((m - observed.squeezing_db) * (m - observed.squeezing_db) +
                                       (p - observed.anti_squeezing_db) * (p - observed.anti_squeezing_db)));
    fit.from_squeezing = std::asin(std::sqrt(std::clamp((obs.r_minus - id.r_minus) / spread, 0.0, 0.5)));
    const double s_anti = (id.r_plus - obs.r_plus) / spread;
    fit.from_anti_squeezing =
        s_anti < 0.0 ? std::numeric_limits<double>::quiet_NaN() : std::asin(std::sqrt(std::min(s_anti, 0.5)));
    return fit;
}

struct OperatingPointFit {
    double x = 0.0;                 // normalized pump
    double total_efficiency = 0.0;  // K
    bool efficiency_determined = true;
};

/// Inverts the lossy OPA spectrum for (x, K) from a squeezing / anti-squeezing pair.
/// `omega` is f / gamma (0 for f << gamma). The ratio of the two excess noises depends
/// on x alone and is monotone, so x is found by bisection and K follows.
inline OperatingPointFit fit_opa_operating_point(const MeasurementPair& pair, double omega = 0.0) {
    detail::require(omega >= 0.0, ErrorKind::parameter_domain, "normalized frequency must be >= 0");
    const auto lin = pair.linear();
    const double below = 1.0 - lin.r_minus;
    const double above = lin.r_plus - 1.0;
    if (std::abs(pair.squeezing_db) < 1e-12 && std::abs(pair.anti_squeezing_db) < 1e-12)
        return {0.0, std::numeric_limits<double>::quiet_NaN(), false};
    detail::require(below > 0.0 && above > 0.0, ErrorKind::infeasible,
                    "pair must show squeezing below and anti-squeezing above the SQL");
    const double w2 = 4.0 * omega * omega;
    const double target = above / below;
    auto ratio_gap = [&](double x) {
        return ((1.0 + x) * (1.0 + x) + w2) / ((1.0 - x) * (1.0 - x) + w2) - target;
    };
    detail::require(ratio_gap(0.0) <= 0.0, ErrorKind::infeasible,
                    "anti-squeezing excess is smaller than the squeezing deficit");
    const double x_hi = 1.0 - 1e-12;
    detail::require(ratio_gap(x_hi) >= 0.0, ErrorKind::infeasible, "pair needs a pump at or above threshold");
    const double x = bisect(ratio_gap, 0.0, x_hi, 1e-14);
    const double k = below * ((1.0 + x) * (1.0 + x) + w2) / (4.0 * x);
    detail::require(k > 0.0 && k <= 1.0 + 1e-9, ErrorKind::infeasible,
                    "pair requires a total efficiency above 1");
    return {x, std::min(k, 1.0), true};
}

struct StabilityMetrics {
    double std_db = 0.0;
    double peak_to_peak_db = 0.0;
    double drift_db_per_hour = 0.0;
};

/// Sample std, range and least-squares slope of a squeezing-vs-time trace (dB).
inline StabilityMetrics stability_metrics(const TimeSeries& trace) {
    validate(trace);
    detail::require(trace.size() >= 10, ErrorKind::too_short, "stability trace needs at least 10 points");
    const auto& v = trace.samples;
    StabilityMetrics m;
    m.std_db = std::sqrt(variance(v));
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    m.peak_to_peak_db = *hi - *lo;
    const double n = static_cast<double>(v.size());
    const double t_mean = 0.5 * (n - 1.0) * trace.dt();
    const double y_mean = mean(v);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double t = trace.time(i) - t_mean;
        sxy += t * (v[i] - y_mean);
        sxx += t * t;
    }
    m.drift_db_per_hour = sxy / sxx * 3600.0;
    return m;
}

}  // namespace sqz
