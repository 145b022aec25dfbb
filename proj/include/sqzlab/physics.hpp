#pragma once

// Closed-form model of a sub-threshold degenerate optical parametric amplifier:
// squeezing / anti-squeezing spectra seen by a homodyne detector, phase-jitter
// mixing of the two quadratures, classical seed gain and a few derived cavity
// quantities. Everything here is a pure function of its arguments.

#include <cmath>
#include <numbers>
#include <string>

#include "sqzlab/error.hpp"

namespace sqz {

inline constexpr double speed_of_light = 299'792'458.0;  // m/s

/// Cavity and pump description of the OPA. Powers in mW, lengths in m.
struct OpaParams {
    double output_coupler_T = 0.11;
    double intracavity_loss_L = 0.11 * (1.0 - 0.879) / 0.879;
    double round_trip_length = 0.407;
    double pump_power = 100.0;
    double threshold_power = 165.0;
    double wavelength = 852.3;  // nm
    double speed_of_light = sqz::speed_of_light;

    /// Builds the cavity from T and the escape efficiency rho, storing L = T(1-rho)/rho.
    static OpaParams from_escape_efficiency(double T, double rho, double round_trip_length,
                                            double pump_power, double threshold_power) {
        detail::require(rho > 0.0 && rho <= 1.0, ErrorKind::parameter_domain,
                        "escape efficiency must lie in (0, 1]");
        OpaParams p;
        p.output_coupler_T = T;
        p.intracavity_loss_L = T * (1.0 - rho) / rho;
        p.round_trip_length = round_trip_length;
        p.pump_power = pump_power;
        p.threshold_power = threshold_power;
        return p;
    }

    double free_spectral_range() const { return speed_of_light / round_trip_length; }
};

/// Efficiency budget of the homodyne channel: photodiode quantum efficiency,
/// mode-matching visibility and propagation efficiency.
struct DetectionChain {
    double quantum_efficiency = 0.990;
    double visibility = 0.985;
    double propagation_efficiency = 0.912;
};

/// Linear quadrature variances relative to the shot-noise level (SQL = 1).
struct QuadratureVariancePair {
    double r_minus = 1.0;
    double r_plus = 1.0;
};

/// RMS of the residual squeezing-angle fluctuation, radians.
struct PhaseJitter {
    double rms = 0.0;
};

inline void validate(const OpaParams& p) {
    using detail::require;
    require(std::isfinite(p.output_coupler_T) && p.output_coupler_T > 0.0 && p.output_coupler_T < 1.0,
            ErrorKind::parameter_domain, "output coupler transmittance must lie in (0, 1)");
    require(std::isfinite(p.intracavity_loss_L) && p.intracavity_loss_L >= 0.0,
            ErrorKind::parameter_domain, "intracavity loss must be >= 0");
    require(std::isfinite(p.round_trip_length) && p.round_trip_length > 0.0,
            ErrorKind::parameter_domain, "round-trip length must be > 0");
    require(std::isfinite(p.speed_of_light) && p.speed_of_light > 0.0, ErrorKind::parameter_domain,
            "speed of light must be > 0");
    require(std::isfinite(p.threshold_power) && p.threshold_power > 0.0,
            ErrorKind::parameter_domain, "threshold power must be > 0");
    require(std::isfinite(p.pump_power) && p.pump_power >= 0.0, ErrorKind::parameter_domain,
            "pump power must be >= 0");
    require(p.pump_power < p.threshold_power, ErrorKind::above_threshold,
            "pump power must stay below the oscillation threshold");
}

inline void validate(const DetectionChain& c) {
    auto in_unit = [](double v) { return std::isfinite(v) && v > 0.0 && v <= 1.0; };
    detail::require(in_unit(c.quantum_efficiency) && in_unit(c.visibility) &&
                        in_unit(c.propagation_efficiency),
                    ErrorKind::parameter_domain, "detection efficiencies must lie in (0, 1]");
}

/// gamma = c (T + L) / l, in 1/s.
inline double cavity_decay_rate(const OpaParams& p) {
    detail::require(p.output_coupler_T + p.intracavity_loss_L > 0.0, ErrorKind::degenerate_cavity,
                    "T + L must be positive");
    validate(p);
    return p.speed_of_light * (p.output_coupler_T + p.intracavity_loss_L) / p.round_trip_length;
}

/// x = sqrt(P / P_th).
inline double normalized_pump(const OpaParams& p) {
    detail::require(p.threshold_power > 0.0 && p.pump_power >= 0.0, ErrorKind::parameter_domain,
                    "pump and threshold powers must be non-negative");
    detail::require(p.pump_power < p.threshold_power, ErrorKind::above_threshold,
                    "pump power must stay below the oscillation threshold");
    return std::sqrt(p.pump_power / p.threshold_power);
}

/// rho = T / (T + L).
inline double escape_efficiency(const OpaParams& p) {
    const double total = p.output_coupler_T + p.intracavity_loss_L;
    detail::require(total > 0.0, ErrorKind::degenerate_cavity, "T + L must be positive");
    detail::require(p.output_coupler_T > 0.0 && p.intracavity_loss_L >= 0.0,
                    ErrorKind::parameter_domain, "T must be > 0 and L >= 0");
    return p.output_coupler_T / total;
}

/// K = eta xi^2 zeta rho.
inline double total_efficiency(const OpaParams& p, const DetectionChain& c) {
    validate(c);
    return c.quantum_efficiency * c.visibility * c.visibility * c.propagation_efficiency *
           escape_efficiency(p);
}

/// Lossy OPA spectrum for an explicit operating point. `omega` is f / gamma.
inline QuadratureVariancePair squeezing_spectrum(double x, double total_eff, double omega) {
    detail::require(x >= 0.0 && x < 1.0, ErrorKind::above_threshold, "normalized pump must lie in [0, 1)");
    detail::require(total_eff > 0.0 && total_eff <= 1.0, ErrorKind::parameter_domain,
                    "total efficiency must lie in (0, 1]");
    detail::require(omega >= 0.0, ErrorKind::parameter_domain, "frequency must be >= 0");
    const double four_omega_sq = 4.0 * omega * omega;
    const double lift = total_eff * 4.0 * x;
    return {1.0 - lift / ((1.0 + x) * (1.0 + x) + four_omega_sq),
            1.0 + lift / ((1.0 - x) * (1.0 - x) + four_omega_sq)};
}

inline QuadratureVariancePair squeezing_spectrum(const OpaParams& p, const DetectionChain& c,
                                                 double frequency_hz) {
    detail::require(frequency_hz >= 0.0, ErrorKind::parameter_domain, "frequency must be >= 0");
    const double gamma = cavity_decay_rate(p);
    return squeezing_spectrum(normalized_pump(p), total_efficiency(p, c), frequency_hz / gamma);
}

/// Mixes the two quadratures for an RMS squeezing-angle error.
inline QuadratureVariancePair apply_phase_jitter(const QuadratureVariancePair& pair, PhaseJitter jitter) {
    const double s = std::sin(jitter.rms);
    const double s2 = s * s;
    const double c2 = 1.0 - s2;
    return {pair.r_minus * c2 + pair.r_plus * s2, pair.r_plus * c2 + pair.r_minus * s2};
}

/// Variance seen at homodyne angle theta relative to the squeezed quadrature.
inline double quadrature_variance(const QuadratureVariancePair& pair, double theta) {
    const double s = std::sin(theta);
    const double s2 = s * s;
    return pair.r_minus * (1.0 - s2) + pair.r_plus * s2;
}

/// Classical phase-sensitive power gain of a seed; phi = 0 amplifies, phi = pi deamplifies.
inline double parametric_power_gain(double x, double pump_phase) {
    detail::require(x >= 0.0, ErrorKind::parameter_domain, "normalized pump must be >= 0");
    detail::require(x < 1.0, ErrorKind::above_threshold, "normalized pump must be < 1");
    const double c = std::cos(0.5 * pump_phase);
    const double s = std::sin(0.5 * pump_phase);
    return c * c / ((1.0 - x) * (1.0 - x)) + s * s / ((1.0 + x) * (1.0 + x));
}

inline constexpr double photons_per_nanowatt = 0.0764;

/// Mean intracavity probe photon number for a probe power in nW (linear calibration).
inline double mean_intracavity_photons(double probe_power_nw) {
    detail::require(probe_power_nw >= 0.0, ErrorKind::parameter_domain, "probe power must be >= 0");
    return photons_per_nanowatt * probe_power_nw;
}

inline double to_db(double linear) {
    detail::require(linear > 0.0 && std::isfinite(linear), ErrorKind::parameter_domain,
                    "dB conversion needs a positive finite value");
    return 10.0 * std::log10(linear);
}

inline double from_db(double db) { return std::pow(10.0, db / 10.0); }

/// Operating point actually used to synthesize homodyne noise: normalized pump,
/// total detection efficiency and cavity decay rate.
struct SqueezerModel {
    double x = 0.0;
    double total_efficiency = 1.0;
    double decay_rate = 1.0;  // 1/s

    static SqueezerModel from_params(const OpaParams& p, const DetectionChain& c) {
        return {normalized_pump(p), sqz::total_efficiency(p, c), cavity_decay_rate(p)};
    }

    static SqueezerModel vacuum() { return {0.0, 1.0, 1.0}; }

    QuadratureVariancePair at(double frequency_hz) const {
        return squeezing_spectrum(x, total_efficiency, frequency_hz / decay_rate);
    }
};

}  // namespace sqz
