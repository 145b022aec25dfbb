#pragma once

// The two detection channels: a balanced homodyne detector (quadrature noise,
// CMRR-limited laser-noise leakage, electronic dark noise, pickup tones) and a
// single-photon counting module watching the filtered OPA output.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "sqzlab/error.hpp"
#include "sqzlab/noise.hpp"
#include "sqzlab/physics.hpp"
#include "sqzlab/random.hpp"
#include "sqzlab/timeseries.hpp"

namespace sqz {

struct HomodyneDetector {
    double lo_power = 2.0;  // mW
    double cmrr_db = 55.0;
    // Optional (frequency Hz, CMRR dB) table, interpolated in log-frequency. Overrides cmrr_db.
    std::vector<std::pair<double, double>> cmrr_table;
    bool dark_enabled = true;
    // Dark noise relative to the shot noise of a 2 mW LO.
    double dark_db_at_10hz = -7.0;
    double dark_db_above_100hz = -10.0;

    double cmrr_linear(double f) const {
        if (cmrr_table.empty()) return from_db(cmrr_db);
        if (f <= cmrr_table.front().first) return from_db(cmrr_table.front().second);
        if (f >= cmrr_table.back().first) return from_db(cmrr_table.back().second);
        auto hi = std::upper_bound(cmrr_table.begin(), cmrr_table.end(), f,
                                   [](double v, const auto& e) { return v < e.first; });
        auto lo = hi - 1;
        const double t = std::log(f / lo->first) / std::log(hi->first / lo->first);
        return from_db(lo->second + t * (hi->second - lo->second));
    }

    /// Dark-noise PSD in units of this detector's SQL.
    double dark_psd(double f) const {
        if (!dark_enabled) return 0.0;
        double db;
        if (f <= 10.0) {
            db = dark_db_at_10hz;
        } else if (f >= 100.0) {
            db = dark_db_above_100hz;
        } else {
            db = dark_db_at_10hz + (dark_db_above_100hz - dark_db_at_10hz) * std::log10(f / 10.0);
        }
        return from_db(db) * (2.0 / lo_power);
    }
};

inline void validate(const HomodyneDetector& d) {
    using detail::require;
    require(d.lo_power > 0.0, ErrorKind::parameter_domain, "lo_power must be > 0");
    require(d.cmrr_db >= 0.0, ErrorKind::parameter_domain, "cmrr_db must be >= 0");
    require(d.dark_db_above_100hz <= d.dark_db_at_10hz, ErrorKind::parameter_domain,
            "dark-noise levels must be non-increasing with frequency");
    for (std::size_t i = 0; i < d.cmrr_table.size(); ++i) {
        require(d.cmrr_table[i].first > 0.0 && d.cmrr_table[i].second >= 0.0, ErrorKind::parameter_domain,
                "cmrr_table entries need f > 0 and CMRR >= 0 dB");
        if (i > 0)
            require(d.cmrr_table[i].first > d.cmrr_table[i - 1].first, ErrorKind::parameter_domain,
                    "cmrr_table frequencies must increase");
    }
}

/// What reaches the homodyne beam splitter.
enum class HomodyneInput {
    squeezed,  // OPA output with the LO
    vacuum,    // OPA output blocked, LO on: the SQL trace
    blocked,   // LO off: electronic dark noise only
};

/// Photocurrent with one-sided PSD ~ shot_level * R(f, theta(t)) + leakage(f) + dark(f), where
/// R(f, theta) = R-(f) cos^2 theta + R+(f) sin^2 theta and theta is the instantaneous angle of
/// `lo_phase` relative to the squeezed quadrature. Valid when theta moves slowly compared with
/// the analysis frequencies.
inline TimeSeries homodyne_measure(const NoiseScenario& scenario, const SqueezerModel& model,
                                   const HomodyneDetector& detector, const TimeSeries& lo_phase,
                                   std::uint64_t seed, HomodyneInput input = HomodyneInput::squeezed) {
    validate(lo_phase);
    validate(detector);
    validate(scenario, lo_phase.sample_rate);
    detail::require(lo_phase.size() >= 2, ErrorKind::too_short, "homodyne record needs >= 2 samples");
    const double fs = lo_phase.sample_rate;
    const std::size_t n = lo_phase.size();

    const bool light = input != HomodyneInput::blocked;
    const bool leak = light && scenario.technical_noise.enabled && scenario.technical_noise.level_at_corner > 0.0;
    // Leakage and dark noise are independent of the quadrature and share one realization.
    auto extra_psd = [&](double f) {
        return (leak ? scenario.technical_noise.psd(f) / detector.cmrr_linear(f) : 0.0) + detector.dark_psd(f);
    };
    const SqueezerModel m = input == HomodyneInput::squeezed ? model : SqueezerModel::vacuum();
    const double shot = scenario.shot_level;
    const auto& th = lo_phase.samples;
    const bool constant_angle = std::all_of(th.begin(), th.end(), [&](double v) { return v == th.front(); });

    TimeSeries current;
    if (!light) {
        current = colored_noise_from_psd(extra_psd, fs, n, derive_seed(seed, 3));
    } else if (constant_angle) {
        const double c2 = std::cos(th.front()) * std::cos(th.front());
        current = colored_noise_from_psd(
            [&](double f) {
                const auto r = m.at(f);
                return shot * (r.r_minus * c2 + r.r_plus * (1.0 - c2)) + extra_psd(f);
            },
            fs, n, derive_seed(seed, 1));
    } else {
        const auto squeezed =
            colored_noise_from_psd([&](double f) { return shot * m.at(f).r_minus; }, fs, n, derive_seed(seed, 1));
        const auto anti =
            colored_noise_from_psd([&](double f) { return shot * m.at(f).r_plus; }, fs, n, derive_seed(seed, 2));
        current = colored_noise_from_psd(extra_psd, fs, n, derive_seed(seed, 3));
        for (std::size_t i = 0; i < n; ++i)
            current.samples[i] += std::cos(th[i]) * squeezed.samples[i] + std::sin(th[i]) * anti.samples[i];
    }
    // Pickup rides on the photocurrent, so it is absent from the LO-blocked trace.
    if (light) add_tones(current, scenario.tones, derive_seed(seed, 5));
    return current;
}

/// Parameter-level entry point: derives the operating point from the cavity description.
inline TimeSeries homodyne_measure(const NoiseScenario& scenario, const OpaParams& params,
                                   const DetectionChain& chain, const HomodyneDetector& detector,
                                   const TimeSeries& lo_phase, double duration, double sample_rate,
                                   std::uint64_t seed) {
    detail::require(lo_phase.sample_rate == sample_rate, ErrorKind::rate_mismatch,
                    "LO phase series sample rate does not match the requested sample rate");
    detail::require(duration * sample_rate >= 2.0, ErrorKind::too_short, "duration * sample_rate must be >= 2");
    const auto expected = static_cast<std::size_t>(std::llround(duration * sample_rate));
    detail::require(lo_phase.size() == expected, ErrorKind::invalid_series,
                    "LO phase series must cover the requested duration");
    return homodyne_measure(scenario, SqueezerModel::from_params(params, chain), detector, lo_phase, seed);
}

struct SpcmChannel {
    double background_rate = 500.0;  // Hz
    double etalon_transmission = 1.0;
    double bin_width = 0.020;  // s
};

inline void validate(const SpcmChannel& s) {
    detail::require(s.background_rate >= 0.0, ErrorKind::parameter_domain, "background_rate must be >= 0");
    detail::require(s.etalon_transmission > 0.0 && s.etalon_transmission <= 1.0, ErrorKind::parameter_domain,
                    "etalon_transmission must lie in (0, 1]");
    detail::require(s.bin_width > 0.0, ErrorKind::parameter_domain, "bin_width must be > 0");
}

/// Anchors of the count-rate model at the reference operating point.
struct CountRateCalibration {
    double pump_only_rate = 1.95e6;      // Hz, total including background
    double reference_pump_power = 100.0;  // mW
    double reference_threshold = 165.0;   // mW
    double probe_rate_per_nw = 30.0e3;    // Hz/nW with the pump off
};

/// SPCM count rate: background + parametric fluorescence ~ x^2/(1-x^2) + probe * G(x, phi),
/// with the signal terms scaled by the etalon transmission.
inline double count_rate_model(const OpaParams& params, double probe_power_nw, double pump_phase,
                               const SpcmChannel& spcm, const CountRateCalibration& cal = {}) {
    validate(spcm);
    detail::require(probe_power_nw >= 0.0, ErrorKind::parameter_domain, "probe power must be >= 0");
    const double x = normalized_pump(params);
    const double x_ref2 = cal.reference_pump_power / cal.reference_threshold;
    const double fluor_ref = cal.pump_only_rate - spcm.background_rate;
    const double fluor = fluor_ref * (x * x / (1.0 - x * x)) / (x_ref2 / (1.0 - x_ref2));
    const double probe = cal.probe_rate_per_nw * probe_power_nw * parametric_power_gain(x, pump_phase);
    return spcm.background_rate + spcm.etalon_transmission * (fluor + probe);
}

struct CountSeries {
    double sample_rate = 1.0;
    std::vector<std::uint64_t> counts;
};

/// Independent Poisson draws with mean rate * dt per sample.
inline CountSeries spcm_counts(const TimeSeries& rate_series, std::uint64_t seed) {
    validate(rate_series);
    detail::require(std::all_of(rate_series.samples.begin(), rate_series.samples.end(),
                                [](double r) { return r >= 0.0; }),
                    ErrorKind::parameter_domain, "count rates must be >= 0");
    CountSeries out{rate_series.sample_rate, std::vector<std::uint64_t>(rate_series.size())};
    auto rng = make_engine(seed);
    const double dt = rate_series.dt();
    for (std::size_t i = 0; i < rate_series.size(); ++i) {
        const double mu = rate_series.samples[i] * dt;
        if (mu > 0.0) out.counts[i] = std::poisson_distribution<std::uint64_t>(mu)(rng);
    }
    return out;
}

}  // namespace sqz
