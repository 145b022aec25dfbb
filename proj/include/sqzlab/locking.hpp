#pragma once

// Dither locking. A lock-in amplifier demodulates the plant observable at the
// dither frequency; a PID integrates the normalized error onto the phase actuator.
// Two plants are provided: homodyne band-noise power (quantum noise locking of the
// LO phase) and SPCM count rate (single-photon modulation locking of the pump phase).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "sqzlab/detection.hpp"
#include "sqzlab/error.hpp"
#include "sqzlab/filters.hpp"
#include "sqzlab/physics.hpp"
#include "sqzlab/random.hpp"
#include "sqzlab/timeseries.hpp"

namespace sqz {

struct LockInConfig {
    double mod_frequency = 33.5e3;  // Hz
    double mod_amplitude = 0.045;   // rad of phase dither
    double demod_phase = 0.0;       // rad
    double lpf_cutoff = 100.0;      // Hz
    int lpf_order = 2;
};

inline void validate(const LockInConfig& c) {
    using detail::require;
    require(c.mod_frequency > 0.0, ErrorKind::parameter_domain, "mod_frequency must be > 0");
    require(c.mod_amplitude > 0.0, ErrorKind::parameter_domain, "mod_amplitude must be > 0");
    require(c.lpf_cutoff > 0.0 && c.lpf_cutoff < 0.5 * c.mod_frequency, ErrorKind::parameter_domain,
            "lpf_cutoff must lie in (0, mod_frequency / 2)");
    require(c.lpf_order >= 1, ErrorKind::parameter_domain, "lpf_order must be >= 1");
}

/// Streaming lock-in: LPF[ 2 x(t) sin(2 pi f_mod t + demod_phase) ].
class LockIn {
public:
    LockIn(const LockInConfig& config, double sample_rate)
        : lpf_(config.lpf_order, config.lpf_cutoff, sample_rate),
          step_(2.0 * std::numbers::pi * config.mod_frequency / sample_rate),
          phase0_(config.demod_phase) {
        validate(config);
        detail::require(sample_rate > 2.0 * config.mod_frequency, ErrorKind::parameter_domain,
                        "sample rate must exceed twice the modulation frequency");
    }

    double operator()(double x) {
        const double ref = std::sin(step_ * static_cast<double>(index_++) + phase0_);
        return lpf_(2.0 * x * ref);
    }

private:
    CascadedLowPass<double> lpf_;
    double step_;
    double phase0_;
    std::uint64_t index_ = 0;
};

inline TimeSeries lock_in_demodulate(const TimeSeries& signal, const LockInConfig& config) {
    validate(signal);
    validate(config);
    detail::require(signal.sample_rate > 2.0 * config.mod_frequency, ErrorKind::parameter_domain,
                    "signal is undersampled for the modulation frequency");
    LockIn lockin(config, signal.sample_rate);
    TimeSeries out(signal.sample_rate, signal.size());
    for (std::size_t i = 0; i < signal.size(); ++i) out.samples[i] = lockin(signal.samples[i]);
    return out;
}

struct PidConfig {
    double kp = 0.0;
    double ki = 1.0;  // 1/s, applied to a phase-normalized error
    double kd = 0.0;
    int sign = 1;  // +1 holds a maximum of the observable, -1 a minimum
    double output_limit = 10.0;  // rad
};

inline void validate(const PidConfig& c) {
    detail::require(c.sign == 1 || c.sign == -1, ErrorKind::parameter_domain, "pid sign must be +1 or -1");
    detail::require(c.output_limit > 0.0, ErrorKind::parameter_domain, "output_limit must be > 0");
}

struct PidState {
    double integral = 0.0;
    double previous_error = 0.0;
    bool has_previous = false;
};

/// One PID update. The integrator stops accumulating while the output is clamped
/// and the new error would push it further into the limit.
inline double pid_step(const PidConfig& config, PidState& state, double error, double dt) {
    detail::require(dt > 0.0, ErrorKind::parameter_domain, "dt must be > 0");
    const double e = config.sign * error;
    const double derivative = state.has_previous ? (e - state.previous_error) / dt : 0.0;
    state.previous_error = e;
    state.has_previous = true;

    const double candidate = state.integral + config.ki * e * dt;
    const double unclamped = config.kp * e + candidate + config.kd * derivative;
    const double out = std::clamp(unclamped, -config.output_limit, config.output_limit);
    if (out == unclamped || (unclamped > 0.0) != (e > 0.0)) state.integral = candidate;
    state.integral = std::clamp(state.integral, -config.output_limit, config.output_limit);
    return out;
}

struct LockResult {
    TimeSeries phase_error_series;  // rad, quasi-static error (dither excluded), whole run
    TimeSeries observable;          // plant observable, block-averaged to the record rate
    TimeSeries error_signal;        // normalized demodulated error, zero during the scan
    double rms_error = 0.0;         // rad, post-acquisition window
    bool locked = false;
    double acquisition_time = 0.0;  // s after the loop is engaged
    double lock_start_time = 0.0;   // s into the run at which the loop is engaged
    double fringe_amplitude = 0.0;  // half peak-to-peak of the scanned fringe
    double fringe_significance = 0.0;
    double mean_error_signal = 0.0;  // post-acquisition
    double target_phase = 0.0;
    std::vector<double> observable_capture;  // full-rate tail of the locked observable
    double capture_rate = 0.0;
    std::string diagnostic;
};

struct DitherLoopOptions {
    double scan_duration = 2.0;  // s
    int scan_periods = 2;        // fringe periods swept before engaging
    int scan_bins = 100;
    double lock_duration = 100.0;  // s
    double record_rate = 1000.0;   // Hz
    double min_fringe_significance = 12.0;
    double max_locked_rms = 0.25;  // rad
    double acquisition_hold_time_constants = 10.0;
    double acquisition_threshold_factor = 3.0;
    std::size_t capture_samples = 0;
};

namespace detail {

/// Linear interpolation into a disturbance series at arbitrary times; holds the last value.
class SeriesSampler {
public:
    explicit SeriesSampler(const TimeSeries* series) : series_(series) {}
    double operator()(double t) const {
        if (series_ == nullptr || series_->samples.empty()) return 0.0;
        const double pos = t * series_->sample_rate;
        if (pos <= 0.0) return series_->samples.front();
        const auto k = static_cast<std::size_t>(pos);
        if (k + 1 >= series_->size()) return series_->samples.back();
        const double frac = pos - static_cast<double>(k);
        return series_->samples[k] + frac * (series_->samples[k + 1] - series_->samples[k]);
    }

private:
    const TimeSeries* series_;
};

inline double wrap(double value, double period) {
    return value - period * std::floor(value / period + 0.5);
}

/// Least-squares fit of c + a cos(k u) + b sin(k u).
struct FringeFit {
    double offset = 0.0, a = 0.0, b = 0.0, residual_std = 0.0;
    double amplitude() const { return std::hypot(a, b); }
};

inline FringeFit fit_fringe(const std::vector<double>& u, const std::vector<double>& y, double k) {
    // Normal equations for the 3-parameter linear model.
    double m[3][3] = {}, r[3] = {};
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double basis[3] = {1.0, std::cos(k * u[i]), std::sin(k * u[i])};
        for (int p = 0; p < 3; ++p) {
            r[p] += basis[p] * y[i];
            for (int q = 0; q < 3; ++q) m[p][q] += basis[p] * basis[q];
        }
    }
    for (int col = 0; col < 3; ++col) {
        int pivot = col;
        for (int row = col + 1; row < 3; ++row)
            if (std::abs(m[row][col]) > std::abs(m[pivot][col])) pivot = row;
        std::swap(m[col], m[pivot]);
        std::swap(r[col], r[pivot]);
        for (int row = 0; row < 3; ++row) {
            if (row == col) continue;
            const double f = m[row][col] / m[col][col];
            for (int q = col; q < 3; ++q) m[row][q] -= f * m[col][q];
            r[row] -= f * r[col];
        }
    }
    FringeFit fit{r[0] / m[0][0], r[1] / m[1][1], r[2] / m[2][2], 0.0};
    double ss = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double e = y[i] - (fit.offset + fit.a * std::cos(k * u[i]) + fit.b * std::sin(k * u[i]));
        ss += e * e;
    }
    fit.residual_std = std::sqrt(ss / std::max<double>(1.0, static_cast<double>(u.size()) - 3.0));
    return fit;
}

}  // namespace detail

/// Plants expose: sample_rate(), sample(phase) -> observable, fringe_wavenumber()
/// (observable ~ cos(k phase)) and maximum_phase() (phase of the fringe maximum).
template <class P>
concept DitherPlant = requires(P p, double phase) {
    { p.sample_rate() } -> std::convertible_to<double>;
    { p.sample(phase) } -> std::convertible_to<double>;
    { p.fringe_wavenumber() } -> std::convertible_to<double>;
    { p.maximum_phase() } -> std::convertible_to<double>;
};

/// Scan the actuator across the fringe, fit it, engage the loop near the selected
/// extremum and hold it for `lock_duration`. The error fed to the PID is the
/// demodulated signal divided by k^2 F delta, which equals minus the phase offset
/// from a maximum (plus from a minimum) for small offsets.
template <DitherPlant Plant>
LockResult run_dither_lock(Plant& plant, const LockInConfig& lockin_config, const PidConfig& pid,
                           const TimeSeries* disturbance, const DitherLoopOptions& opt) {
    validate(lockin_config);
    validate(pid);
    const double fs = plant.sample_rate();
    const double dt = 1.0 / fs;
    const double k = plant.fringe_wavenumber();
    const double period = 2.0 * std::numbers::pi / k;
    const double target = pid.sign > 0 ? plant.maximum_phase() : plant.maximum_phase() + 0.5 * period;
    const double delta = lockin_config.mod_amplitude;
    const double dither_step = 2.0 * std::numbers::pi * lockin_config.mod_frequency / fs;
    detail::SeriesSampler dist(disturbance);

    const auto scan_samples = static_cast<std::size_t>(std::llround(opt.scan_duration * fs));
    const auto lock_samples = static_cast<std::size_t>(std::llround(opt.lock_duration * fs));
    const auto block = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(fs / opt.record_rate)));
    const double record_rate = fs / static_cast<double>(block);
    const std::size_t total = scan_samples + lock_samples;

    LockResult result;
    result.target_phase = target;
    result.lock_start_time = static_cast<double>(scan_samples) * dt;
    result.phase_error_series = TimeSeries(record_rate, total / block);
    result.observable = TimeSeries(record_rate, total / block);
    result.error_signal = TimeSeries(record_rate, total / block);

    double acc_err = 0.0, acc_obs = 0.0, acc_sig = 0.0;
    std::size_t acc_n = 0, rec = 0;
    auto record = [&](double err, double obs, double sig) {
        acc_err += err;
        acc_obs += obs;
        acc_sig += sig;
        if (++acc_n == block) {
            if (rec < result.phase_error_series.size()) {
                result.phase_error_series.samples[rec] = acc_err / static_cast<double>(block);
                result.observable.samples[rec] = acc_obs / static_cast<double>(block);
                result.error_signal.samples[rec] = acc_sig / static_cast<double>(block);
                ++rec;
            }
            acc_err = acc_obs = acc_sig = 0.0;
            acc_n = 0;
        }
    };

    // Scan: actuator sweeps scan_periods fringe periods ending at the target.
    const double span = opt.scan_periods * period;
    const std::size_t bins = static_cast<std::size_t>(std::max(8, opt.scan_bins));
    const std::size_t per_bin = std::max<std::size_t>(1, scan_samples / bins);
    std::vector<double> bin_u, bin_y;
    double bin_acc = 0.0, bin_u_acc = 0.0, total_obs = 0.0;
    std::size_t bin_n = 0;
    for (std::size_t i = 0; i < scan_samples; ++i) {
        const double t = static_cast<double>(i) * dt;
        const double u = target - span + span * static_cast<double>(i) / static_cast<double>(scan_samples);
        const double d = dist(t);
        const double obs = plant.sample(u + d + delta * std::sin(dither_step * static_cast<double>(i)));
        total_obs += obs;
        bin_acc += obs;
        bin_u_acc += u;
        if (++bin_n == per_bin) {
            bin_y.push_back(bin_acc / static_cast<double>(per_bin));
            bin_u.push_back(bin_u_acc / static_cast<double>(per_bin));
            bin_acc = bin_u_acc = 0.0;
            bin_n = 0;
        }
        record(detail::wrap(u + d - target, period), obs, 0.0);
    }
    detail::require(total_obs != 0.0 || scan_samples == 0, ErrorKind::inconsistent_data,
                    "plant observable is identically zero during the scan (no signal)");

    const auto fit = detail::fit_fringe(bin_u, bin_y, k);
    const double noise = fit.residual_std * std::sqrt(2.0 / static_cast<double>(bin_u.size()));
    result.fringe_amplitude = fit.amplitude();
    result.fringe_significance = noise > 0.0 ? fit.amplitude() / noise : (fit.amplitude() > 0 ? 1e300 : 0.0);
    if (result.fringe_significance < opt.min_fringe_significance) {
        result.locked = false;
        result.diagnostic = "no fringe: scanned fringe amplitude is " +
                            std::to_string(result.fringe_significance) +
                            " sigma, below the engage threshold of " + std::to_string(opt.min_fringe_significance);
        result.phase_error_series.samples.resize(rec);
        result.observable.samples.resize(rec);
        result.error_signal.samples.resize(rec);
        return result;
    }

    // Fitted fringe maximum at u_max means the mean disturbance is maximum_phase - u_max.
    const double u_max = std::atan2(fit.b, fit.a) / k;
    const double offset_estimate = detail::wrap(plant.maximum_phase() - u_max, period);
    const double engage = target - offset_estimate;
    const double norm = k * k * fit.amplitude() * delta;

    LockIn lockin(lockin_config, fs);
    PidState state;
    state.integral = engage;  // output equals the integral for zero error
    double u = engage;
    std::vector<double> capture;
    const std::size_t capture_from = lock_samples > opt.capture_samples ? lock_samples - opt.capture_samples : 0;
    for (std::size_t j = 0; j < lock_samples; ++j) {
        const std::size_t i = scan_samples + j;
        const double t = static_cast<double>(i) * dt;
        const double d = dist(t);
        const double obs = plant.sample(u + d + delta * std::sin(dither_step * static_cast<double>(i)));
        const double err = lockin(obs) / norm;
        record(detail::wrap(u + d - target, period), obs, err);
        if (opt.capture_samples > 0 && j >= capture_from) capture.push_back(obs);
        u = pid_step(pid, state, err, dt);
    }
    result.phase_error_series.samples.resize(rec);
    result.observable.samples.resize(rec);
    result.error_signal.samples.resize(rec);
    result.observable_capture = std::move(capture);
    result.capture_rate = fs;

    // Acquisition: first point after engage from which |error| stays below
    // threshold_factor x steady-state RMS for hold_time_constants LPF time constants.
    const auto lock_rec0 = static_cast<std::size_t>(std::ceil(result.lock_start_time * record_rate));
    const auto& err = result.phase_error_series.samples;
    if (lock_rec0 >= err.size()) {
        result.diagnostic = "lock segment too short";
        return result;
    }
    const std::size_t n_lock = err.size() - lock_rec0;
    const std::span<const double> tail(err.data() + lock_rec0 + n_lock / 2, n_lock - n_lock / 2);
    const double ss_rms = rms(tail);
    const double threshold = std::max(opt.acquisition_threshold_factor * ss_rms, 1e-9);
    const double tau = 1.0 / (2.0 * std::numbers::pi * lockin_config.lpf_cutoff);
    const auto hold = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(opt.acquisition_hold_time_constants * tau * record_rate)));
    std::size_t run = 0, acquired = err.size();
    for (std::size_t i = lock_rec0; i < err.size(); ++i) {
        run = std::abs(err[i]) < threshold ? run + 1 : 0;
        if (run >= hold) {
            acquired = i + 1 - run;
            break;
        }
    }
    if (acquired == err.size()) {
        result.diagnostic = "loop never settled below the acquisition threshold";
        result.rms_error = ss_rms;
        return result;
    }
    const std::span<const double> post(err.data() + acquired, err.size() - acquired);
    result.acquisition_time = static_cast<double>(acquired - lock_rec0) / record_rate;
    result.rms_error = rms(post);
    const auto& sig = result.error_signal.samples;
    result.mean_error_signal = mean(std::span<const double>(sig.data() + acquired, sig.size() - acquired));
    const double worst = std::abs(*std::max_element(post.begin(), post.end(),
                                                    [](double a, double b) { return std::abs(a) < std::abs(b); }));
    result.locked = result.rms_error < opt.max_locked_rms && worst < 0.25 * period;
    result.diagnostic = result.locked ? "locked" : "residual too large or cycle slip after acquisition";
    return result;
}

/// Homodyne band-noise-power plant: the LO phase sets the measured quadrature and
/// the observable is the squared output of a band-pass at the analysis frequency.
class QuantumNoisePlant {
public:
    struct Config {
        SqueezerModel model;
        HomodyneDetector detector;
        double sample_rate = 1.0e6;
        double analysis_frequency = 200.0e3;
        double analysis_bandwidth = 100.0e3;
    };

    QuantumNoisePlant(const Config& config, std::uint64_t seed)
        : config_(config),
          band_(config.analysis_frequency, config.analysis_bandwidth, config.sample_rate),
          rng_(make_engine(seed)) {
        const auto pair = config.model.at(config.analysis_frequency);
        const double scale = std::sqrt(0.5 * config.sample_rate);
        sq_ = scale * std::sqrt(pair.r_minus);
        anti_ = scale * std::sqrt(pair.r_plus);
        dark_ = scale * std::sqrt(config.detector.dark_psd(config.analysis_frequency));
    }

    double sample_rate() const { return config_.sample_rate; }
    double fringe_wavenumber() const { return 2.0; }
    double maximum_phase() const { return 0.5 * std::numbers::pi; }

    double sample(double theta) {
        const double i = std::cos(theta) * sq_ * gauss_(rng_) + std::sin(theta) * anti_ * gauss_(rng_) +
                         dark_ * gauss_(rng_);
        const double y = band_(i);
        return y * y;
    }

private:
    Config config_;
    BiquadBandPass band_;
    Engine rng_;
    std::normal_distribution<double> gauss_;
    double sq_ = 0.0, anti_ = 0.0, dark_ = 0.0;
};

/// SPCM count-rate plant: per-sample Poisson counts from the count-rate model,
/// observable in Hz. `rate_scale` multiplies every rate (shot-noise-free limit).
class SpcmPlant {
public:
    struct Config {
        OpaParams params;
        double probe_power_nw = 3.0;
        SpcmChannel spcm;
        CountRateCalibration calibration;
        double sample_rate = 500.0e3;
        double rate_scale = 1.0;
    };

    SpcmPlant(const Config& config, std::uint64_t seed) : config_(config), rng_(make_engine(seed)) {
        const double bg = count_rate_model(config.params, 0.0, 0.0, config.spcm, config.calibration);
        const double probe_at_max =
            count_rate_model(config.params, config.probe_power_nw, 0.0, config.spcm, config.calibration) - bg;
        const double probe_at_min = count_rate_model(config.params, config.probe_power_nw, std::numbers::pi,
                                                     config.spcm, config.calibration) -
                                    bg;
        // rate(phi) = mean + half * cos(phi), exact for the cos^2/sin^2 gain form.
        mean_ = config.rate_scale * (bg + 0.5 * (probe_at_max + probe_at_min));
        half_ = config.rate_scale * 0.5 * (probe_at_max - probe_at_min);
        detail::require(mean_ > 0.0, ErrorKind::inconsistent_data, "SPCM count rate is zero: nothing to lock on");
    }

    double sample_rate() const { return config_.sample_rate; }
    double fringe_wavenumber() const { return 1.0; }
    double maximum_phase() const { return 0.0; }
    double rate(double phi) const { return mean_ + half_ * std::cos(phi); }

    double sample(double phi) {
        const double mu = rate(phi) / config_.sample_rate;
        const auto n = std::poisson_distribution<std::uint64_t>(mu)(rng_);
        return static_cast<double>(n) * config_.sample_rate;
    }

private:
    Config config_;
    Engine rng_;
    double mean_ = 0.0, half_ = 0.0;
};

/// Quantum noise locking of the LO phase. pid.sign = -1 holds the squeezed quadrature
/// (noise minimum), +1 the anti-squeezed one. A pump-off plant has no phase
/// dependence and yields locked = false.
inline LockResult quantum_noise_lock(const QuantumNoisePlant::Config& plant_config, const LockInConfig& lockin,
                                     const PidConfig& pid, const TimeSeries* disturbance, double duration,
                                     std::uint64_t seed, DitherLoopOptions options = {}) {
    QuantumNoisePlant plant(plant_config, derive_seed(seed, 11));
    options.lock_duration = duration;
    return run_dither_lock(plant, lockin, pid, disturbance, options);
}

/// Single-photon modulation locking of the pump phase to 0 (fringe maximum,
/// amplification) or pi (minimum, deamplification). The PID sign follows the target.
inline LockResult sml_lock(const SpcmPlant::Config& plant_config, const LockInConfig& lockin, PidConfig pid,
                           double target, const TimeSeries* disturbance, double duration, std::uint64_t seed,
                           DitherLoopOptions options = {}) {
    const bool to_pi = std::abs(detail::wrap(target - std::numbers::pi, 2.0 * std::numbers::pi)) < 1e-9;
    const bool to_zero = std::abs(detail::wrap(target, 2.0 * std::numbers::pi)) < 1e-9;
    detail::require(to_pi || to_zero, ErrorKind::parameter_domain, "SML target must be 0 or pi");
    pid.sign = to_zero ? 1 : -1;
    SpcmPlant plant(plant_config, derive_seed(seed, 12));
    options.lock_duration = duration;
    return run_dither_lock(plant, lockin, pid, disturbance, options);
}

}  // namespace sqz
