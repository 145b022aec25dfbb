#pragma once

// End-to-end scenarios: simulated homodyne measurements fed through the analyzer,
// dither locks of the pump phase, parameter fits from tabulated pairs and the
// long-term stability hold. Each scenario is a pure function of (config, inputs).

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <cmath>
#include <cstdint>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "sqzlab/analyzer.hpp"
#include "sqzlab/config.hpp"
#include "sqzlab/detection.hpp"
#include "sqzlab/inference.hpp"
#include "sqzlab/locking.hpp"
#include "sqzlab/noise.hpp"
#include "sqzlab/physics.hpp"
#include "sqzlab/random.hpp"
#include "sqzlab/timeseries.hpp"

namespace sqz {

/// Runs produce(i) for i in [0, n) on worker threads in fixed-size batches and hands
/// the results to consume(i, value) in index order, so reductions are deterministic.
template <class Produce, class Consume>
void parallel_ordered(std::size_t n, Produce&& produce, Consume&& consume) {
    using T = decltype(produce(std::size_t{0}));
    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), n));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) consume(i, produce(i));
        return;
    }
    for (std::size_t base = 0; base < n; base += workers) {
        const std::size_t count = std::min(workers, n - base);
        std::vector<std::optional<T>> slots(count);
        std::exception_ptr failure;
        std::mutex failure_mutex;
        std::vector<std::thread> threads;
        for (std::size_t k = 0; k < count; ++k) {
            threads.emplace_back([&, k] {
                try {
                    slots[k].emplace(produce(base + k));
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            });
        }
        for (auto& t : threads) t.join();
        if (failure) std::rethrow_exception(failure);
        for (std::size_t k = 0; k < count; ++k) consume(base + k, std::move(*slots[k]));
    }
}

// Stream identifiers under the root seed.
enum class Stream : std::uint64_t { sweep = 1, spectrum = 2, zero_span = 3, lock = 4, stability = 5, qnl = 6 };

inline std::uint64_t stream_seed(std::uint64_t root, Stream s, std::initializer_list<std::uint64_t> rest = {}) {
    std::uint64_t seed = derive_seed(root, static_cast<std::uint64_t>(s));
    for (auto r : rest) seed = derive_seed(seed, r);
    return seed;
}

/// Homodyne operating point at the given pump power.
inline SqueezerModel plant_model(const ScenarioConfig& c, double pump_power) {
    OpaParams p = c.opa;
    p.pump_power = pump_power;
    validate(p);
    const double gamma = cavity_decay_rate(p);
    if (c.plant.mode == "first_principles") return SqueezerModel::from_params(p, c.chain);
    const auto fit = fit_opa_operating_point({c.plant.squeezing_db, c.plant.anti_squeezing_db, c.plant.frequency},
                                             c.plant.frequency / gamma);
    const double x = fit.x * std::sqrt(pump_power / c.plant.reference_pump_power);
    detail::require(x < 1.0, ErrorKind::above_threshold,
                    "pump power drives the calibrated operating point above threshold");
    return {x, fit.efficiency_determined ? fit.total_efficiency : 1.0, gamma};
}

inline SqueezerModel plant_model(const ScenarioConfig& c) { return plant_model(c, c.opa.pump_power); }

/// Tones above the Nyquist frequency of a simulation are outside its band.
inline NoiseScenario noise_in_band(const NoiseScenario& n, double sample_rate) {
    NoiseScenario out = n;
    out.tones.clear();
    for (const auto& t : n.tones)
        if (t.frequency < 0.5 * sample_rate) out.tones.push_back(t);
    return out;
}

/// Squeezing-angle error of a locked homodyne: LO-lock residual plus, when the probe
/// is seeded, the pump-lock residual.
inline TimeSeries angle_jitter(const ScenarioConfig& c, double sample_rate, std::size_t n, bool probe_seeded,
                               std::uint64_t seed) {
    const auto& lo = c.locks.lo;
    const auto& pump = c.locks.pump;
    const double pump_rms = probe_seeded ? pump.residual_jitter_rms : 0.0;
    if (pump_rms == 0.0 || lo.residual_jitter_rms == 0.0 || lo.jitter_corner == pump.jitter_corner) {
        // Independent Lorentzian processes with one corner add to a single one.
        const double rms = std::hypot(lo.residual_jitter_rms, pump_rms);
        const double corner = pump_rms > 0.0 ? pump.jitter_corner : lo.jitter_corner;
        return phase_jitter_series(sample_rate, n, rms, corner, derive_seed(seed, 1));
    }
    auto angle = phase_jitter_series(sample_rate, n, lo.residual_jitter_rms, lo.jitter_corner, derive_seed(seed, 1));
    const auto extra = phase_jitter_series(sample_rate, n, pump_rms, pump.jitter_corner, derive_seed(seed, 2));
    for (std::size_t i = 0; i < n; ++i) angle.samples[i] += extra.samples[i];
    return angle;
}

enum class Channel : std::uint64_t { sql = 0, squeezed = 1, anti = 2, dark = 3, scanned = 4 };

inline TimeSeries measure_channel(const ScenarioConfig& c, const SqueezerModel& model, Channel ch,
                                  double sample_rate, std::size_t n, bool probe_seeded, std::uint64_t seed) {
    const auto noise = noise_in_band(c.noise, sample_rate);
    switch (ch) {
        case Channel::sql:
            return homodyne_measure(noise, model, c.detector, TimeSeries(sample_rate, n), seed, HomodyneInput::vacuum);
        case Channel::dark:
            return homodyne_measure(noise, model, c.detector, TimeSeries(sample_rate, n), seed, HomodyneInput::blocked);
        case Channel::squeezed:
        case Channel::anti: {
            auto angle = angle_jitter(c, sample_rate, n, probe_seeded, derive_seed(seed, 100));
            if (ch == Channel::anti)
                for (auto& v : angle.samples) v += 0.5 * std::numbers::pi;
            return homodyne_measure(noise, model, c.detector, angle, seed);
        }
        case Channel::scanned:
            break;
    }
    throw Error(ErrorKind::parameter_domain, "channel needs an explicit LO phase series");
}

/// Mean of (trace - dark) / (sql - dark) in dB, from linear traces.
inline double mean_level_db(const std::vector<double>& trace, const std::vector<double>& sql,
                            const std::vector<double>& dark) {
    const double d = mean(dark);
    const double s = mean(sql) - d;
    detail::require(s > 0.0, ErrorKind::inconsistent_data, "SQL level is not above the dark level");
    const double t = mean(trace) - d;
    detail::require(t > 0.0, ErrorKind::inconsistent_data, "trace level is not above the dark level");
    return to_db(t / s);
}

inline double finite_std(const std::vector<double>& v) {
    std::vector<double> f;
    for (double x : v)
        if (std::isfinite(x)) f.push_back(x);
    return f.size() >= 2 ? std::sqrt(variance(f)) : 0.0;
}

// ---- homodyne phase sweep at a fixed analysis frequency --------------------

struct SweepPhaseResult {
    double export_rate = 0.0;
    std::vector<double> scan_phase;  // LO phase of the scanned trace at export times
    std::vector<double> sql_db, squeezed_db, anti_db, scanned_db;
    double squeezing_db = 0.0;
    double anti_squeezing_db = 0.0;
    double squeezing_std_db = 0.0;
    double anti_squeezing_std_db = 0.0;
    double scanned_min_db = 0.0;
    double scanned_max_db = 0.0;
    int averages = 0;
};

inline SweepPhaseResult sweep_phase(const ScenarioConfig& c) {
    const auto& s = c.analyzer.sweep;
    const auto model = plant_model(c);
    const double fs = s.sample_rate;
    const double settle = zero_span_settling_time(fs, s.center, s.rbw, s.vbw);
    const auto skip = static_cast<std::size_t>(std::ceil(settle * fs));
    const auto keep = static_cast<std::size_t>(std::llround(s.trace_duration * fs));
    const std::size_t n = skip + keep;
    const auto root = stream_seed(c.seed, Stream::sweep);

    auto scan_angle = [&](std::size_t count) {
        TimeSeries a(fs, count);
        for (std::size_t i = 0; i < count; ++i) {
            const double t = (static_cast<double>(i) - static_cast<double>(skip)) / fs;
            a.samples[i] = std::numbers::pi * s.scan_periods * std::max(0.0, t) / s.trace_duration;
        }
        return a;
    };

    constexpr Channel channels[] = {Channel::sql, Channel::squeezed, Channel::anti, Channel::dark, Channel::scanned};
    std::vector<RmsAccumulator> acc(5);
    const std::size_t jobs = static_cast<std::size_t>(s.averages) * 5;
    parallel_ordered(
        jobs,
        [&](std::size_t job) {
            const auto ch = channels[job % 5];
            const auto seed = derive_seed(root, {static_cast<std::uint64_t>(ch), job / 5});
            TimeSeries current;
            if (ch == Channel::scanned) {
                auto angle = scan_angle(n);
                const auto jitter = angle_jitter(c, fs, n, false, derive_seed(seed, 100));
                for (std::size_t i = 0; i < n; ++i) angle.samples[i] += jitter.samples[i];
                current = homodyne_measure(noise_in_band(c.noise, fs), model, c.detector, angle, seed);
            } else {
                current = measure_channel(c, model, ch, fs, n, false, seed);
            }
            auto trace = zero_span(current, s.center, s.rbw, s.vbw);
            return std::vector<double>(trace.samples.begin() + static_cast<std::ptrdiff_t>(skip), trace.samples.end());
        },
        [&](std::size_t job, std::vector<double>&& trace) { acc[job % 5].add(trace); });

    std::vector<std::vector<double>> avg;
    for (auto& a : acc) avg.push_back(a.result());
    const auto& sql = avg[0];
    const auto& dark = avg[3];

    SweepPhaseResult r;
    r.averages = s.averages;
    r.squeezing_db = mean_level_db(avg[1], sql, dark);
    r.anti_squeezing_db = mean_level_db(avg[2], sql, dark);
    r.squeezing_std_db = finite_std(normalize_and_subtract(avg[1], sql, dark).db);
    r.anti_squeezing_std_db = finite_std(normalize_and_subtract(avg[2], sql, dark).db);

    const auto factor = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(fs / s.export_rate)));
    auto down = [&](const std::vector<double>& v) { return decimate_mean(TimeSeries(fs, v), factor).samples; };
    const auto sql_d = down(sql), dark_d = down(dark);
    r.export_rate = fs / static_cast<double>(factor);
    r.sql_db = normalize_and_subtract(sql_d, sql_d, dark_d).db;
    r.squeezed_db = normalize_and_subtract(down(avg[1]), sql_d, dark_d).db;
    r.anti_db = normalize_and_subtract(down(avg[2]), sql_d, dark_d).db;
    r.scanned_db = normalize_and_subtract(down(avg[4]), sql_d, dark_d).db;
    const auto phase = scan_angle(n);
    for (std::size_t k = 0; k < r.sql_db.size(); ++k) {
        const std::size_t mid = skip + k * factor + factor / 2;
        r.scan_phase.push_back(phase.samples[std::min(mid, n - 1)]);
    }
    r.scanned_min_db = std::numeric_limits<double>::infinity();
    r.scanned_max_db = -std::numeric_limits<double>::infinity();
    for (double v : r.scanned_db) {
        if (!std::isfinite(v)) continue;
        r.scanned_min_db = std::min(r.scanned_min_db, v);
        r.scanned_max_db = std::max(r.scanned_max_db, v);
    }
    return r;
}

// ---- stitched two-window FFT spectrum ---------------------------------------

struct ToneCheck {
    double frequency = 0.0;
    double detected_frequency = 0.0;
    double offset_bins = 0.0;
    double peak_db = 0.0;
};

struct SpectrumResult {
    std::vector<double> frequency;
    std::vector<double> rbw;
    std::vector<double> sql_db, squeezed_db, anti_db;
    std::vector<double> log_frequency, log_squeezed_db, log_anti_db;
    double squeezing_db = 0.0;       // flat-region mean
    double anti_squeezing_db = 0.0;  // flat-region mean
    std::vector<ToneCheck> tones;
    std::size_t flagged_bins = 0;
    int averages_low = 0, averages_high = 0;
};

inline SpectrumResult spectrum(const ScenarioConfig& c) {
    const auto model = plant_model(c);
    const bool probe = c.spcm.probe_power_nw > 0.0;
    constexpr Channel channels[] = {Channel::sql, Channel::squeezed, Channel::anti, Channel::dark};
    std::vector<std::vector<PowerSpectrum>> windows(4);
    int window_index = 0;
    for (const auto* w : {&c.analyzer.spectrum_low, &c.analyzer.spectrum_high}) {
        const std::size_t n = segment_length_for_rbw(w->sample_rate, w->rbw);
        const SpectrumConfig sc{AnalyzerMode::fft, w->rbw, w->vbw, 0.0, w->start, w->stop, 1};
        const auto root = stream_seed(c.seed, Stream::spectrum, {static_cast<std::uint64_t>(window_index)});
        std::vector<RmsAccumulator> acc(4);
        PowerSpectrum shape;
        parallel_ordered(
            static_cast<std::size_t>(w->averages) * 4,
            [&](std::size_t job) {
                const auto ch = channels[job % 4];
                const auto seed = derive_seed(root, {static_cast<std::uint64_t>(ch), job / 4});
                return fft_spectrum(measure_channel(c, model, ch, w->sample_rate, n, probe, seed), sc);
            },
            [&](std::size_t job, PowerSpectrum&& ps) {
                acc[job % 4].add(ps.power);
                if (job == 0) shape = std::move(ps);
            });
        for (std::size_t k = 0; k < 4; ++k) {
            PowerSpectrum p = shape;
            p.power = acc[k].result();
            p.n_averages = w->averages;
            windows[k].push_back(std::move(p));
        }
        ++window_index;
    }

    // Low window up to the split, high window above it.
    for (auto& ch : windows) {
        auto& low = ch[0];
        std::vector<double> f, p;
        for (std::size_t i = 0; i < low.size(); ++i)
            if (low.frequencies[i] < c.analyzer.spectrum_split) {
                f.push_back(low.frequencies[i]);
                p.push_back(low.power[i]);
            }
        low.frequencies = f;
        low.power = p;
    }
    std::vector<StitchedSpectrum> st;
    for (const auto& ch : windows) st.push_back(stitch(ch));

    SpectrumResult r;
    r.averages_low = c.analyzer.spectrum_low.averages;
    r.averages_high = c.analyzer.spectrum_high.averages;
    r.frequency = st[0].frequencies;
    r.rbw = st[0].rbw;
    const auto& sql = st[0].power;
    const auto& dark = st[3].power;
    r.sql_db = normalize_and_subtract(sql, sql, dark).db;
    const auto sq = normalize_and_subtract(st[1].power, sql, dark);
    const auto an = normalize_and_subtract(st[2].power, sql, dark);
    r.squeezed_db = sq.db;
    r.anti_db = an.db;
    r.flagged_bins = sq.flagged.size() + an.flagged.size();

    double sum_sq = 0.0, sum_an = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < r.frequency.size(); ++i) {
        const double f = r.frequency[i];
        if (f < c.analyzer.flat_start || f > c.analyzer.flat_stop) continue;
        bool near_tone = false;
        for (const auto& t : c.noise.tones) near_tone |= std::abs(f - t.frequency) <= 5.0 * r.rbw[i];
        if (near_tone) continue;
        sum_sq += (st[1].power[i] - dark[i]) / (sql[i] - dark[i]);
        sum_an += (st[2].power[i] - dark[i]) / (sql[i] - dark[i]);
        ++count;
    }
    detail::require(count > 0, ErrorKind::inconsistent_data, "flat-region summary band holds no bins");
    r.squeezing_db = to_db(sum_sq / static_cast<double>(count));
    r.anti_squeezing_db = to_db(sum_an / static_cast<double>(count));

    for (const auto& t : c.noise.tones) {
        if (t.frequency < r.frequency.front() || t.frequency > r.frequency.back()) continue;
        const auto it = std::lower_bound(r.frequency.begin(), r.frequency.end(), t.frequency);
        const auto center = static_cast<std::size_t>(it - r.frequency.begin());
        const double bin = r.frequency[std::min(center + 1, r.frequency.size() - 1)] -
                           r.frequency[std::min(center, r.frequency.size() - 2)];
        std::size_t best = center;
        for (std::size_t i = center >= 3 ? center - 3 : 0; i < std::min(center + 4, r.frequency.size()); ++i)
            if (std::isfinite(r.squeezed_db[i]) && (!std::isfinite(r.squeezed_db[best]) ||
                                                   r.squeezed_db[i] > r.squeezed_db[best]))
                best = i;
        r.tones.push_back({t.frequency, r.frequency[best], (r.frequency[best] - t.frequency) / bin,
                           r.squeezed_db[best]});
    }

    std::vector<double> lin_sq(r.frequency.size()), lin_an(r.frequency.size());
    for (std::size_t i = 0; i < r.frequency.size(); ++i) {
        lin_sq[i] = (st[1].power[i] - dark[i]) / (sql[i] - dark[i]);
        lin_an[i] = (st[2].power[i] - dark[i]) / (sql[i] - dark[i]);
    }
    auto [lf, lsq] = log_resample(r.frequency, lin_sq, c.analyzer.log_points_per_decade);
    auto lan = log_resample(r.frequency, lin_an, c.analyzer.log_points_per_decade).second;
    r.log_frequency = lf;
    for (double v : lsq) r.log_squeezed_db.push_back(v > 0.0 ? to_db(v) : std::numeric_limits<double>::quiet_NaN());
    for (double v : lan) r.log_anti_db.push_back(v > 0.0 ? to_db(v) : std::numeric_limits<double>::quiet_NaN());
    return r;
}

// ---- zero-span traces at a low analysis frequency ---------------------------

struct ZeroSpanResult {
    double center = 0.0, rbw = 0.0, vbw = 0.0, sample_rate = 0.0;
    int averages = 0;
    std::vector<double> sql_db, squeezed_db, anti_db;
    double squeezing_db = 0.0;  // mean level, negative below the SQL
    double squeezing_std_db = 0.0;
    double anti_squeezing_db = 0.0;
    double anti_squeezing_std_db = 0.0;
};

inline ZeroSpanSetting zero_span_setting(const ScenarioConfig& c, double center) {
    for (const auto& s : c.analyzer.zero_span.settings)
        if (std::abs(s.center - center) <= 1e-9 * std::max(1.0, center)) return s;
    const double rbw = std::min(30.0, 0.5 * center);
    return {center, rbw, std::min(1.0, rbw)};
}

inline ZeroSpanResult zero_span_scenario(const ScenarioConfig& c, double center) {
    detail::require(center > 0.0 && std::isfinite(center), ErrorKind::parameter_domain, "center must be > 0");
    const auto& z = c.analyzer.zero_span;
    const auto setting = zero_span_setting(c, center);
    const double fs = std::max(z.sample_rate, 4.0 * (center + setting.rbw));
    const auto model = plant_model(c);
    const bool probe = c.spcm.probe_power_nw > 0.0;
    const double settle = zero_span_settling_time(fs, center, setting.rbw, setting.vbw);
    const auto skip = static_cast<std::size_t>(std::ceil(settle * fs));
    const auto keep = static_cast<std::size_t>(std::llround(z.trace_duration * fs));
    const auto root = stream_seed(c.seed, Stream::zero_span, {static_cast<std::uint64_t>(std::llround(center * 1e3))});
    constexpr Channel channels[] = {Channel::sql, Channel::squeezed, Channel::anti, Channel::dark};
    std::vector<RmsAccumulator> acc(4);
    parallel_ordered(
        static_cast<std::size_t>(z.averages) * 4,
        [&](std::size_t job) {
            const auto ch = channels[job % 4];
            const auto seed = derive_seed(root, {static_cast<std::uint64_t>(ch), job / 4});
            const auto trace = zero_span(measure_channel(c, model, ch, fs, skip + keep, probe, seed), center,
                                         setting.rbw, setting.vbw);
            return std::vector<double>(trace.samples.begin() + static_cast<std::ptrdiff_t>(skip), trace.samples.end());
        },
        [&](std::size_t job, std::vector<double>&& trace) { acc[job % 4].add(trace); });
    std::vector<std::vector<double>> avg;
    for (auto& a : acc) avg.push_back(a.result());

    ZeroSpanResult r;
    r.center = center;
    r.rbw = setting.rbw;
    r.vbw = setting.vbw;
    r.sample_rate = fs;
    r.averages = z.averages;
    r.sql_db = normalize_and_subtract(avg[0], avg[0], avg[3]).db;
    r.squeezed_db = normalize_and_subtract(avg[1], avg[0], avg[3]).db;
    r.anti_db = normalize_and_subtract(avg[2], avg[0], avg[3]).db;
    r.squeezing_db = mean_level_db(avg[1], avg[0], avg[3]);
    r.anti_squeezing_db = mean_level_db(avg[2], avg[0], avg[3]);
    r.squeezing_std_db = finite_std(r.squeezed_db);
    r.anti_squeezing_std_db = finite_std(r.anti_db);
    return r;
}

// ---- pump-phase lock demonstration ------------------------------------------

struct LockDemoResult {
    double target = 0.0;
    LockResult lock;
    double bin_width = 0.0;
    std::vector<double> count_rate;     // Hz, per export bin
    std::vector<double> phase_error;    // rad, per export bin
    double pump_power = 0.0;
    double probe_power_nw = 0.0;
};

inline LockDemoResult lock_demo(const ScenarioConfig& c, double target) {
    const bool to_pi = std::abs(detail::wrap(target - std::numbers::pi, 2.0 * std::numbers::pi)) < 1e-9;
    const bool to_zero = std::abs(detail::wrap(target, 2.0 * std::numbers::pi)) < 1e-9;
    detail::require(to_pi || to_zero, ErrorKind::parameter_domain, "lock target must be 0 or pi");
    const auto& point = to_zero ? c.lock_demo.target_zero : c.lock_demo.target_pi;

    SpcmPlant::Config plant;
    plant.params = c.opa;
    plant.params.pump_power = point.pump_power;
    plant.probe_power_nw = point.probe_power_nw;
    plant.spcm = c.spcm.channel;
    plant.calibration = c.spcm.calibration;
    plant.sample_rate = c.locks.pump.sample_rate;

    DitherLoopOptions options;
    options.scan_duration = c.lock_demo.scan_duration;
    const double record = 1000.0;
    options.record_rate = record;
    const auto seed = stream_seed(c.seed, Stream::lock, {to_zero ? 0u : 1u});
    const auto span = static_cast<std::size_t>(std::ceil((c.duration + options.scan_duration + 1.0) * record));
    const auto disturbance = phase_random_walk(record, span, c.locks.pump.disturbance_diffusion, derive_seed(seed, 1));

    LockDemoResult r;
    r.target = to_zero ? 0.0 : std::numbers::pi;
    r.pump_power = point.pump_power;
    r.probe_power_nw = point.probe_power_nw;
    r.lock = sml_lock(plant, c.locks.pump.lockin, c.locks.pump.pid, r.target, &disturbance, c.duration,
                      derive_seed(seed, 2), options);
    const auto factor = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(c.lock_demo.bin_width * r.lock.observable.sample_rate)));
    r.bin_width = static_cast<double>(factor) / r.lock.observable.sample_rate;
    r.count_rate = decimate_mean(r.lock.observable, factor).samples;
    r.phase_error = decimate_mean(r.lock.phase_error_series, factor).samples;
    return r;
}

// ---- fits from tabulated squeezing pairs ------------------------------------

struct LabeledPair {
    std::string label;
    MeasurementPair pair;
};

/// Reads rows `label,squeezing_db,anti_squeezing_db[,frequency_hz]`. Lines starting
/// with '#' and a header row whose second field is not numeric are skipped.
inline std::vector<LabeledPair> parse_pairs_csv(const std::string& text, const std::string& source) {
    std::vector<LabeledPair> rows;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    bool header_allowed = true;
    auto fail = [&](const std::string& what) {
        return Error(ErrorKind::config, source + ":" + std::to_string(line_no) + ": " + what);
    };
    auto number = [&](const std::string& field, const char* name) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(field, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        while (used < field.size() && std::isspace(static_cast<unsigned char>(field[used]))) ++used;
        if (field.empty() || used != field.size() || !std::isfinite(v))
            throw fail(std::string("field ") + name + " is not a finite number: '" + field + "'");
        return v;
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        std::vector<std::string> fields;
        std::stringstream ls(line);
        std::string f;
        while (std::getline(ls, f, ',')) {
            const auto a = f.find_first_not_of(" \t");
            const auto b = f.find_last_not_of(" \t");
            fields.push_back(a == std::string::npos ? "" : f.substr(a, b - a + 1));
        }
        if (!line.empty() && line.back() == ',') fields.emplace_back();
        if (fields.size() != 3 && fields.size() != 4)
            throw fail("expected 3 or 4 fields (label, squeezing_db, anti_squeezing_db[, frequency_hz]), got " +
                       std::to_string(fields.size()));
        if (header_allowed) {
            header_allowed = false;
            char* end = nullptr;
            std::strtod(fields[1].c_str(), &end);
            if (end == fields[1].c_str()) continue;
        }
        LabeledPair row;
        row.label = fields[0];
        row.pair.squeezing_db = number(fields[1], "squeezing_db");
        row.pair.anti_squeezing_db = number(fields[2], "anti_squeezing_db");
        row.pair.frequency = fields.size() == 4 ? number(fields[3], "frequency_hz") : 0.0;
        if (row.pair.frequency < 0.0) throw fail("frequency_hz must be >= 0");
        rows.push_back(row);
    }
    if (rows.empty()) throw Error(ErrorKind::config, source + ": no data rows");
    return rows;
}

struct PairFit {
    LabeledPair row;
    std::optional<OperatingPointFit> operating_point;
    std::string operating_point_error;
    std::optional<PhaseJitterFit> jitter;
    std::string jitter_error;
};

struct FitReport {
    std::string source;
    std::string source_hash;
    std::optional<LabeledPair> ideal;
    std::vector<PairFit> rows;
};

/// The row labelled "ideal" (or the first row) is the jitter-free reference; every other
/// row is fitted for phase jitter against it. Every row gets an operating-point fit.
inline FitReport fit_pairs(const ScenarioConfig& c, const std::string& text, const std::string& source) {
    FitReport report;
    report.source = source;
    std::ostringstream h;
    h << std::hex;
    h.width(16);
    h.fill('0');
    h << fnv1a64(text);
    report.source_hash = h.str();
    const auto rows = parse_pairs_csv(text, source);
    auto ideal = std::find_if(rows.begin(), rows.end(), [](const auto& r) { return r.label == "ideal"; });
    if (ideal == rows.end()) ideal = rows.begin();
    report.ideal = *ideal;
    const double gamma = cavity_decay_rate(c.opa);
    for (auto it = rows.begin(); it != rows.end(); ++it) {
        PairFit fit;
        fit.row = *it;
        try {
            fit.operating_point = fit_opa_operating_point(it->pair, it->pair.frequency / gamma);
        } catch (const Error& e) {
            fit.operating_point_error = e.what();
        }
        if (it != ideal) {
            try {
                fit.jitter = fit_phase_jitter(it->pair, ideal->pair);
            } catch (const Error& e) {
                fit.jitter_error = e.what();
            }
        }
        report.rows.push_back(std::move(fit));
    }
    return report;
}

// ---- long-term hold at a fixed analysis frequency ---------------------------

struct StabilityResult {
    double record_rate = 0.0;
    std::vector<double> squeezing_db;
    StabilityMetrics metrics;
    double mean_squeezing_db = 0.0;
};

namespace detail {
/// Streams `duration` seconds of one channel through a zero-span detector in one-second
/// chunks and returns block means at the record rate after the settling time.
inline std::vector<double> streamed_zero_span(const ScenarioConfig& c, const SqueezerModel& model, Channel ch,
                                              double duration, const TimeSeries* slow_angle, std::uint64_t seed) {
    const auto& s = c.analyzer.stability;
    const double fs = s.sample_rate;
    ZeroSpanDetector det(fs, s.center, s.rbw, s.vbw);
    const auto skip = static_cast<std::size_t>(std::ceil(det.settling_time() * fs));
    const auto block = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(fs / s.record_rate)));
    const auto chunk = static_cast<std::size_t>(std::llround(fs));
    const auto total = skip + static_cast<std::size_t>(std::llround(duration * fs));
    const auto noise = noise_in_band(c.noise, fs);
    const SeriesSampler angle_at(slow_angle);
    std::vector<double> out;
    double acc = 0.0;
    std::size_t in_block = 0;
    for (std::size_t start = 0, index = 0; start < total; start += chunk, ++index) {
        const std::size_t n = std::min(chunk, total - start);
        const auto chunk_seed = derive_seed(seed, index);
        TimeSeries current;
        if (ch == Channel::squeezed) {
            TimeSeries angle(fs, std::max<std::size_t>(n, 2));
            for (std::size_t i = 0; i < angle.size(); ++i)
                angle.samples[i] = angle_at(static_cast<double>(start + i) / fs);
            current = homodyne_measure(noise, model, c.detector, angle, chunk_seed);
        } else {
            current = homodyne_measure(noise, model, c.detector, TimeSeries(fs, std::max<std::size_t>(n, 2)),
                                       chunk_seed, ch == Channel::sql ? HomodyneInput::vacuum : HomodyneInput::blocked);
        }
        for (std::size_t i = 0; i < n; ++i) {
            const double p = det(current.samples[i]);
            if (start + i < skip) continue;
            acc += p;
            if (++in_block == block) {
                out.push_back(acc / static_cast<double>(block));
                acc = 0.0;
                in_block = 0;
            }
        }
    }
    return out;
}
}  // namespace detail

inline StabilityResult stability(const ScenarioConfig& c) {
    const auto& s = c.analyzer.stability;
    const auto model = plant_model(c);
    const bool probe = c.spcm.probe_power_nw > 0.0;
    const auto root = stream_seed(c.seed, Stream::stability);
    const double slow_rate = 1000.0;
    const auto slow_n = static_cast<std::size_t>(std::ceil((s.duration + 10.0) * slow_rate));
    const auto angle = angle_jitter(c, slow_rate, slow_n, probe, derive_seed(root, 9));

    const auto sql = detail::streamed_zero_span(c, model, Channel::sql, s.sql_duration, nullptr, derive_seed(root, 1));
    const auto dark = detail::streamed_zero_span(c, model, Channel::dark, s.sql_duration, nullptr, derive_seed(root, 2));
    const auto sq = detail::streamed_zero_span(c, model, Channel::squeezed, s.duration, &angle, derive_seed(root, 3));
    const double d = mean(dark);
    const double ref = mean(sql) - d;
    detail::require(ref > 0.0, ErrorKind::inconsistent_data, "SQL level is not above the dark level");

    StabilityResult r;
    const auto block = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(s.sample_rate / s.record_rate)));
    r.record_rate = s.sample_rate / static_cast<double>(block);
    double lin = 0.0;
    for (double p : sq) {
        detail::require(p > d, ErrorKind::inconsistent_data, "squeezed level fell below the dark level");
        r.squeezing_db.push_back(to_db((p - d) / ref));
        lin += (p - d) / ref;
    }
    r.metrics = stability_metrics(TimeSeries(r.record_rate, r.squeezing_db));
    r.mean_squeezing_db = to_db(lin / static_cast<double>(sq.size()));
    return r;
}

}  // namespace sqz
