#pragma once

// Acceptance suite: ten named checks, each reporting measured vs expected values.
// Tolerances live in one struct that can be overridden from a JSON document.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sqzlab/analyzer.hpp"
#include "sqzlab/commands.hpp"
#include "sqzlab/config.hpp"
#include "sqzlab/detection.hpp"
#include "sqzlab/inference.hpp"
#include "sqzlab/noise.hpp"
#include "sqzlab/physics.hpp"
#include "sqzlab/random.hpp"
#include "sqzlab/scenarios.hpp"

namespace sqz {

struct Tolerances {
    // 1: closed-form point
    double point_frequency_hz = 5e3;
    double point_min_db = 5.8;
    double point_max_db = 6.2;
    double point_max_seconds = 1e-3;
    // 2: jitter forward mixing
    double forward_jitter_rad = 0.018;
    double forward_expected_db = -5.58;
    double forward_tolerance_db = 0.05;
    double forward_max_seconds = 1e-3;
    // 3: jitter inversion
    double inversion_expected_rad = 0.018;
    double inversion_tolerance_rad = 0.0015;
    double round_trip_tolerance_rad = 1e-4;
    double inversion_max_seconds = 1.0;
    // 4: phase sweep
    double sweep_squeezing_db = -5.70;
    double sweep_anti_squeezing_db = 13.68;
    double sweep_tolerance_db = 0.3;
    double sweep_max_seconds = 60.0;
    // 5: zero span
    double zero_span_high_db = 5.64;
    double zero_span_high_tolerance_db = 0.5;
    double zero_span_low_min_db = 2.4;
    double zero_span_low_max_db = 3.3;
    double zero_span_max_seconds = 300.0;
    // 6: pump-phase lock
    double lock_max_rms_rad = 0.030;
    double lock_max_seconds = 120.0;
    // 7: analyzer oracles
    double parseval_tolerance = 0.01;
    double tone_tolerance_db = 0.1;
    double band_power_tolerance = 0.05;
    double self_normalization_tolerance_db = 1e-12;
    // 8: statistical oracles
    double fano_min = 0.95;
    double fano_max = 1.05;
    double slope_tolerance = 0.15;
    // 9: invariants
    double operating_point_tolerance = 1e-6;
    double trace_preservation_tolerance = 1e-12;
    // 10: stability hold
    double stability_max_std_db = 0.2;
};

template <class V> void visit(V& v, Tolerances& t) {
    v.field("point_frequency_hz", t.point_frequency_hz);
    v.field("point_min_db", t.point_min_db);
    v.field("point_max_db", t.point_max_db);
    v.field("point_max_seconds", t.point_max_seconds);
    v.field("forward_jitter_rad", t.forward_jitter_rad);
    v.field("forward_expected_db", t.forward_expected_db);
    v.field("forward_tolerance_db", t.forward_tolerance_db);
    v.field("forward_max_seconds", t.forward_max_seconds);
    v.field("inversion_expected_rad", t.inversion_expected_rad);
    v.field("inversion_tolerance_rad", t.inversion_tolerance_rad);
    v.field("round_trip_tolerance_rad", t.round_trip_tolerance_rad);
    v.field("inversion_max_seconds", t.inversion_max_seconds);
    v.field("sweep_squeezing_db", t.sweep_squeezing_db);
    v.field("sweep_anti_squeezing_db", t.sweep_anti_squeezing_db);
    v.field("sweep_tolerance_db", t.sweep_tolerance_db);
    v.field("sweep_max_seconds", t.sweep_max_seconds);
    v.field("zero_span_high_db", t.zero_span_high_db);
    v.field("zero_span_high_tolerance_db", t.zero_span_high_tolerance_db);
    v.field("zero_span_low_min_db", t.zero_span_low_min_db);
    v.field("zero_span_low_max_db", t.zero_span_low_max_db);
    v.field("zero_span_max_seconds", t.zero_span_max_seconds);
    v.field("lock_max_rms_rad", t.lock_max_rms_rad);
    v.field("lock_max_seconds", t.lock_max_seconds);
    v.field("parseval_tolerance", t.parseval_tolerance);
    v.field("tone_tolerance_db", t.tone_tolerance_db);
    v.field("band_power_tolerance", t.band_power_tolerance);
    v.field("self_normalization_tolerance_db", t.self_normalization_tolerance_db);
    v.field("fano_min", t.fano_min);
    v.field("fano_max", t.fano_max);
    v.field("slope_tolerance", t.slope_tolerance);
    v.field("operating_point_tolerance", t.operating_point_tolerance);
    v.field("trace_preservation_tolerance", t.trace_preservation_tolerance);
    v.field("stability_max_std_db", t.stability_max_std_db);
}

inline Tolerances tolerances_from_json(const nlohmann::json& document) {
    Tolerances t;
    detail::JsonReader reader(document, "tolerances");
    visit(reader, t);
    reader.finish();
    return t;
}

inline Tolerances load_tolerances(const std::string& path) {
    nlohmann::json document;
    try {
        document = nlohmann::json::parse(read_text(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::config, path + ": " + e.what());
    }
    return tolerances_from_json(document);
}

struct CheckResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string measured;
    std::string expected;
    double seconds = 0.0;
};

namespace detail {

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

/// Median wall time of `repeats` calls, for sub-millisecond budgets.
template <class F> double median_seconds(F&& f, int repeats = 101) {
    std::vector<double> t;
    for (int i = 0; i < repeats; ++i) {
        const auto t0 = Clock::now();
        f();
        t.push_back(seconds_since(t0));
    }
    std::nth_element(t.begin(), t.begin() + repeats / 2, t.end());
    return t[repeats / 2];
}

inline std::string g(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

/// Least-squares slope of log10(psd) vs log10(f) over [lo, hi].
inline double loglog_slope(const PowerSpectrum& s, double lo, double hi) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t n = 0;
    for (std::size_t k = 0; k < s.size(); ++k) {
        const double f = s.frequencies[k];
        if (f < lo || f > hi || s.power[k] <= 0.0) continue;
        const double x = std::log10(f), y = std::log10(s.power[k]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    require(n >= 3, ErrorKind::too_short, "slope fit needs at least 3 bins");
    const double dn = static_cast<double>(n);
    return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

}  // namespace detail

inline CheckResult check_point_spectrum(const ScenarioConfig& c, const Tolerances& t) {
    CheckResult r{1, "closed-form squeezing at 5 kHz"};
    QuadratureVariancePair pair;
    const double sec = detail::median_seconds([&] { pair = squeezing_spectrum(c.opa, c.chain, t.point_frequency_hz); });
    const double mag = -to_db(pair.r_minus);
    r.passed = mag >= t.point_min_db && mag <= t.point_max_db && sec < t.point_max_seconds;
    r.measured = detail::g(mag) + " dB in " + detail::g(sec * 1e6, 3) + " us";
    r.expected = "[" + detail::g(t.point_min_db) + ", " + detail::g(t.point_max_db) + "] dB in < " +
                 detail::g(t.point_max_seconds * 1e3) + " ms";
    r.seconds = sec;
    return r;
}

inline CheckResult check_forward_jitter(const Tolerances& t) {
    CheckResult r{2, "jitter mixing forward"};
    const MeasurementPair ideal{-5.70, 13.68, 0.0};
    QuadratureVariancePair mixed;
    const double sec =
        detail::median_seconds([&] { mixed = apply_phase_jitter(ideal.linear(), PhaseJitter{t.forward_jitter_rad}); });
    const double db = to_db(mixed.r_minus);
    r.passed = std::abs(db - t.forward_expected_db) <= t.forward_tolerance_db && sec < t.forward_max_seconds;
    r.measured = detail::g(db) + " dB in " + detail::g(sec * 1e6, 3) + " us";
    r.expected = detail::g(t.forward_expected_db) + " +/- " + detail::g(t.forward_tolerance_db) + " dB in < " +
                 detail::g(t.forward_max_seconds * 1e3) + " ms";
    r.seconds = sec;
    return r;
}

inline CheckResult check_jitter_inversion(const Tolerances& t) {
    CheckResult r{3, "jitter inversion"};
    const auto t0 = detail::Clock::now();
    const MeasurementPair ideal{-5.70, 13.68, 0.0};
    const auto fit = fit_phase_jitter({-5.57, 13.80, 0.0}, ideal);
    double worst = 0.0;
    for (double theta : {0.0, 0.005, 0.018, 0.05, 0.1}) {
        const auto mixed = apply_phase_jitter(ideal.linear(), PhaseJitter{theta});
        const auto back = fit_phase_jitter({to_db(mixed.r_minus), to_db(mixed.r_plus), 0.0}, ideal);
        worst = std::max(worst, std::abs(back.jitter.rms - theta));
    }
    r.seconds = detail::seconds_since(t0);
    r.passed = std::abs(fit.jitter.rms - t.inversion_expected_rad) <= t.inversion_tolerance_rad &&
               worst <= t.round_trip_tolerance_rad && r.seconds < t.inversion_max_seconds;
    r.measured = detail::g(fit.jitter.rms * 1e3) + " mrad (squeezing alone " + detail::g(fit.from_squeezing * 1e3) +
                 ", anti alone " + detail::g(fit.from_anti_squeezing * 1e3) + "), round-trip error " +
                 detail::g(worst * 1e3, 2) + " mrad";
    r.expected = detail::g(t.inversion_expected_rad * 1e3) + " +/- " + detail::g(t.inversion_tolerance_rad * 1e3) +
                 " mrad, round-trip <= " + detail::g(t.round_trip_tolerance_rad * 1e3) + " mrad";
    return r;
}

inline CheckResult check_sweep(const ScenarioConfig& c, const Tolerances& t) {
    CheckResult r{4, "phase sweep at 5 kHz"};
    const auto t0 = detail::Clock::now();
    const auto s = sweep_phase(c);
    r.seconds = detail::seconds_since(t0);
    r.passed = std::abs(s.squeezing_db - t.sweep_squeezing_db) <= t.sweep_tolerance_db &&
               std::abs(s.anti_squeezing_db - t.sweep_anti_squeezing_db) <= t.sweep_tolerance_db &&
               r.seconds < t.sweep_max_seconds;
    r.measured = detail::g(s.squeezing_db) + " / " + detail::g(s.anti_squeezing_db) + " dB over " +
                 std::to_string(s.averages) + " traces in " + detail::g(r.seconds, 3) + " s";
    r.expected = detail::g(t.sweep_squeezing_db) + " / " + detail::g(t.sweep_anti_squeezing_db) + " +/- " +
                 detail::g(t.sweep_tolerance_db) + " dB in < " + detail::g(t.sweep_max_seconds) + " s";
    return r;
}

inline CheckResult check_zero_span(const ScenarioConfig& c, const Tolerances& t) {
    CheckResult r{5, "zero-span squeezing at 10 Hz and 70 Hz"};
    const auto t0 = detail::Clock::now();
    const auto high = zero_span_scenario(c, 70.0);
    const auto low = zero_span_scenario(c, 10.0);
    r.seconds = detail::seconds_since(t0);
    const double mh = -high.squeezing_db, ml = -low.squeezing_db;
    r.passed = std::abs(mh - t.zero_span_high_db) <= t.zero_span_high_tolerance_db && ml >= t.zero_span_low_min_db &&
               ml <= t.zero_span_low_max_db && ml < mh && r.seconds < t.zero_span_max_seconds;
    r.measured = "70 Hz " + detail::g(mh) + " dB, 10 Hz " + detail::g(ml) + " dB over " +
                 std::to_string(high.averages) + " traces in " + detail::g(r.seconds, 3) + " s";
    r.expected = "70 Hz " + detail::g(t.zero_span_high_db) + " +/- " + detail::g(t.zero_span_high_tolerance_db) +
                 " dB, 10 Hz in [" + detail::g(t.zero_span_low_min_db) + ", " + detail::g(t.zero_span_low_max_db) +
                 "] dB, 10 Hz < 70 Hz, in < " + detail::g(t.zero_span_max_seconds) + " s";
    return r;
}

inline CheckResult check_pump_lock(const ScenarioConfig& c, const Tolerances& t) {
    CheckResult r{6, "pump-phase lock to 0 and pi"};
    const auto t0 = detail::Clock::now();
    const auto zero = lock_demo(c, 0.0);
    const auto pi = lock_demo(c, std::numbers::pi);
    r.seconds = detail::seconds_since(t0);
    ScenarioConfig dark = c;
    dark.lock_demo.target_zero.probe_power_nw = 0.0;
    dark.lock_demo.target_pi.probe_power_nw = 0.0;
    const auto off0 = lock_demo(dark, 0.0);
    const auto offpi = lock_demo(dark, std::numbers::pi);
    auto refused = [](const LockDemoResult& d) {
        return !d.lock.locked && d.lock.diagnostic.find("no fringe") != std::string::npos;
    };
    auto ok = [&](const LockDemoResult& d) { return d.lock.locked && d.lock.rms_error < t.lock_max_rms_rad; };
    r.passed = ok(zero) && ok(pi) && refused(off0) && refused(offpi) && r.seconds < t.lock_max_seconds;
    auto describe = [](const LockDemoResult& d) {
        return std::string(d.lock.locked ? "locked " : "unlocked ") + detail::g(d.lock.rms_error * 1e3, 3) + " mrad";
    };
    r.measured = "target 0 " + describe(zero) + ", target pi " + describe(pi) + " over " + detail::g(c.duration) +
                 " s; probe off: " + (refused(off0) && refused(offpi) ? "refused" : "spurious lock") + "; " +
                 detail::g(r.seconds, 3) + " s";
    r.expected = "both locked, rms < " + detail::g(t.lock_max_rms_rad * 1e3) + " mrad; probe off refused; < " +
                 detail::g(t.lock_max_seconds) + " s";
    return r;
}

inline CheckResult check_analyzer_oracles(const Tolerances& t) {
    CheckResult r{7, "analyzer oracles"};
    const auto t0 = detail::Clock::now();
    const double fs = 10e3;
    const std::size_t n = 1 << 18;
    const auto white = white_noise(fs, n, 1.0, derive_seed(7, 1));
    SpectrumConfig cfg;
    cfg.rbw = 10.0;
    cfg.vbw = cfg.rbw;
    const auto ps = fft_spectrum(white, cfg);
    const double parseval = ps.integrated_power() / variance(white.samples) - 1.0;

    const double s0 = 2.0 / fs;
    double band = 0.0;
    std::size_t bins = 0;
    for (std::size_t k = 0; k < ps.size(); ++k)
        if (ps.frequencies[k] >= 0.1 * fs && ps.frequencies[k] <= 0.4 * fs) {
            band += ps.power[k];
            ++bins;
        }
    const double band_err = band / static_cast<double>(bins) / (s0 * ps.rbw) - 1.0;

    const std::size_t nseg = segment_length_for_rbw(fs, cfg.rbw);
    const double amplitude = 0.7;
    const double f_tone = fs / static_cast<double>(nseg) * 137.0;
    TimeSeries tone(fs, n);
    for (std::size_t i = 0; i < n; ++i)
        tone.samples[i] = amplitude * std::sin(2.0 * std::numbers::pi * f_tone * static_cast<double>(i) / fs);
    const auto tp = fft_spectrum(tone, cfg);
    const double peak = *std::max_element(tp.power.begin(), tp.power.end());
    const double tone_err_db = to_db(peak / (0.5 * amplitude * amplitude));

    std::vector<double> sql(ps.power.begin(), ps.power.end()), dark(sql.size());
    for (std::size_t k = 0; k < sql.size(); ++k) dark[k] = 0.01 * sql[k];
    const auto self = normalize_and_subtract(sql, sql, dark);
    double self_max = 0.0;
    for (double v : self.db) self_max = std::max(self_max, std::abs(v));

    r.seconds = detail::seconds_since(t0);
    r.passed = std::abs(parseval) <= t.parseval_tolerance && std::abs(tone_err_db) <= t.tone_tolerance_db &&
               std::abs(band_err) <= t.band_power_tolerance && self_max <= t.self_normalization_tolerance_db;
    r.measured = "Parseval " + detail::g(parseval * 100, 3) + "%, tone " + detail::g(tone_err_db, 3) + " dB, band " +
                 detail::g(band_err * 100, 3) + "%, SQL self " + detail::g(self_max, 3) + " dB";
    r.expected = "Parseval <= " + detail::g(t.parseval_tolerance * 100) + "%, tone <= " +
                 detail::g(t.tone_tolerance_db) + " dB, band <= " + detail::g(t.band_power_tolerance * 100) +
                 "%, SQL self <= " + detail::g(t.self_normalization_tolerance_db) + " dB";
    return r;
}

inline CheckResult check_statistical_oracles(const Tolerances& t) {
    CheckResult r{8, "statistical oracles"};
    const auto t0 = detail::Clock::now();
    const TimeSeries rate(50.0, std::vector<double>(10000, 1.95e6));
    const auto counts = spcm_counts(rate, derive_seed(8, 1));
    std::vector<double> c(counts.counts.begin(), counts.counts.end());
    const double fano = variance(c) / mean(c);

    std::string slopes;
    bool slopes_ok = true;
    for (double alpha : {1.0, 2.0}) {
        const double fs = 1024.0;
        const auto noise = power_law_noise(fs, std::size_t{1} << 20, alpha, 1.0, derive_seed(8, 2));
        SpectrumConfig cfg;
        cfg.rbw = 1.5 * fs / 8192.0;
        cfg.vbw = cfg.rbw;
        const auto ps = fft_spectrum(noise, cfg);
        const double slope = detail::loglog_slope(ps, 10.0 * ps.bin_width, 0.25 * fs);
        slopes_ok = slopes_ok && std::abs(slope + alpha) <= t.slope_tolerance;
        slopes += (slopes.empty() ? "" : ", ") + std::string("alpha ") + detail::g(alpha) + " -> " + detail::g(-slope);
    }
    r.seconds = detail::seconds_since(t0);
    r.passed = fano >= t.fano_min && fano <= t.fano_max && slopes_ok;
    r.measured = "var/mean " + detail::g(fano) + " over " + std::to_string(c.size()) + " bins; slope " + slopes;
    r.expected = "var/mean in [" + detail::g(t.fano_min) + ", " + detail::g(t.fano_max) + "]; slope within " +
                 detail::g(t.slope_tolerance) + " of alpha";
    return r;
}

/// Small configuration used to check that reruns are byte-identical.
inline ScenarioConfig determinism_config(ScenarioConfig c) {
    c.analyzer.sweep.averages = 2;
    c.analyzer.sweep.trace_duration = 0.2;
    c.analyzer.zero_span.averages = 2;
    c.analyzer.zero_span.trace_duration = 2.0;
    c.duration = 3.0;
    return c;
}

inline std::vector<Artifact> determinism_artifacts(const ScenarioConfig& c) {
    const std::string pairs = "label,squeezing_db,anti_squeezing_db,frequency_hz\nideal,-5.70,13.68,5000\nlocked,-5.57,13.80,5000\n";
    std::vector<Artifact> all;
    for (auto&& out : {cmd_sweep_phase(c), cmd_zero_span(c, 70.0), cmd_lock_demo(c, 0.0), cmd_fit(c, pairs, "pairs.csv")})
        all.insert(all.end(), out.files.begin(), out.files.end());
    return all;
}

inline CheckResult check_invariants(const ScenarioConfig& c, const Tolerances& t) {
    CheckResult r{9, "invariants"};
    const auto t0 = detail::Clock::now();
    auto rng = make_engine(derive_seed(9, 1));
    std::uniform_real_distribution<double> ux(0.0, 0.99), uk(0.01, 1.0), uw(0.0, 5.0), uth(0.0, 0.5);
    double min_product = std::numeric_limits<double>::infinity();
    double max_trace = 0.0, max_op = 0.0;
    std::size_t op_fits = 0;
    for (int i = 0; i < 20000; ++i) {
        const double x = ux(rng), k = uk(rng), w = uw(rng);
        const auto p = squeezing_spectrum(x, k, w);
        min_product = std::min(min_product, p.r_minus * p.r_plus);
        const auto m = apply_phase_jitter(p, PhaseJitter{uth(rng)});
        max_trace = std::max(max_trace, std::abs((m.r_minus + m.r_plus) / (p.r_minus + p.r_plus) - 1.0));
        if (x < 0.02 || x > 0.95 || k < 0.05) continue;
        const auto fit = fit_opa_operating_point({to_db(p.r_minus), to_db(p.r_plus), 0.0}, w);
        max_op = std::max({max_op, std::abs(fit.x - x), std::abs(fit.total_efficiency - k)});
        ++op_fits;
    }
    const auto small = determinism_config(c);
    const auto first = determinism_artifacts(small);
    const auto second = determinism_artifacts(small);
    bool identical = first.size() == second.size();
    for (std::size_t i = 0; identical && i < first.size(); ++i)
        identical = first[i].name == second[i].name && first[i].content == second[i].content;

    r.seconds = detail::seconds_since(t0);
    r.passed = min_product >= 1.0 - 1e-12 && max_trace <= t.trace_preservation_tolerance &&
               max_op <= t.operating_point_tolerance && identical;
    r.measured = "min r-.r+ " + detail::g(min_product, 8) + ", trace drift " + detail::g(max_trace, 2) +
                 ", operating point error " + detail::g(max_op, 2) + " over " + std::to_string(op_fits) +
                 " fits, reruns " + (identical ? "identical" : "differ") + " (" + std::to_string(first.size()) +
                 " files)";
    r.expected = "r-.r+ >= 1, trace drift <= " + detail::g(t.trace_preservation_tolerance) +
                 ", operating point <= " + detail::g(t.operating_point_tolerance) + ", reruns identical";
    return r;
}

inline CheckResult check_stability(const ScenarioConfig& c, const Tolerances& t) {
    CheckResult r{10, "squeezing stability hold"};
    const auto t0 = detail::Clock::now();
    const auto s = stability(c);
    r.seconds = detail::seconds_since(t0);
    r.passed = s.metrics.std_db <= t.stability_max_std_db;
    r.measured = "std " + detail::g(s.metrics.std_db, 3) + " dB, mean " + detail::g(s.mean_squeezing_db) + " dB over " +
                 detail::g(c.analyzer.stability.duration) + " s";
    r.expected = "std <= " + detail::g(t.stability_max_std_db) + " dB";
    return r;
}

inline constexpr int acceptance_count = 10;

/// Runs the selected checks (all when `only` is empty) in order, calling `report`
/// after each one.
inline std::vector<CheckResult> run_acceptance(const ScenarioConfig& c, const Tolerances& t,
                                               const std::set<int>& only = {},
                                               const std::function<void(const CheckResult&)>& report = {}) {
    const std::vector<std::function<CheckResult()>> checks = {
        [&] { return check_point_spectrum(c, t); }, [&] { return check_forward_jitter(t); },
        [&] { return check_jitter_inversion(t); },  [&] { return check_sweep(c, t); },
        [&] { return check_zero_span(c, t); },      [&] { return check_pump_lock(c, t); },
        [&] { return check_analyzer_oracles(t); },  [&] { return check_statistical_oracles(t); },
        [&] { return check_invariants(c, t); },     [&] { return check_stability(c, t); },
    };
    std::vector<CheckResult> results;
    for (int id = 1; id <= acceptance_count; ++id) {
        if (!only.empty() && !only.count(id)) continue;
        CheckResult r;
        try {
            r = checks[static_cast<std::size_t>(id - 1)]();
        } catch (const Error& e) {
            r.id = id;
            r.name = "check " + std::to_string(id);
            r.passed = false;
            r.measured = std::string("error: ") + e.what();
            r.expected = "no error";
        }
        if (report) report(r);
        results.push_back(std::move(r));
    }
    return results;
}

inline std::string format_check(const CheckResult& r) {
    char head[32];
    std::snprintf(head, sizeof head, "[%s] %2d ", r.passed ? "PASS" : "FAIL", r.id);
    return head + r.name + ": measured " + r.measured + "; expected " + r.expected;
}

inline nlohmann::json acceptance_json(const std::vector<CheckResult>& results) {
    nlohmann::json checks = nlohmann::json::array();
    bool all = true;
    for (const auto& r : results) {
        checks.push_back({{"id", r.id}, {"name", r.name}, {"passed", r.passed}, {"measured", r.measured},
                          {"expected", r.expected}});
        all = all && r.passed;
    }
    return {{"passed", all}, {"checks", checks}};
}

}  // namespace sqz
