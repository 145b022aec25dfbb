#pragma once

// Command layer shared by the CLI and the acceptance suite: each command runs a
// scenario and renders its artifacts (CSV traces, JSON summary) as strings.

#include <cmath>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sqzlab/config.hpp"
#include "sqzlab/io.hpp"
#include "sqzlab/scenarios.hpp"

namespace sqz {

struct Artifact {
    std::string name;
    std::string content;
};

struct CommandOutput {
    std::vector<Artifact> files;
    nlohmann::json summary;
};

namespace detail {
inline std::vector<double> time_axis(std::size_t n, double rate, double offset = 0.0) {
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = offset + static_cast<double>(i) / rate;
    return t;
}

inline CommandOutput finish(const std::string& stem, const OutputMeta& meta, const std::vector<std::pair<std::string, Table>>& tables,
                            const nlohmann::json& summary) {
    CommandOutput out;
    for (const auto& [name, table] : tables) out.files.push_back({name, format_csv(table, meta)});
    out.files.push_back({stem + ".json", format_json(summary, meta)});
    out.summary = summary;
    return out;
}
}  // namespace detail

inline CommandOutput cmd_sweep_phase(const ScenarioConfig& c) {
    const auto r = sweep_phase(c);
    const auto& s = c.analyzer.sweep;
    auto meta = make_meta("sweep-phase", c);
    meta.extra = {{"center_hz", format_number(s.center)},
                  {"rbw_hz", format_number(s.rbw)},
                  {"vbw_hz", format_number(s.vbw)},
                  {"averages", std::to_string(s.averages)}};
    Table t;
    t.add("time_s", detail::time_axis(r.sql_db.size(), r.export_rate))
        .add("scan_lo_phase_rad", r.scan_phase)
        .add("sql_db", r.sql_db)
        .add("scanned_db", r.scanned_db)
        .add("squeezed_db", r.squeezed_db)
        .add("anti_squeezed_db", r.anti_db);
    nlohmann::json summary = {{"analysis_frequency_hz", s.center},
                              {"squeezing_db", num(r.squeezing_db)},
                              {"anti_squeezing_db", num(r.anti_squeezing_db)},
                              {"squeezing_trace_std_db", num(r.squeezing_std_db)},
                              {"anti_squeezing_trace_std_db", num(r.anti_squeezing_std_db)},
                              {"scanned_min_db", num(r.scanned_min_db)},
                              {"scanned_max_db", num(r.scanned_max_db)},
                              {"averages", r.averages}};
    return detail::finish("sweep_phase", meta, {{"sweep_phase.csv", t}}, summary);
}

inline CommandOutput cmd_spectrum(const ScenarioConfig& c) {
    const auto r = spectrum(c);
    auto meta = make_meta("spectrum", c);
    const auto& lo = c.analyzer.spectrum_low;
    const auto& hi = c.analyzer.spectrum_high;
    meta.extra = {{"windows", format_number(lo.start) + "-" + format_number(c.analyzer.spectrum_split) + " Hz rbw " +
                                  format_number(lo.rbw) + " vbw " + format_number(lo.vbw) + " x" +
                                  std::to_string(lo.averages) + "; " + format_number(c.analyzer.spectrum_split) +
                                  "-" + format_number(hi.stop) + " Hz rbw " + format_number(hi.rbw) + " vbw " +
                                  format_number(hi.vbw) + " x" + std::to_string(hi.averages)}};
    Table raw;
    raw.add("frequency_hz", r.frequency)
        .add("rbw_hz", r.rbw)
        .add("sql_db", r.sql_db)
        .add("squeezed_db", r.squeezed_db)
        .add("anti_squeezed_db", r.anti_db);
    Table display;
    display.add("frequency_hz", r.log_frequency).add("squeezed_db", r.log_squeezed_db).add("anti_squeezed_db", r.log_anti_db);
    nlohmann::json tones = nlohmann::json::array();
    for (const auto& t : r.tones)
        tones.push_back({{"frequency_hz", t.frequency},
                         {"detected_hz", t.detected_frequency},
                         {"offset_bins", t.offset_bins},
                         {"peak_db", num(t.peak_db)}});
    nlohmann::json summary = {{"flat_band_hz", {c.analyzer.flat_start, c.analyzer.flat_stop}},
                              {"squeezing_db", num(r.squeezing_db)},
                              {"anti_squeezing_db", num(r.anti_squeezing_db)},
                              {"flagged_bins", r.flagged_bins},
                              {"bins", r.frequency.size()},
                              {"tones", tones},
                              {"averages_low", r.averages_low},
                              {"averages_high", r.averages_high}};
    return detail::finish("spectrum", meta, {{"spectrum.csv", raw}, {"spectrum_log.csv", display}}, summary);
}

inline CommandOutput cmd_zero_span(const ScenarioConfig& c, double center) {
    const auto r = zero_span_scenario(c, center);
    auto meta = make_meta("zero-span", c);
    meta.extra = {{"center_hz", format_number(r.center)},
                  {"rbw_hz", format_number(r.rbw)},
                  {"vbw_hz", format_number(r.vbw)},
                  {"averages", std::to_string(r.averages)}};
    Table t;
    t.add("time_s", detail::time_axis(r.sql_db.size(), r.sample_rate))
        .add("sql_db", r.sql_db)
        .add("squeezed_db", r.squeezed_db)
        .add("anti_squeezed_db", r.anti_db);
    nlohmann::json summary = {{"center_hz", r.center},
                              {"rbw_hz", r.rbw},
                              {"vbw_hz", r.vbw},
                              {"averages", r.averages},
                              {"squeezing_db", num(r.squeezing_db)},
                              {"squeezing_std_db", num(r.squeezing_std_db)},
                              {"anti_squeezing_db", num(r.anti_squeezing_db)},
                              {"anti_squeezing_std_db", num(r.anti_squeezing_std_db)}};
    const std::string stem = "zero_span_" + format_number(r.center) + "hz";
    return detail::finish(stem, meta, {{stem + ".csv", t}}, summary);
}

inline nlohmann::json lock_result_json(const LockResult& r) {
    return {{"locked", r.locked},
            {"rms_error_rad", num(r.rms_error)},
            {"acquisition_time_s", num(r.acquisition_time)},
            {"lock_start_time_s", num(r.lock_start_time)},
            {"fringe_amplitude", num(r.fringe_amplitude)},
            {"fringe_significance", num(r.fringe_significance)},
            {"mean_error_signal", num(r.mean_error_signal)},
            {"target_phase_rad", num(r.target_phase)},
            {"diagnostic", r.diagnostic}};
}

inline CommandOutput cmd_lock_demo(const ScenarioConfig& c, double target) {
    const auto r = lock_demo(c, target);
    auto meta = make_meta("lock-demo", c);
    const std::string tag = r.target == 0.0 ? "0" : "pi";
    meta.extra = {{"target", tag}, {"bin_width_s", format_number(r.bin_width)}};
    Table t;
    t.add("time_s", detail::time_axis(r.count_rate.size(), 1.0 / r.bin_width, 0.5 * r.bin_width))
        .add("count_rate_hz", r.count_rate)
        .add("phase_error_rad", r.phase_error);
    nlohmann::json summary = lock_result_json(r.lock);
    summary["target"] = tag;
    summary["pump_power_mw"] = r.pump_power;
    summary["probe_power_nw"] = r.probe_power_nw;
    summary["lock_duration_s"] = c.duration;
    const std::string stem = "lock_demo_" + tag;
    return detail::finish(stem, meta, {{stem + ".csv", t}}, summary);
}

inline CommandOutput cmd_fit(const ScenarioConfig& c, const std::string& text, const std::string& source) {
    const auto report = fit_pairs(c, text, source);
    auto meta = make_meta("fit", c);
    auto pair_json = [](const LabeledPair& p) {
        return nlohmann::json{{"label", p.label},
                              {"squeezing_db", p.pair.squeezing_db},
                              {"anti_squeezing_db", p.pair.anti_squeezing_db},
                              {"frequency_hz", p.pair.frequency}};
    };
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& f : report.rows) {
        auto row = pair_json(f.row);
        if (f.operating_point)
            row["operating_point"] = {{"x", num(f.operating_point->x)},
                                      {"total_efficiency", num(f.operating_point->total_efficiency)},
                                      {"efficiency_determined", f.operating_point->efficiency_determined}};
        else
            row["operating_point"] = {{"error", f.operating_point_error}};
        if (f.jitter)
            row["phase_jitter"] = {{"joint_rad", num(f.jitter->jitter.rms)},
                                   {"from_squeezing_rad", num(f.jitter->from_squeezing)},
                                   {"from_anti_squeezing_rad", num(f.jitter->from_anti_squeezing)},
                                   {"residual_db", num(f.jitter->residual_db)}};
        else if (!f.jitter_error.empty())
            row["phase_jitter"] = {{"error", f.jitter_error}};
        rows.push_back(row);
    }
    nlohmann::json summary = {{"input", {{"path", report.source}, {"fnv1a64", report.source_hash}, {"rows", rows.size()}}},
                              {"reference", pair_json(*report.ideal)},
                              {"rows", rows}};
    return detail::finish("fit", meta, {}, summary);
}

inline CommandOutput cmd_stability(const ScenarioConfig& c) {
    const auto r = stability(c);
    const auto& s = c.analyzer.stability;
    auto meta = make_meta("stability", c);
    meta.extra = {{"center_hz", format_number(s.center)},
                  {"rbw_hz", format_number(s.rbw)},
                  {"vbw_hz", format_number(s.vbw)},
                  {"duration_s", format_number(s.duration)}};
    Table t;
    t.add("time_s", detail::time_axis(r.squeezing_db.size(), r.record_rate)).add("squeezing_db", r.squeezing_db);
    nlohmann::json summary = {{"center_hz", s.center},
                              {"duration_s", s.duration},
                              {"mean_squeezing_db", num(r.mean_squeezing_db)},
                              {"std_db", num(r.metrics.std_db)},
                              {"peak_to_peak_db", num(r.metrics.peak_to_peak_db)},
                              {"drift_db_per_hour", num(r.metrics.drift_db_per_hour)}};
    return detail::finish("stability", meta, {{"stability.csv", t}}, summary);
}

}  // namespace sqz
