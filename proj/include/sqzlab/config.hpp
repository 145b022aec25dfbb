#pragma once

// Scenario configuration: one JSON document with nested sections. Every section is
// described once by a field visitor, which drives defaults, strict parsing with
// field-path errors, canonical serialization and the configuration hash.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "sqzlab/analyzer.hpp"
#include "sqzlab/detection.hpp"
#include "sqzlab/error.hpp"
#include "sqzlab/locking.hpp"
#include "sqzlab/noise.hpp"
#include "sqzlab/physics.hpp"

namespace sqz {

using json = nlohmann::json;

inline constexpr const char* tool_version = "0.1.0";

/// How the homodyne plant's operating point is obtained.
struct PlantCalibration {
    // "measured_pair": (x, K) fitted from a measured squeezing pair at the reference pump;
    // "first_principles": (x, K) from the cavity and detection-chain parameters.
    std::string mode = "measured_pair";
    double squeezing_db = -5.70;
    double anti_squeezing_db = 13.68;
    double frequency = 5.0e3;  // Hz
    double reference_pump_power = 100.0;  // mW
};

struct LoLockSection {
    LockInConfig lockin{34.0e3, 0.023, 0.0, 300.0, 2};
    PidConfig pid{0.0, 6.0, 0.0, -1, 10.0};
    double disturbance_diffusion = 0.0;  // rad^2/s
    double residual_jitter_rms = 0.003;  // rad, applied to homodyne scenarios
    double jitter_corner = 1.0;          // Hz
    double sample_rate = 1.0e6;
    double analysis_frequency = 200.0e3;
    double analysis_bandwidth = 100.0e3;
};

struct PumpLockSection {
    LockInConfig lockin{33.5e3, 0.045, 0.0, 100.0, 2};
    PidConfig pid{0.0, 0.08, 0.0, 1, 10.0};
    double disturbance_diffusion = 3.0e-5;  // rad^2/s
    double residual_jitter_rms = 0.018;     // rad, applied when the probe is seeded
    double jitter_corner = 1.0;             // Hz
    double sample_rate = 500.0e3;
};

struct LocksSection {
    LoLockSection lo;
    PumpLockSection pump;
};

/// Pump and probe settings of one lock-demo target.
struct LockTargetPoint {
    double pump_power = 100.0;  // mW
    double probe_power_nw = 3.0;
};

struct LockDemoSection {
    LockTargetPoint target_zero{100.0, 3.0};
    LockTargetPoint target_pi{90.0, 4.5};
    double scan_duration = 2.0;  // s
    double bin_width = 0.020;    // s, count-rate export
};

struct SweepSection {
    double sample_rate = 50.0e3;
    double center = 5.0e3;
    double rbw = 2.0e3;
    double vbw = 30.0;
    int averages = 10;
    double trace_duration = 1.0;  // s
    double scan_periods = 2.0;    // LO fringe periods across the scanned trace
    double export_rate = 1.0e3;   // Hz
};

struct FftWindow {
    double sample_rate = 4.0e3;
    double rbw = 1.0;
    double vbw = 1.0;
    double start = 10.0;
    double stop = 1.0e3;
    int averages = 200;
};

struct ZeroSpanSetting {
    double center = 10.0;
    double rbw = 5.0;
    double vbw = 1.0;
};

struct ZeroSpanSection {
    double sample_rate = 500.0;
    double trace_duration = 10.0;  // s, after settling
    int averages = 400;
    std::vector<ZeroSpanSetting> settings{{10.0, 5.0, 1.0}, {70.0, 30.0, 1.0}};
};

struct StabilitySection {
    double sample_rate = 30.0e3;
    double center = 10.0e3;
    double rbw = 3.0e3;
    double vbw = 1.0;
    double duration = 600.0;      // s
    double record_rate = 1.0;     // Hz
    double sql_duration = 20.0;   // s of SQL and dark reference
};

struct AnalyzerSection {
    SweepSection sweep;
    FftWindow spectrum_low{4.0e3, 1.0, 1.0, 10.0, 1.0e3, 200};
    FftWindow spectrum_high{800.0e3, 2.0, 2.0, 1.0e3, 300.0e3, 100};
    double spectrum_split = 1.0e3;  // Hz
    double flat_start = 1.0e3;      // Hz, flat-region summary band
    double flat_stop = 30.0e3;
    int log_points_per_decade = 200;
    ZeroSpanSection zero_span;
    StabilitySection stability;
};

struct SpcmSection {
    SpcmChannel channel;
    CountRateCalibration calibration;
    double probe_power_nw = 3.0;
};

struct ScenarioConfig {
    OpaParams opa;
    DetectionChain chain;
    HomodyneDetector detector;
    SpcmSection spcm;
    NoiseScenario noise = default_noise();
    PlantCalibration plant;
    LocksSection locks;
    LockDemoSection lock_demo;
    AnalyzerSection analyzer;
    std::uint64_t seed = 20240611;
    double duration = 100.0;  // s, lock runs

    static NoiseScenario default_noise() {
        NoiseScenario n;
        n.shot_level = 1.0;
        n.technical_noise = {true, 10.0, 2.0, 1.39e5};
        n.tones = {{25.0, 0.5}, {30.0, 0.4}, {50.0, 0.5}, {160.0, 0.5}, {34.0e3, 4.0}, {238.0e3, 3.0}};
        n.seed = 0;
        return n;
    }
};

// ---- field visitors -------------------------------------------------------

template <class V> void visit(V& v, OpaParams& p) {
    v.field("output_coupler_T", p.output_coupler_T);
    v.field("intracavity_loss_L", p.intracavity_loss_L);
    v.field("round_trip_length", p.round_trip_length);
    v.field("pump_power", p.pump_power);
    v.field("threshold_power", p.threshold_power);
    v.field("wavelength", p.wavelength);
}

template <class V> void visit(V& v, DetectionChain& c) {
    v.field("quantum_efficiency", c.quantum_efficiency);
    v.field("visibility", c.visibility);
    v.field("propagation_efficiency", c.propagation_efficiency);
}

template <class V> void visit(V& v, HomodyneDetector& d) {
    v.field("lo_power", d.lo_power);
    v.field("cmrr_db", d.cmrr_db);
    v.field("cmrr_table", d.cmrr_table);
    v.field("dark_enabled", d.dark_enabled);
    v.field("dark_db_at_10hz", d.dark_db_at_10hz);
    v.field("dark_db_above_100hz", d.dark_db_above_100hz);
}

template <class V> void visit(V& v, SpcmSection& s) {
    v.field("background_rate", s.channel.background_rate);
    v.field("etalon_transmission", s.channel.etalon_transmission);
    v.field("bin_width", s.channel.bin_width);
    v.field("probe_power_nw", s.probe_power_nw);
    v.field("pump_only_rate", s.calibration.pump_only_rate);
    v.field("reference_pump_power", s.calibration.reference_pump_power);
    v.field("reference_threshold", s.calibration.reference_threshold);
    v.field("probe_rate_per_nw", s.calibration.probe_rate_per_nw);
}

template <class V> void visit(V& v, TechnicalNoise& t) {
    v.field("enabled", t.enabled);
    v.field("corner_frequency", t.corner_frequency);
    v.field("slope_alpha", t.slope_alpha);
    v.field("level_at_corner", t.level_at_corner);
}

template <class V> void visit(V& v, Tone& t) {
    v.field("frequency", t.frequency);
    v.field("amplitude", t.amplitude);
}

template <class V> void visit(V& v, NoiseScenario& n) {
    v.field("shot_level", n.shot_level);
    v.object("technical_noise", n.technical_noise);
    v.field("tones", n.tones);
}

template <class V> void visit(V& v, PlantCalibration& p) {
    v.field("mode", p.mode);
    v.field("squeezing_db", p.squeezing_db);
    v.field("anti_squeezing_db", p.anti_squeezing_db);
    v.field("frequency", p.frequency);
    v.field("reference_pump_power", p.reference_pump_power);
}

template <class V> void visit(V& v, LockInConfig& c) {
    v.field("mod_frequency", c.mod_frequency);
    v.field("mod_amplitude", c.mod_amplitude);
    v.field("demod_phase", c.demod_phase);
    v.field("lpf_cutoff", c.lpf_cutoff);
    v.field("lpf_order", c.lpf_order);
}

template <class V> void visit(V& v, PidConfig& c) {
    v.field("kp", c.kp);
    v.field("ki", c.ki);
    v.field("kd", c.kd);
    v.field("sign", c.sign);
    v.field("output_limit", c.output_limit);
}

template <class V> void visit(V& v, LoLockSection& s) {
    v.object("lockin", s.lockin);
    v.object("pid", s.pid);
    v.field("disturbance_diffusion", s.disturbance_diffusion);
    v.field("residual_jitter_rms", s.residual_jitter_rms);
    v.field("jitter_corner", s.jitter_corner);
    v.field("sample_rate", s.sample_rate);
    v.field("analysis_frequency", s.analysis_frequency);
    v.field("analysis_bandwidth", s.analysis_bandwidth);
}

template <class V> void visit(V& v, PumpLockSection& s) {
    v.object("lockin", s.lockin);
    v.object("pid", s.pid);
    v.field("disturbance_diffusion", s.disturbance_diffusion);
    v.field("residual_jitter_rms", s.residual_jitter_rms);
    v.field("jitter_corner", s.jitter_corner);
    v.field("sample_rate", s.sample_rate);
}

template <class V> void visit(V& v, LocksSection& s) {
    v.object("lo", s.lo);
    v.object("pump", s.pump);
}

template <class V> void visit(V& v, LockTargetPoint& p) {
    v.field("pump_power", p.pump_power);
    v.field("probe_power_nw", p.probe_power_nw);
}

template <class V> void visit(V& v, LockDemoSection& s) {
    v.object("target_zero", s.target_zero);
    v.object("target_pi", s.target_pi);
    v.field("scan_duration", s.scan_duration);
    v.field("bin_width", s.bin_width);
}

template <class V> void visit(V& v, SweepSection& s) {
    v.field("sample_rate", s.sample_rate);
    v.field("center", s.center);
    v.field("rbw", s.rbw);
    v.field("vbw", s.vbw);
    v.field("averages", s.averages);
    v.field("trace_duration", s.trace_duration);
    v.field("scan_periods", s.scan_periods);
    v.field("export_rate", s.export_rate);
}

template <class V> void visit(V& v, FftWindow& w) {
    v.field("sample_rate", w.sample_rate);
    v.field("rbw", w.rbw);
    v.field("vbw", w.vbw);
    v.field("start", w.start);
    v.field("stop", w.stop);
    v.field("averages", w.averages);
}

template <class V> void visit(V& v, ZeroSpanSetting& s) {
    v.field("center", s.center);
    v.field("rbw", s.rbw);
    v.field("vbw", s.vbw);
}

template <class V> void visit(V& v, ZeroSpanSection& s) {
    v.field("sample_rate", s.sample_rate);
    v.field("trace_duration", s.trace_duration);
    v.field("averages", s.averages);
    v.field("settings", s.settings);
}

template <class V> void visit(V& v, StabilitySection& s) {
    v.field("sample_rate", s.sample_rate);
    v.field("center", s.center);
    v.field("rbw", s.rbw);
    v.field("vbw", s.vbw);
    v.field("duration", s.duration);
    v.field("record_rate", s.record_rate);
    v.field("sql_duration", s.sql_duration);
}

template <class V> void visit(V& v, AnalyzerSection& a) {
    v.object("sweep", a.sweep);
    v.object("spectrum_low", a.spectrum_low);
    v.object("spectrum_high", a.spectrum_high);
    v.field("spectrum_split", a.spectrum_split);
    v.field("flat_start", a.flat_start);
    v.field("flat_stop", a.flat_stop);
    v.field("log_points_per_decade", a.log_points_per_decade);
    v.object("zero_span", a.zero_span);
    v.object("stability", a.stability);
}

template <class V> void visit(V& v, ScenarioConfig& c) {
    v.object("opa", c.opa);
    v.object("chain", c.chain);
    v.object("detector", c.detector);
    v.object("spcm", c.spcm);
    v.object("noise", c.noise);
    v.object("plant", c.plant);
    v.object("locks", c.locks);
    v.object("lock_demo", c.lock_demo);
    v.object("analyzer", c.analyzer);
    v.field("seed", c.seed);
    v.field("duration", c.duration);
}

namespace detail {

inline Error config_error(const std::string& path, const std::string& what) {
    return Error(ErrorKind::config, path + ": " + what);
}

class JsonReader {
public:
    JsonReader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
        if (!node_.is_object()) throw config_error(path_.empty() ? "<root>" : path_, "expected an object");
    }

    template <class T> void field(const char* key, T& value) {
        seen_.insert(key);
        if (!node_.contains(key)) return;
        read(node_.at(key), join(key), value);
    }

    template <class T> void object(const char* key, T& value) {
        seen_.insert(key);
        if (!node_.contains(key)) return;
        JsonReader sub(node_.at(key), join(key));
        visit(sub, value);
        sub.finish();
    }

    void finish() const {
        for (const auto& item : node_.items())
            if (!seen_.count(item.key())) throw config_error(join(item.key()), "unknown field");
    }

private:
    std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    static void read(const json& j, const std::string& path, double& out) {
        if (!j.is_number()) throw config_error(path, "expected a number");
        out = j.get<double>();
        if (!std::isfinite(out)) throw config_error(path, "must be finite");
    }
    static void read(const json& j, const std::string& path, int& out) {
        if (!j.is_number_integer()) throw config_error(path, "expected an integer");
        out = j.get<int>();
    }
    static void read(const json& j, const std::string& path, std::uint64_t& out) {
        if (!j.is_number_unsigned()) throw config_error(path, "expected a non-negative integer");
        out = j.get<std::uint64_t>();
    }
    static void read(const json& j, const std::string& path, bool& out) {
        if (!j.is_boolean()) throw config_error(path, "expected true or false");
        out = j.get<bool>();
    }
    static void read(const json& j, const std::string& path, std::string& out) {
        if (!j.is_string()) throw config_error(path, "expected a string");
        out = j.get<std::string>();
    }
    static void read(const json& j, const std::string& path, std::vector<std::pair<double, double>>& out) {
        if (!j.is_array()) throw config_error(path, "expected an array of [frequency, value] pairs");
        out.clear();
        for (std::size_t i = 0; i < j.size(); ++i) {
            const auto& e = j[i];
            const std::string p = path + "[" + std::to_string(i) + "]";
            if (!e.is_array() || e.size() != 2) throw config_error(p, "expected [frequency, value]");
            std::pair<double, double> v;
            read(e[0], p, v.first);
            read(e[1], p, v.second);
            out.push_back(v);
        }
    }
    template <class T> static void read(const json& j, const std::string& path, std::vector<T>& out) {
        if (!j.is_array()) throw config_error(path, "expected an array");
        out.clear();
        for (std::size_t i = 0; i < j.size(); ++i) {
            JsonReader sub(j[i], path + "[" + std::to_string(i) + "]");
            T item{};
            visit(sub, item);
            sub.finish();
            out.push_back(item);
        }
    }

    const json& node_;
    std::string path_;
    std::set<std::string> seen_;
};

class JsonWriter {
public:
    json out = json::object();

    template <class T> void field(const char* key, const T& value) { out[key] = write(value); }

    template <class T> void object(const char* key, T& value) {
        JsonWriter sub;
        visit(sub, value);
        out[key] = std::move(sub.out);
    }

private:
    template <class T> static json write(const T& value) { return json(value); }
    static json write(const std::vector<std::pair<double, double>>& v) {
        json a = json::array();
        for (const auto& [f, db] : v) a.push_back({f, db});
        return a;
    }
    template <class T> static json write(const std::vector<T>& v) {
        json a = json::array();
        for (auto item : v) {
            JsonWriter sub;
            visit(sub, item);
            a.push_back(std::move(sub.out));
        }
        return a;
    }
};

template <class F> void with_path(const std::string& path, F&& check) {
    try {
        check();
    } catch (const Error& e) {
        throw Error(e.kind(), path + ": " + e.what());
    }
}

}  // namespace detail

inline json to_json(const ScenarioConfig& config) {
    detail::JsonWriter w;
    auto copy = config;
    visit(w, copy);
    return w.out;
}

/// Checks every physical invariant, reporting the offending section path.
inline void validate(const ScenarioConfig& c) {
    using detail::require;
    using detail::with_path;
    with_path("opa", [&] { validate(c.opa); });
    with_path("chain", [&] { validate(c.chain); });
    with_path("detector", [&] { validate(c.detector); });
    with_path("spcm", [&] {
        validate(c.spcm.channel);
        require(c.spcm.probe_power_nw >= 0.0, ErrorKind::parameter_domain, "probe_power_nw must be >= 0");
        require(c.spcm.calibration.pump_only_rate > c.spcm.channel.background_rate, ErrorKind::parameter_domain,
                "pump_only_rate must exceed background_rate");
        require(c.spcm.calibration.reference_pump_power > 0.0 &&
                    c.spcm.calibration.reference_pump_power < c.spcm.calibration.reference_threshold,
                ErrorKind::parameter_domain, "reference pump must lie in (0, reference_threshold)");
        require(c.spcm.calibration.probe_rate_per_nw >= 0.0, ErrorKind::parameter_domain,
                "probe_rate_per_nw must be >= 0");
    });
    with_path("noise", [&] {
        validate(c.noise);
        require(c.noise.shot_level > 0.0, ErrorKind::parameter_domain, "shot_level must be > 0");
    });
    with_path("plant", [&] {
        require(c.plant.mode == "measured_pair" || c.plant.mode == "first_principles", ErrorKind::parameter_domain,
                "mode must be \"measured_pair\" or \"first_principles\"");
        require(c.plant.frequency >= 0.0 && c.plant.reference_pump_power > 0.0, ErrorKind::parameter_domain,
                "frequency must be >= 0 and reference_pump_power > 0");
    });
    with_path("locks.lo", [&] {
        validate(c.locks.lo.lockin);
        validate(c.locks.lo.pid);
        require(c.locks.lo.disturbance_diffusion >= 0.0 && c.locks.lo.residual_jitter_rms >= 0.0 &&
                    c.locks.lo.jitter_corner > 0.0,
                ErrorKind::parameter_domain, "diffusion and jitter must be >= 0, jitter_corner > 0");
        require(c.locks.lo.analysis_frequency + 0.5 * c.locks.lo.analysis_bandwidth < 0.5 * c.locks.lo.sample_rate,
                ErrorKind::parameter_domain, "analysis band must lie below Nyquist");
    });
    with_path("locks.pump", [&] {
        validate(c.locks.pump.lockin);
        validate(c.locks.pump.pid);
        require(c.locks.pump.disturbance_diffusion >= 0.0 && c.locks.pump.residual_jitter_rms >= 0.0 &&
                    c.locks.pump.jitter_corner > 0.0,
                ErrorKind::parameter_domain, "diffusion and jitter must be >= 0, jitter_corner > 0");
        require(c.locks.pump.lockin.mod_frequency < 0.5 * c.locks.pump.sample_rate, ErrorKind::parameter_domain,
                "mod_frequency must lie below Nyquist");
    });
    with_path("lock_demo", [&] {
        for (const auto* p : {&c.lock_demo.target_zero, &c.lock_demo.target_pi}) {
            require(p->pump_power >= 0.0 && p->pump_power < c.opa.threshold_power, ErrorKind::above_threshold,
                    "pump_power must lie in [0, opa.threshold_power)");
            require(p->probe_power_nw >= 0.0, ErrorKind::parameter_domain, "probe_power_nw must be >= 0");
        }
        require(c.lock_demo.scan_duration > 0.0 && c.lock_demo.bin_width > 0.0, ErrorKind::parameter_domain,
                "scan_duration and bin_width must be > 0");
    });
    with_path("analyzer.sweep", [&] {
        const auto& s = c.analyzer.sweep;
        require(s.averages >= 1 && s.trace_duration > 0.0 && s.export_rate > 0.0 && s.scan_periods >= 0.0,
                ErrorKind::parameter_domain, "averages >= 1, trace_duration > 0, export_rate > 0 required");
        require(s.vbw > 0.0 && s.vbw <= s.rbw, ErrorKind::parameter_domain, "need 0 < vbw <= rbw");
        require(s.center + 0.5 * s.rbw < 0.5 * s.sample_rate, ErrorKind::parameter_domain,
                "center + rbw/2 must lie below Nyquist");
    });
    for (const auto* w : {&c.analyzer.spectrum_low, &c.analyzer.spectrum_high}) {
        with_path(w == &c.analyzer.spectrum_low ? "analyzer.spectrum_low" : "analyzer.spectrum_high", [&] {
            require(w->rbw > 0.0 && w->vbw > 0.0 && w->averages >= 1, ErrorKind::parameter_domain,
                    "rbw, vbw > 0 and averages >= 1 required");
            require(w->start >= 0.0 && w->start < w->stop && w->stop <= 0.5 * w->sample_rate,
                    ErrorKind::parameter_domain, "need 0 <= start < stop <= Nyquist");
        });
    }
    with_path("analyzer", [&] {
        const auto& a = c.analyzer;
        require(a.flat_start < a.flat_stop && a.log_points_per_decade >= 1, ErrorKind::parameter_domain,
                "need flat_start < flat_stop and log_points_per_decade >= 1");
    });
    with_path("analyzer.zero_span", [&] {
        const auto& z = c.analyzer.zero_span;
        require(z.averages >= 1 && z.trace_duration > 0.0 && z.sample_rate > 0.0, ErrorKind::parameter_domain,
                "averages >= 1, trace_duration > 0 and sample_rate > 0 required");
        for (const auto& s : z.settings)
            require(s.center > 0.0 && s.rbw > 0.0 && s.vbw > 0.0 && s.vbw <= s.rbw, ErrorKind::parameter_domain,
                    "settings need center > 0 and 0 < vbw <= rbw");
    });
    with_path("analyzer.stability", [&] {
        const auto& s = c.analyzer.stability;
        require(s.vbw > 0.0 && s.vbw <= s.rbw, ErrorKind::parameter_domain, "need 0 < vbw <= rbw");
        require(s.center + 0.5 * s.rbw < 0.5 * s.sample_rate, ErrorKind::parameter_domain,
                "center + rbw/2 must lie below Nyquist");
        require(s.duration > 0.0 && s.record_rate > 0.0 && s.sql_duration > 0.0, ErrorKind::parameter_domain,
                "duration, record_rate and sql_duration must be > 0");
        require(s.duration * s.record_rate >= 10.0, ErrorKind::too_short, "stability run needs >= 10 records");
    });
    with_path("duration", [&] {
        require(c.duration > 0.0, ErrorKind::parameter_domain, "must be > 0");
    });
}

/// Parses a configuration document over the defaults. Unknown fields are rejected.
inline ScenarioConfig config_from_json(const json& document) {
    ScenarioConfig config;
    detail::JsonReader reader(document, "");
    visit(reader, config);
    reader.finish();
    validate(config);
    return config;
}

inline ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::io, "cannot open config file " + path);
    json document;
    try {
        document = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::config, path + ": " + e.what());
    }
    return config_from_json(document);
}

/// Multiplies run durations and trace counts by `factor` (counts never drop below 1).
inline void apply_scale(ScenarioConfig& c, double factor) {
    detail::require(factor > 0.0 && std::isfinite(factor), ErrorKind::config, "scale: must be > 0");
    auto count = [&](int& n) { n = std::max(1, static_cast<int>(std::lround(n * factor))); };
    c.duration *= factor;
    c.analyzer.stability.duration *= factor;
    count(c.analyzer.sweep.averages);
    count(c.analyzer.spectrum_low.averages);
    count(c.analyzer.spectrum_high.averages);
    count(c.analyzer.zero_span.averages);
}

inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Hash of the canonical effective configuration, seed excluded.
inline std::string config_hash(const ScenarioConfig& config) {
    json j = to_json(config);
    j.erase("seed");
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << fnv1a64(j.dump());
    return os.str();
}

}  // namespace sqz
