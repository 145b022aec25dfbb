#pragma once

// Spectrum-analyzer emulation. FFT mode is a Welch estimate whose window ENBW
// equals the RBW; zero-span mode is a swept-analyzer style chain (mixer, RBW
// filter, power detector, VBW filter). Power is reported as power in the RBW,
// so a tone of rms amplitude a reads a^2 and white noise of PSD S0 reads S0*RBW.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "sqzlab/error.hpp"
#include "sqzlab/fft.hpp"
#include "sqzlab/filters.hpp"
#include "sqzlab/timeseries.hpp"

namespace sqz {

enum class AnalyzerMode { fft, zero_span };

struct SpectrumConfig {
    AnalyzerMode mode = AnalyzerMode::fft;
    double rbw = 1.0;  // Hz
    double vbw = 1.0;  // Hz
    double center = 0.0;  // zero-span center, Hz
    double start = 0.0;   // fft range, Hz
    double stop = 0.0;    // fft range, Hz; 0 means Nyquist
    int averages = 1;
};

inline void validate(const SpectrumConfig& c) {
    using detail::require;
    require(c.rbw > 0.0, ErrorKind::parameter_domain, "rbw must be > 0");
    require(c.vbw > 0.0 && c.vbw <= c.rbw, ErrorKind::parameter_domain, "vbw must lie in (0, rbw]");
    require(c.averages >= 1, ErrorKind::parameter_domain, "averages must be >= 1");
    require(c.start >= 0.0 && (c.stop == 0.0 || c.stop > c.start), ErrorKind::parameter_domain,
            "fft range must satisfy 0 <= start < stop");
}

struct PowerSpectrum {
    std::vector<double> frequencies;  // Hz, strictly increasing
    std::vector<double> power;        // linear power in the RBW
    double rbw = 0.0;
    double vbw = 0.0;
    double bin_width = 0.0;
    int n_averages = 0;

    std::size_t size() const noexcept { return power.size(); }
    double psd(std::size_t i) const { return power[i] / rbw; }
    /// Sum of PSD * bin width, i.e. the variance the trace accounts for.
    double integrated_power() const {
        double acc = 0.0;
        for (double p : power) acc += p;
        return acc * bin_width / rbw;
    }
};

/// Hann (periodic) window ENBW in bins.
inline constexpr double hann_enbw_bins = 1.5;

inline std::size_t segment_length_for_rbw(double sample_rate, double rbw) {
    return static_cast<std::size_t>(std::llround(hann_enbw_bins * sample_rate / rbw));
}

namespace detail {
inline std::vector<double> moving_average(const std::vector<double>& v, std::size_t width) {
    if (width <= 1 || v.size() < 2) return v;
    const std::size_t half = width / 2;
    std::vector<double> prefix(v.size() + 1, 0.0);
    for (std::size_t i = 0; i < v.size(); ++i) prefix[i + 1] = prefix[i] + v[i];
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const std::size_t lo = i >= half ? i - half : 0;
        const std::size_t hi = std::min(v.size(), i + half + 1);
        out[i] = (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
    }
    return out;
}
}  // namespace detail

/// Welch-averaged one-sided spectrum, Hann window with 50% overlap and per-segment
/// mean removal. VBW < RBW smooths the trace with a moving average over rbw/vbw points.
inline PowerSpectrum fft_spectrum(const TimeSeries& series, const SpectrumConfig& config) {
    validate(series);
    validate(config);
    const double fs = series.sample_rate;
    const std::size_t nseg = segment_length_for_rbw(fs, config.rbw);
    detail::require(nseg >= 4, ErrorKind::parameter_domain, "rbw too wide for the sample rate");
    detail::require(series.size() >= nseg, ErrorKind::too_short,
                    "series too short for RBW " + std::to_string(config.rbw) + " Hz: need at least " +
                        std::to_string(nseg) + " samples, have " + std::to_string(series.size()));

    std::vector<double> window(nseg);
    double sum_w = 0.0, sum_w2 = 0.0;
    for (std::size_t i = 0; i < nseg; ++i) {
        window[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / nseg));
        sum_w += window[i];
        sum_w2 += window[i] * window[i];
    }
    const std::size_t hop = std::max<std::size_t>(1, nseg / 2);
    const std::size_t segments = (series.size() - nseg) / hop + 1;
    auto& fft = cached_fft(nseg);
    std::vector<double> acc(fft.bins(), 0.0);
    for (std::size_t s = 0; s < segments; ++s) {
        const double* seg = series.samples.data() + s * hop;
        double m = 0.0;
        for (std::size_t i = 0; i < nseg; ++i) m += seg[i];
        m /= static_cast<double>(nseg);
        auto real = fft.real();
        for (std::size_t i = 0; i < nseg; ++i) real[i] = (seg[i] - m) * window[i];
        fft.forward();
        auto spec = fft.spectrum();
        for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += std::norm(spec[k]);
    }

    PowerSpectrum out;
    out.rbw = fs * sum_w2 / (sum_w * sum_w);
    out.vbw = std::min(config.vbw, out.rbw);
    out.bin_width = fs / static_cast<double>(nseg);
    out.n_averages = static_cast<int>(segments);
    const double stop = config.stop > 0.0 ? config.stop : 0.5 * fs;
    std::vector<double> power(acc.size());
    for (std::size_t k = 0; k < acc.size(); ++k) {
        const bool edge = k == 0 || (nseg % 2 == 0 && k == acc.size() - 1);
        const double psd = (edge ? 1.0 : 2.0) * acc[k] / (static_cast<double>(segments) * fs * sum_w2);
        power[k] = psd * out.rbw;
    }
    const auto width = static_cast<std::size_t>(std::llround(config.rbw / config.vbw));
    power = detail::moving_average(power, width % 2 == 0 ? width + 1 : width);
    for (std::size_t k = 0; k < power.size(); ++k) {
        const double f = static_cast<double>(k) * out.bin_width;
        if (f < config.start || f > stop) continue;
        out.frequencies.push_back(f);
        out.power.push_back(power[k]);
    }
    return out;
}

/// Streaming zero-span detector: complex mixer, Gaussian RBW filter whose two-sided
/// ENBW equals the RBW, |.|^2 power detector, single-pole VBW filter.
class ZeroSpanDetector {
public:
    ZeroSpanDetector(double sample_rate, double center, double rbw, double vbw)
        : sample_rate_(sample_rate), rbw_(rbw), vbw_(vbw) {
        detail::require(rbw > 0.0 && vbw > 0.0, ErrorKind::parameter_domain, "rbw and vbw must be > 0");
        detail::require(center > 0.0 && center + 0.5 * rbw < 0.5 * sample_rate, ErrorKind::parameter_domain,
                        "zero-span band must satisfy 0 < center and center + rbw/2 < Nyquist");
        rbw_filter_ = GaussianLowPass<std::complex<double>>(rbw, sample_rate);
        vbw_filter_ = OnePoleLowPass<double>(vbw, sample_rate);
        step_ = 2.0 * std::numbers::pi * center / sample_rate;
        rotation_ = std::polar(1.0, -step_);
    }

    double operator()(double x) {
        // Local oscillator by rotation, resynchronized exactly every 1024 samples.
        if (index_ % 1024 == 0) lo_ = std::polar(1.0, -step_ * static_cast<double>(index_));
        ++index_;
        const std::complex<double> z = rbw_filter_(x * lo_);
        lo_ *= rotation_;
        return vbw_filter_(2.0 * std::norm(z));
    }

    /// Time after which the output is within ~0.1% of steady state.
    double settling_time() const {
        return static_cast<double>(rbw_filter_.length()) / sample_rate_ + 7.0 / (2.0 * std::numbers::pi * vbw_);
    }

    double rbw() const { return rbw_; }
    double vbw() const { return vbw_; }

private:
    double sample_rate_, rbw_, vbw_;
    double step_ = 0.0;
    std::complex<double> rotation_, lo_;
    std::size_t index_ = 0;
    GaussianLowPass<std::complex<double>> rbw_filter_;
    OnePoleLowPass<double> vbw_filter_;
};

/// Band power around `center` versus time (same sample rate as the input).
inline TimeSeries zero_span(const TimeSeries& series, double center, double rbw, double vbw) {
    validate(series);
    ZeroSpanDetector det(series.sample_rate, center, rbw, vbw);
    TimeSeries out(series.sample_rate, series.size());
    for (std::size_t i = 0; i < series.size(); ++i) out.samples[i] = det(series.samples[i]);
    return out;
}

inline double zero_span_settling_time(double sample_rate, double center, double rbw, double vbw) {
    return ZeroSpanDetector(sample_rate, center, rbw, vbw).settling_time();
}

namespace detail {
inline std::vector<double> pointwise_rms(const std::vector<const std::vector<double>*>& traces) {
    require(!traces.empty(), ErrorKind::shape_mismatch, "need at least one trace to average");
    const std::size_t n = traces.front()->size();
    std::vector<double> out(n, 0.0);
    for (const auto* t : traces) {
        require(t->size() == n, ErrorKind::shape_mismatch, "traces differ in length");
        for (std::size_t i = 0; i < n; ++i) out[i] += (*t)[i] * (*t)[i];
    }
    for (auto& v : out) v = std::sqrt(v / static_cast<double>(traces.size()));
    return out;
}
}  // namespace detail

/// Pointwise root-mean-square across traces.
inline PowerSpectrum rms_average(const std::vector<PowerSpectrum>& traces) {
    detail::require(!traces.empty(), ErrorKind::shape_mismatch, "need at least one trace to average");
    std::vector<const std::vector<double>*> views;
    for (const auto& t : traces) {
        detail::require(t.frequencies == traces.front().frequencies && t.rbw == traces.front().rbw,
                        ErrorKind::shape_mismatch, "spectra differ in frequency grid or RBW");
        views.push_back(&t.power);
    }
    PowerSpectrum out = traces.front();
    out.power = detail::pointwise_rms(views);
    out.n_averages = 0;
    for (const auto& t : traces) out.n_averages += t.n_averages;
    return out;
}

inline TimeSeries rms_average(const std::vector<TimeSeries>& traces) {
    detail::require(!traces.empty(), ErrorKind::shape_mismatch, "need at least one trace to average");
    std::vector<const std::vector<double>*> views;
    for (const auto& t : traces) {
        detail::require(t.sample_rate == traces.front().sample_rate, ErrorKind::rate_mismatch,
                        "traces differ in sample rate");
        views.push_back(&t.samples);
    }
    return TimeSeries(traces.front().sample_rate, detail::pointwise_rms(views));
}

/// Streaming pointwise RMS; traces must be added in a fixed order for bit-identical results.
class RmsAccumulator {
public:
    void add(const std::vector<double>& trace) {
        if (count_ == 0) sum_sq_.assign(trace.size(), 0.0);
        detail::require(trace.size() == sum_sq_.size(), ErrorKind::shape_mismatch, "traces differ in length");
        for (std::size_t i = 0; i < trace.size(); ++i) sum_sq_[i] += trace[i] * trace[i];
        ++count_;
    }

    std::vector<double> result() const {
        detail::require(count_ > 0, ErrorKind::shape_mismatch, "need at least one trace to average");
        std::vector<double> out(sum_sq_.size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::sqrt(sum_sq_[i] / static_cast<double>(count_));
        return out;
    }

    std::size_t count() const { return count_; }

private:
    std::vector<double> sum_sq_;
    std::size_t count_ = 0;
};

struct NormalizedTrace {
    std::vector<double> db;            // NaN at flagged bins
    std::vector<std::size_t> flagged;  // bins where trace <= dark
};

/// dB relative to the SQL after subtracting the dark trace in the linear domain.
inline NormalizedTrace normalize_and_subtract(const std::vector<double>& trace, const std::vector<double>& sql,
                                              const std::vector<double>& dark) {
    detail::require(trace.size() == sql.size() && (dark.empty() || dark.size() == sql.size()),
                    ErrorKind::shape_mismatch, "trace, SQL and dark must share bins");
    NormalizedTrace out;
    out.db.resize(trace.size());
    for (std::size_t i = 0; i < trace.size(); ++i) {
        const double d = dark.empty() ? 0.0 : dark[i];
        if (!(sql[i] > d))
            throw Error(ErrorKind::inconsistent_data, "SQL trace is not above the dark trace at bin " + std::to_string(i));
        if (trace[i] <= d) {
            out.flagged.push_back(i);
            out.db[i] = std::numeric_limits<double>::quiet_NaN();
        } else {
            out.db[i] = 10.0 * std::log10((trace[i] - d) / (sql[i] - d));
        }
    }
    return out;
}

/// Spectrum assembled from several analyzer windows, keeping raw bins.
struct StitchedSpectrum {
    std::vector<double> frequencies;
    std::vector<double> power;
    std::vector<double> rbw;  // per bin
};

/// Concatenates windows in order; a later window contributes only bins strictly above
/// the last frequency already present.
inline StitchedSpectrum stitch(const std::vector<PowerSpectrum>& windows) {
    StitchedSpectrum out;
    for (const auto& w : windows) {
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (!out.frequencies.empty() && w.frequencies[i] <= out.frequencies.back()) continue;
            out.frequencies.push_back(w.frequencies[i]);
            out.power.push_back(w.power[i]);
            out.rbw.push_back(w.rbw);
        }
    }
    return out;
}

/// Display resampling onto a logarithmic grid; each cell is the mean of the
/// linear values whose frequency falls inside it. Empty cells are skipped.
inline std::pair<std::vector<double>, std::vector<double>> log_resample(const std::vector<double>& frequencies,
                                                                        const std::vector<double>& values,
                                                                        int points_per_decade) {
    detail::require(frequencies.size() == values.size(), ErrorKind::shape_mismatch,
                    "frequency and value vectors differ in length");
    std::vector<double> fo, vo;
    if (frequencies.empty()) return {fo, vo};
    const double step = 1.0 / points_per_decade;
    std::size_t i = 0;
    while (i < frequencies.size() && frequencies[i] <= 0.0) ++i;
    while (i < frequencies.size()) {
        const double cell = std::floor(std::log10(frequencies[i]) / step);
        const double upper = std::pow(10.0, (cell + 1.0) * step);
        double acc_v = 0.0, acc_f = 0.0;
        std::size_t count = 0;
        while (i < frequencies.size() && frequencies[i] < upper) {
            acc_v += values[i];
            acc_f += std::log10(frequencies[i]);
            ++count;
            ++i;
        }
        fo.push_back(std::pow(10.0, acc_f / static_cast<double>(count)));
        vo.push_back(acc_v / static_cast<double>(count));
    }
    return {fo, vo};
}

}  // namespace sqz
