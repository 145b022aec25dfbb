#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "sqzlab/error.hpp"

namespace sqz {

/// Uniformly sampled real signal. Photocurrent series are in units where the
/// one-sided vacuum-quadrature PSD equals 1.
struct TimeSeries {
    double sample_rate = 1.0;
    std::vector<double> samples;

    TimeSeries() = default;
    TimeSeries(double rate, std::vector<double> values) : sample_rate(rate), samples(std::move(values)) {}
    TimeSeries(double rate, std::size_t count, double fill = 0.0) : sample_rate(rate), samples(count, fill) {}

    std::size_t size() const noexcept { return samples.size(); }
    double dt() const noexcept { return 1.0 / sample_rate; }
    double duration() const noexcept { return static_cast<double>(samples.size()) / sample_rate; }
    double time(std::size_t i) const noexcept { return static_cast<double>(i) / sample_rate; }
    std::span<const double> view() const noexcept { return samples; }
};

inline void validate(const TimeSeries& s) {
    detail::require(std::isfinite(s.sample_rate) && s.sample_rate > 0.0, ErrorKind::invalid_series,
                    "sample rate must be positive");
    detail::require(!s.samples.empty(), ErrorKind::invalid_series, "series must hold at least one sample");
    detail::require(std::all_of(s.samples.begin(), s.samples.end(), [](double v) { return std::isfinite(v); }),
                    ErrorKind::invalid_series, "series contains non-finite samples");
}

inline double mean(std::span<const double> v) {
    if (v.empty()) return 0.0;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

/// Unbiased sample variance.
inline double variance(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double acc = 0.0;
    for (double x : v) acc += (x - m) * (x - m);
    return acc / static_cast<double>(v.size() - 1);
}

inline double rms(std::span<const double> v) {
    if (v.empty()) return 0.0;
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return std::sqrt(acc / static_cast<double>(v.size()));
}

/// Linear interpolation of `src` onto `count` samples at `rate`; holds the end values.
inline TimeSeries resample_linear(const TimeSeries& src, double rate, std::size_t count) {
    validate(src);
    TimeSeries out(rate, count);
    const double ratio = src.sample_rate / rate;
    const std::size_t last = src.size() - 1;
    for (std::size_t i = 0; i < count; ++i) {
        const double pos = static_cast<double>(i) * ratio;
        const auto k = static_cast<std::size_t>(pos);
        if (k >= last) {
            out.samples[i] = src.samples[last];
        } else {
            const double frac = pos - static_cast<double>(k);
            out.samples[i] = src.samples[k] + frac * (src.samples[k + 1] - src.samples[k]);
        }
    }
    return out;
}

/// Block means of `factor` consecutive samples.
inline TimeSeries decimate_mean(const TimeSeries& src, std::size_t factor) {
    detail::require(factor >= 1, ErrorKind::parameter_domain, "decimation factor must be >= 1");
    TimeSeries out(src.sample_rate / static_cast<double>(factor), src.size() / factor);
    for (std::size_t i = 0; i < out.size(); ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < factor; ++j) acc += src.samples[i * factor + j];
        out.samples[i] = acc / static_cast<double>(factor);
    }
    return out;
}

}  // namespace sqz
