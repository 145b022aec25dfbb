#pragma once

// Seeded noise synthesis. PSD convention throughout: one-sided, so a series with
// flat PSD S0 sampled at fs has variance S0 * fs / 2.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "sqzlab/error.hpp"
#include "sqzlab/fft.hpp"
#include "sqzlab/random.hpp"
#include "sqzlab/timeseries.hpp"

namespace sqz {

struct TechnicalNoise {
    bool enabled = true;
    double corner_frequency = 10.0;  // Hz
    double slope_alpha = 2.0;
    double level_at_corner = 1.0;  // linear PSD relative to SQL, before CMRR

    double psd(double f) const {
        if (!enabled || f <= 0.0) return 0.0;
        return level_at_corner * std::pow(corner_frequency / f, slope_alpha);
    }
};

struct Tone {
    double frequency = 0.0;  // Hz
    double amplitude = 0.0;  // rms
};

struct NoiseScenario {
    double shot_level = 1.0;
    TechnicalNoise technical_noise;
    std::vector<Tone> tones;
    std::uint64_t seed = 0;
};

inline void validate(const NoiseScenario& s, double sample_rate = 0.0) {
    using detail::require;
    require(std::isfinite(s.shot_level) && s.shot_level > 0.0, ErrorKind::parameter_domain,
            "shot_level must be > 0");
    const auto& t = s.technical_noise;
    require(t.corner_frequency > 0.0, ErrorKind::parameter_domain, "corner_frequency must be > 0");
    require(t.slope_alpha >= 0.5 && t.slope_alpha <= 3.0, ErrorKind::parameter_domain,
            "slope_alpha must lie in [0.5, 3]");
    require(t.level_at_corner >= 0.0, ErrorKind::parameter_domain, "level_at_corner must be >= 0");
    for (const auto& tone : s.tones) {
        require(tone.frequency > 0.0 && tone.amplitude >= 0.0, ErrorKind::parameter_domain,
                "tones need positive frequency and non-negative amplitude");
        if (sample_rate > 0.0)
            require(tone.frequency < 0.5 * sample_rate, ErrorKind::parameter_domain,
                    "tone at " + std::to_string(tone.frequency) + " Hz is above Nyquist");
    }
}

inline TimeSeries white_noise(double sample_rate, std::size_t count, double sigma, std::uint64_t seed) {
    detail::require(count >= 1, ErrorKind::invalid_series, "count must be >= 1");
    detail::require(sigma >= 0.0, ErrorKind::parameter_domain, "sigma must be >= 0");
    detail::require(sample_rate > 0.0, ErrorKind::invalid_series, "sample rate must be positive");
    TimeSeries out(sample_rate, count);
    if (sigma == 0.0) return out;
    auto rng = make_engine(seed);
    std::normal_distribution<double> gauss(0.0, sigma);
    for (auto& v : out.samples) v = gauss(rng);
    return out;
}

/// Gaussian series whose one-sided PSD follows `psd(f)`. The spectrum is drawn directly
/// as independent complex Gaussian bins (the distribution of a white-noise transform),
/// shaped and inverse transformed. The realization is circular in time.
template <class PsdFn>
TimeSeries colored_noise_from_psd(PsdFn&& psd, double sample_rate, std::size_t count, std::uint64_t seed) {
    detail::require(count >= 2, ErrorKind::too_short, "colored noise needs at least 2 samples");
    detail::require(sample_rate > 0.0, ErrorKind::invalid_series, "sample rate must be positive");
    auto& fft = cached_fft(count);
    auto rng = make_engine(seed);
    std::normal_distribution<double> gauss;
    auto spec = fft.spectrum();
    const double df = sample_rate / static_cast<double>(count);
    const double n = static_cast<double>(count);
    const std::size_t last = spec.size() - 1;
    const bool real_nyquist = count % 2 == 0;
    for (std::size_t k = 0; k < spec.size(); ++k) {
        const double s = psd(static_cast<double>(k) * df);
        if (!(std::isfinite(s) && s >= 0.0))
            throw Error(ErrorKind::parameter_domain,
                        "PSD must be finite and non-negative at " + std::to_string(k * df) + " Hz");
        const double amp = std::sqrt(s * sample_rate * 0.5) / n;
        if (k == 0 || (real_nyquist && k == last)) {
            spec[k] = {gauss(rng) * std::sqrt(n) * amp, 0.0};
        } else {
            const double re = gauss(rng);
            const double im = gauss(rng);
            spec[k] = std::complex<double>(re, im) * (std::sqrt(0.5 * n) * amp);
        }
    }
    fft.inverse();
    auto real = fft.real();
    return TimeSeries(sample_rate, std::vector<double>(real.begin(), real.end()));
}

/// PSD = scale * f^-alpha (scale is the PSD at 1 Hz) for f >= f_min, zero below.
/// f_min = 0 selects the lowest resolvable frequency sample_rate / count.
inline TimeSeries power_law_noise(double sample_rate, std::size_t count, double alpha, double scale,
                                  std::uint64_t seed, double f_min = 0.0) {
    detail::require(alpha >= 0.0 && alpha <= 3.0, ErrorKind::parameter_domain, "alpha must lie in [0, 3]");
    detail::require(scale >= 0.0, ErrorKind::parameter_domain, "scale must be >= 0");
    detail::require(count >= 16, ErrorKind::too_short, "power-law noise needs at least 16 samples");
    const double resolution = sample_rate / static_cast<double>(count);
    if (f_min == 0.0) f_min = resolution;
    detail::require(f_min >= resolution * (1.0 - 1e-12), ErrorKind::too_short,
                    "count too small to resolve f_min: need at least " +
                        std::to_string(static_cast<std::size_t>(std::ceil(sample_rate / f_min))) + " samples");
    if (scale == 0.0) return TimeSeries(sample_rate, count);
    return colored_noise_from_psd(
        [=](double f) { return f < f_min * (1.0 - 1e-12) ? 0.0 : scale * std::pow(f, -alpha); }, sample_rate,
        count, seed);
}

/// Wiener process starting at 0: Var[theta(k dt)] = diffusion * k dt.
inline TimeSeries phase_random_walk(double sample_rate, std::size_t count, double diffusion,
                                    std::uint64_t seed) {
    detail::require(diffusion >= 0.0, ErrorKind::parameter_domain, "diffusion must be >= 0");
    detail::require(count >= 1, ErrorKind::invalid_series, "count must be >= 1");
    TimeSeries out(sample_rate, count);
    if (diffusion == 0.0) return out;
    auto rng = make_engine(seed);
    std::normal_distribution<double> gauss(0.0, std::sqrt(diffusion / sample_rate));
    for (std::size_t i = 1; i < count; ++i) out.samples[i] = out.samples[i - 1] + gauss(rng);
    return out;
}

/// Slow Gaussian phase fluctuation with a Lorentzian spectrum of the given corner,
/// rescaled so its sample RMS equals `rms` exactly.
inline TimeSeries phase_jitter_series(double sample_rate, std::size_t count, double rms, double corner,
                                      std::uint64_t seed) {
    detail::require(rms >= 0.0 && corner > 0.0, ErrorKind::parameter_domain,
                    "jitter rms must be >= 0 and corner > 0");
    if (rms == 0.0 || count < 2) return TimeSeries(sample_rate, count);
    auto series = colored_noise_from_psd(
        [=](double f) { return f == 0.0 ? 0.0 : 1.0 / (1.0 + (f / corner) * (f / corner)); }, sample_rate, count,
        seed);
    const double m = mean(series.samples);
    for (auto& v : series.samples) v -= m;
    const double scale = rms / sqz::rms(series.samples);
    for (auto& v : series.samples) v *= scale;
    return series;
}

/// Adds sinusoids of the given rms amplitude with seeded random phases. The phasor is
/// advanced by rotation and recomputed exactly every 1024 samples.
inline void add_tones(TimeSeries& series, const std::vector<Tone>& tones, std::uint64_t seed) {
    auto rng = make_engine(seed);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    for (const auto& tone : tones) {
        const double peak = tone.amplitude * std::numbers::sqrt2;
        const double w = 2.0 * std::numbers::pi * tone.frequency / series.sample_rate;
        const double p0 = phase(rng);
        const std::complex<double> step = std::polar(1.0, w);
        std::complex<double> z;
        for (std::size_t i = 0; i < series.size(); ++i) {
            if (i % 1024 == 0) z = std::polar(1.0, w * static_cast<double>(i) + p0);
            series.samples[i] += peak * z.imag();
            z *= step;
        }
    }
}

}  // namespace sqz
