#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "sqzlab/analyzer.hpp"
#include "sqzlab/noise.hpp"
#include "sqzlab/physics.hpp"

using Catch::Approx;
using namespace sqz;

namespace {
double loglog_slope(const PowerSpectrum& s, double lo, double hi) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    double n = 0;
    for (std::size_t k = 0; k < s.size(); ++k) {
        const double f = s.frequencies[k];
        if (f < lo || f > hi) continue;
        const double x = std::log10(f), y = std::log10(s.power[k]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        n += 1;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

PowerSpectrum welch(const TimeSeries& s, std::size_t nseg) {
    SpectrumConfig cfg;
    cfg.rbw = 1.5 * s.sample_rate / static_cast<double>(nseg);
    cfg.vbw = cfg.rbw;
    return fft_spectrum(s, cfg);
}
}  // namespace

TEST_CASE("white noise has the requested variance", "[noise]") {
    const auto w = white_noise(1e3, 200000, 2.0, 1);
    CHECK(mean(w.samples) == Approx(0.0).margin(0.02));
    CHECK(variance(w.samples) == Approx(4.0).epsilon(0.02));
}

TEST_CASE("generators are deterministic per seed", "[noise]") {
    const auto a = power_law_noise(100.0, 4096, 1.0, 1.0, 7);
    const auto b = power_law_noise(100.0, 4096, 1.0, 1.0, 7);
    const auto c = power_law_noise(100.0, 4096, 1.0, 1.0, 8);
    CHECK(a.samples == b.samples);
    CHECK(a.samples != c.samples);
}

TEST_CASE("power-law noise has the requested log-log slope", "[noise]") {
    for (double alpha : {1.0, 1.5, 2.0}) {
        const auto s = power_law_noise(1024.0, std::size_t{1} << 20, alpha, 1.0, 11);
        const auto ps = welch(s, 8192);
        const double slope = loglog_slope(ps, 10 * ps.bin_width, 256.0);
        CAPTURE(alpha, slope);
        CHECK(slope < -alpha + 0.15);
        CHECK(slope > -alpha - 0.15);
    }
}

TEST_CASE("alpha zero reduces to white noise", "[noise]") {
    const auto s = power_law_noise(1024.0, std::size_t{1} << 18, 0.0, 1.0, 3);
    const auto ps = welch(s, 1024);
    double lo = 1e300, hi = 0;
    // Average in coarse blocks to compare levels rather than single-bin scatter.
    for (std::size_t k = 8; k + 32 < ps.size(); k += 32) {
        double acc = 0;
        for (std::size_t j = 0; j < 32; ++j) acc += ps.power[k + j];
        lo = std::min(lo, acc);
        hi = std::max(hi, acc);
    }
    CHECK(to_db(hi / lo) < 1.0);
}

TEST_CASE("colored noise realizes the PSD level", "[noise]") {
    const double fs = 2000.0, level = 3.0;
    const auto s = colored_noise_from_psd([&](double) { return level; }, fs, 1 << 18, 5);
    CHECK(variance(s.samples) == Approx(level * fs / 2).epsilon(0.02));
    CHECK_THROWS_AS(colored_noise_from_psd([](double) { return -1.0; }, fs, 64, 5), Error);
}

TEST_CASE("phase jitter series has exactly the requested rms", "[noise]") {
    const auto j = phase_jitter_series(1000.0, 50000, 0.018, 1.0, 9);
    CHECK(rms(j.samples) == Approx(0.018).epsilon(1e-12));
    CHECK(mean(j.samples) == Approx(0.0).margin(1e-12));
    const auto zero = phase_jitter_series(1000.0, 100, 0.0, 1.0, 9);
    CHECK(rms(zero.samples) == 0.0);
}

TEST_CASE("random-walk variance grows linearly", "[noise]") {
    const double fs = 100.0, d = 0.5;
    const std::size_t n = 1000;
    double acc = 0;
    const int walks = 400;
    for (int w = 0; w < walks; ++w) {
        const auto r = phase_random_walk(fs, n, d, derive_seed(3, static_cast<std::uint64_t>(w)));
        acc += r.samples.back() * r.samples.back();
    }
    const double expected = d * static_cast<double>(n - 1) / fs;
    CHECK(acc / walks == Approx(expected).epsilon(0.2));
}

TEST_CASE("tones add their rms power at the right frequency", "[noise]") {
    const double fs = 8192.0;
    TimeSeries s(fs, 1 << 16);
    add_tones(s, {{1024.0, 0.5}}, 1);
    CHECK(rms(s.samples) == Approx(0.5).epsilon(1e-6));
    SpectrumConfig cfg;
    cfg.rbw = 1.5 * fs / 4096;
    cfg.vbw = cfg.rbw;
    const auto ps = fft_spectrum(s, cfg);
    const auto peak = std::max_element(ps.power.begin(), ps.power.end()) - ps.power.begin();
    CHECK(ps.frequencies[static_cast<std::size_t>(peak)] == Approx(1024.0));
    CHECK(ps.power[static_cast<std::size_t>(peak)] == Approx(0.25).epsilon(1e-6));
}

TEST_CASE("noise scenario validation rejects bad fields", "[noise][errors]") {
    NoiseScenario s;
    s.tones = {{600.0, 1.0}};
    CHECK_NOTHROW(validate(s));
    CHECK_THROWS_AS(validate(s, 1000.0), Error);
    s.tones.clear();
    s.technical_noise.slope_alpha = 4.0;
    CHECK_THROWS_AS(validate(s), Error);
    CHECK_THROWS_AS(power_law_noise(100.0, 1024, 3.5, 1.0, 1), Error);
    CHECK_THROWS_AS(power_law_noise(100.0, 1024, 1.0, 1.0, 1, 0.01), Error);
}
