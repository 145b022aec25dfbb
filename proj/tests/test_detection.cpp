#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "sqzlab/analyzer.hpp"
#include "sqzlab/detection.hpp"

using Catch::Approx;
using namespace sqz;

namespace {
NoiseScenario quiet_scenario() {
    NoiseScenario s;
    s.technical_noise.enabled = false;
    return s;
}

HomodyneDetector ideal_detector() {
    HomodyneDetector d;
    d.dark_enabled = false;
    return d;
}
}  // namespace

TEST_CASE("vacuum input gives the shot-noise variance", "[detection]") {
    const double fs = 1e5;
    const auto i = homodyne_measure(quiet_scenario(), SqueezerModel::vacuum(), ideal_detector(),
                                    TimeSeries(fs, 1 << 17), 1, HomodyneInput::vacuum);
    CHECK(variance(i.samples) == Approx(0.5 * fs).epsilon(0.02));
}

TEST_CASE("locked quadratures reproduce the model variances", "[detection]") {
    const double fs = 1e5;
    const SqueezerModel model{0.5, 0.8, 1e9};  // flat over the simulated band
    const auto pair = model.at(0.0);
    const auto sq = homodyne_measure(quiet_scenario(), model, ideal_detector(), TimeSeries(fs, 1 << 17), 2);
    const auto anti = homodyne_measure(quiet_scenario(), model, ideal_detector(),
                                       TimeSeries(fs, 1 << 17, std::numbers::pi / 2), 3);
    CHECK(variance(sq.samples) / (0.5 * fs) == Approx(pair.r_minus).epsilon(0.02));
    CHECK(variance(anti.samples) / (0.5 * fs) == Approx(pair.r_plus).epsilon(0.02));
}

TEST_CASE("a moving LO angle mixes the quadratures", "[detection]") {
    const double fs = 1e5;
    const std::size_t n = 1 << 17;
    const SqueezerModel model{0.5, 0.8, 1e9};
    const auto pair = model.at(0.0);
    TimeSeries angle(fs, n);
    for (std::size_t i = 0; i < n; ++i) angle.samples[i] = 0.3 * std::sin(2 * std::numbers::pi * 2.0 * angle.time(i));
    const auto i = homodyne_measure(quiet_scenario(), model, ideal_detector(), angle, 4);
    double expected = 0;
    for (double th : angle.samples) expected += quadrature_variance(pair, th);
    expected /= static_cast<double>(n);
    CHECK(variance(i.samples) / (0.5 * fs) == Approx(expected).epsilon(0.03));
}

TEST_CASE("blocked input carries only dark noise and no pickup tones", "[detection]") {
    const double fs = 1e4;
    NoiseScenario s = quiet_scenario();
    s.tones = {{1000.0, 5.0}};
    HomodyneDetector d;
    const auto dark = homodyne_measure(s, SqueezerModel::vacuum(), d, TimeSeries(fs, 1 << 16), 5,
                                       HomodyneInput::blocked);
    CHECK(variance(dark.samples) / (0.5 * fs) == Approx(d.dark_psd(500.0)).epsilon(0.05));
    const auto lit = homodyne_measure(s, SqueezerModel::vacuum(), d, TimeSeries(fs, 1 << 16), 5,
                                      HomodyneInput::vacuum);
    CHECK(variance(lit.samples) > variance(dark.samples) + 20.0);
}

TEST_CASE("dark noise interpolates in log frequency and scales with LO power", "[detection]") {
    HomodyneDetector d;
    CHECK(to_db(d.dark_psd(5.0)) == Approx(-7.0));
    CHECK(to_db(d.dark_psd(1e3)) == Approx(-10.0));
    CHECK(to_db(d.dark_psd(std::sqrt(10.0) * 10.0)) == Approx(-8.5));
    d.lo_power = 4.0;
    CHECK(to_db(d.dark_psd(1e3)) == Approx(-10.0 - 10 * std::log10(2.0)));
}

TEST_CASE("CMRR table interpolates in log frequency", "[detection]") {
    HomodyneDetector d;
    d.cmrr_table = {{10.0, 40.0}, {1000.0, 60.0}};
    CHECK(to_db(d.cmrr_linear(100.0)) == Approx(50.0));
    CHECK(to_db(d.cmrr_linear(1.0)) == Approx(40.0));
    CHECK(to_db(d.cmrr_linear(1e5)) == Approx(60.0));
}

TEST_CASE("technical noise leaks through the finite CMRR", "[detection]") {
    const double fs = 1e4;
    NoiseScenario s;
    s.technical_noise.corner_frequency = 1.0;
    s.technical_noise.slope_alpha = 1.0;
    s.technical_noise.level_at_corner = 1e6;
    HomodyneDetector d = ideal_detector();
    d.cmrr_db = 30.0;
    const auto i = homodyne_measure(s, SqueezerModel::vacuum(), d, TimeSeries(fs, 1 << 16), 6,
                                    HomodyneInput::vacuum);
    SpectrumConfig cfg;
    cfg.rbw = 1.5 * fs / 1024;
    cfg.vbw = cfg.rbw;
    const auto ps = fft_spectrum(i, cfg);
    // Near 100 Hz the leak is 1e6 / 100 / 1e3 = 10 x SQL.
    double acc = 0;
    int n = 0;
    for (std::size_t k = 0; k < ps.size(); ++k)
        if (ps.frequencies[k] > 80 && ps.frequencies[k] < 125) {
            acc += ps.psd(k) / (1.0 + 1e3 / ps.frequencies[k]);
            ++n;
        }
    CHECK(acc / n == Approx(1.0).epsilon(0.15));
}

TEST_CASE("count-rate model hits its anchors", "[detection]") {
    const OpaParams p;
    const SpcmChannel spcm;
    CHECK(count_rate_model(p, 0.0, 0.0, spcm) == Approx(1.95e6));
    const double x = normalized_pump(p);
    CHECK(count_rate_model(p, 3.0, std::numbers::pi, spcm) ==
          Approx(1.95e6 + 90e3 / ((1 + x) * (1 + x))).epsilon(1e-12));
    OpaParams off = p;
    off.pump_power = 0.0;
    CHECK(count_rate_model(off, 3.0, 0.0, spcm) == Approx(500.0 + 90e3));
}

TEST_CASE("photon counts are Poissonian", "[detection]") {
    const TimeSeries rate(50.0, std::vector<double>(10000, 1.95e6));
    const auto c = spcm_counts(rate, 3);
    std::vector<double> v(c.counts.begin(), c.counts.end());
    CHECK(mean(v) == Approx(39000.0).epsilon(0.001));
    const double fano = variance(v) / mean(v);
    CHECK(fano > 0.95);
    CHECK(fano < 1.05);
    CHECK_THROWS_AS(spcm_counts(TimeSeries(50.0, std::vector<double>{-1.0}), 1), Error);
}
