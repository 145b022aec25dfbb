#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "sqzlab/analyzer.hpp"
#include "sqzlab/noise.hpp"
#include "sqzlab/physics.hpp"

using Catch::Approx;
using namespace sqz;

namespace {
SpectrumConfig fft_config(double rbw) {
    SpectrumConfig c;
    c.rbw = rbw;
    c.vbw = rbw;
    return c;
}
}  // namespace

TEST_CASE("Welch spectrum satisfies Parseval", "[analyzer]") {
    const auto w = white_noise(1e4, 1 << 18, 1.3, 1);
    const auto ps = fft_spectrum(w, fft_config(10.0));
    CHECK(ps.integrated_power() == Approx(variance(w.samples)).epsilon(0.01));
    CHECK(ps.rbw == Approx(1.5 * ps.bin_width).epsilon(1e-12));
}

TEST_CASE("white-noise band power equals S0 times RBW", "[analyzer]") {
    const double fs = 1e4, sigma = 1.0;
    const auto ps = fft_spectrum(white_noise(fs, 1 << 18, sigma, 2), fft_config(20.0));
    double acc = 0;
    int n = 0;
    for (std::size_t k = 0; k < ps.size(); ++k)
        if (ps.frequencies[k] > 1000 && ps.frequencies[k] < 4000) {
            acc += ps.power[k];
            ++n;
        }
    CHECK(acc / n == Approx(2 * sigma * sigma / fs * ps.rbw).epsilon(0.05));
}

TEST_CASE("a bin-centred tone reads A^2/2", "[analyzer]") {
    const double fs = 4096.0, a = 2.0;
    TimeSeries s(fs, 1 << 16);
    for (std::size_t i = 0; i < s.size(); ++i) s.samples[i] = a * std::cos(2 * std::numbers::pi * 300.0 * s.time(i));
    const auto ps = fft_spectrum(s, fft_config(1.5));
    const double peak = *std::max_element(ps.power.begin(), ps.power.end());
    CHECK(std::abs(to_db(peak / (a * a / 2))) < 0.1);
}

TEST_CASE("range and VBW smoothing", "[analyzer]") {
    const auto w = white_noise(1e4, 1 << 16, 1.0, 3);
    SpectrumConfig c = fft_config(20.0);
    c.start = 100;
    c.stop = 2000;
    const auto ps = fft_spectrum(w, c);
    CHECK(ps.frequencies.front() >= 100.0);
    CHECK(ps.frequencies.back() <= 2000.0);
    c.vbw = 2.0;
    const auto smooth = fft_spectrum(w, c);
    std::vector<double> a(ps.power), b(smooth.power);
    CHECK(variance(b) < 0.3 * variance(a));
    CHECK(mean(b) == Approx(mean(a)).epsilon(0.05));
}

TEST_CASE("spectrum input errors", "[analyzer][errors]") {
    CHECK_THROWS_AS(fft_spectrum(TimeSeries(1e3, 100), fft_config(1.0)), Error);
    SpectrumConfig bad = fft_config(10.0);
    bad.vbw = 20.0;
    CHECK_THROWS_AS(fft_spectrum(TimeSeries(1e3, 4096), bad), Error);
}

TEST_CASE("zero span reads a tone's power", "[analyzer]") {
    const double fs = 1e4, a = 1.5, f0 = 700.0;
    TimeSeries s(fs, 40000);
    for (std::size_t i = 0; i < s.size(); ++i) s.samples[i] = a * std::sin(2 * std::numbers::pi * f0 * s.time(i) + 0.3);
    const auto out = zero_span(s, f0, 50.0, 5.0);
    const auto skip = static_cast<std::size_t>(zero_span_settling_time(fs, f0, 50.0, 5.0) * fs);
    REQUIRE(skip < out.size());
    CHECK(out.samples.back() == Approx(a * a / 2).epsilon(0.002));
}

TEST_CASE("zero span of white noise averages to S0 times RBW", "[analyzer]") {
    const double fs = 1e4, rbw = 100.0;
    const auto w = white_noise(fs, 400000, 1.0, 4);
    const auto out = zero_span(w, 2000.0, rbw, 10.0);
    const auto skip = static_cast<std::size_t>(zero_span_settling_time(fs, 2000.0, rbw, 10.0) * fs);
    const std::vector<double> tail(out.samples.begin() + static_cast<std::ptrdiff_t>(skip), out.samples.end());
    CHECK(mean(tail) == Approx(2.0 / fs * rbw).epsilon(0.05));
}

TEST_CASE("zero span RBW skirt follows the Gaussian response", "[analyzer]") {
    // |H(f)|^2 = exp(-pi f^2 / RBW^2) has unit peak and integrates to the RBW.
    const double fs = 500.0, a = 100.0, rbw = 5.0;
    TimeSeries s(fs, 30000);
    for (std::size_t i = 0; i < s.size(); ++i) s.samples[i] = a * std::sin(2 * std::numbers::pi * 1.0 * s.time(i));
    const auto out = zero_span(s, 10.0, rbw, 1.0);
    const std::vector<double> tail(out.samples.end() - 10000, out.samples.end());
    auto h2 = [&](double f) { return std::exp(-std::numbers::pi * f * f / (rbw * rbw)); };
    CHECK(mean(tail) == Approx(a * a / 2 * (h2(9.0) + h2(11.0))).epsilon(0.02));
}

TEST_CASE("RMS averaging is a pointwise root-mean-square", "[analyzer]") {
    const std::vector<TimeSeries> traces = {TimeSeries(1.0, {1.0, 2.0}), TimeSeries(1.0, {3.0, 4.0})};
    const auto r = rms_average(traces);
    CHECK(r.samples[0] == Approx(std::sqrt(5.0)));
    CHECK(r.samples[1] == Approx(std::sqrt(10.0)));
    RmsAccumulator acc;
    acc.add(traces[0].samples);
    acc.add(traces[1].samples);
    CHECK(acc.count() == 2);
    CHECK(acc.result() == r.samples);
    CHECK_THROWS_AS(rms_average(std::vector<TimeSeries>{TimeSeries(1.0, 2), TimeSeries(1.0, 3)}), Error);
}

TEST_CASE("SQL normalization is exactly zero dB and flags bins below dark", "[analyzer]") {
    const std::vector<double> sql = {2.0, 3.0, 5.0}, dark = {0.5, 0.5, 0.5};
    const auto self = normalize_and_subtract(sql, sql, dark);
    for (double v : self.db) CHECK(v == 0.0);
    CHECK(self.flagged.empty());
    const auto t = normalize_and_subtract({1.25, 0.4, 3.0}, sql, dark);
    CHECK(t.db[0] == Approx(to_db(0.75 / 1.5)));
    CHECK(t.flagged == std::vector<std::size_t>{1});
    CHECK(std::isnan(t.db[1]));
}

TEST_CASE("stitching keeps strictly increasing frequencies", "[analyzer]") {
    PowerSpectrum a, b;
    a.frequencies = {1, 2, 3};
    a.power = {1, 1, 1};
    a.rbw = 1;
    b.frequencies = {2.5, 3, 4, 5};
    b.power = {2, 2, 2, 2};
    b.rbw = 2;
    const auto s = stitch({a, b});
    CHECK(s.frequencies == std::vector<double>{1, 2, 3, 4, 5});
    CHECK(s.rbw == std::vector<double>{1, 1, 1, 2, 2});
}

TEST_CASE("log resampling averages linear values per cell", "[analyzer]") {
    const std::vector<double> f = {0, 1, 1.1, 10, 11, 100};
    const std::vector<double> v = {9, 1, 3, 5, 7, 2};
    const auto [lf, lv] = log_resample(f, v, 1);
    REQUIRE(lf.size() == 3);
    CHECK(lv[0] == Approx(2.0));
    CHECK(lv[1] == Approx(6.0));
    CHECK(lv[2] == Approx(2.0));
    CHECK(lf[2] == Approx(100.0));
}
