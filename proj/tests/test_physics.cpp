#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "sqzlab/physics.hpp"
#include "sqzlab/random.hpp"

using Catch::Approx;
using namespace sqz;

TEST_CASE("cavity quantities follow their closed forms", "[physics]") {
    const OpaParams p;
    CHECK(escape_efficiency(p) == Approx(0.879).epsilon(1e-12));
    CHECK(cavity_decay_rate(p) == Approx(speed_of_light * (0.11 + p.intracavity_loss_L) / 0.407).epsilon(1e-12));
    CHECK(normalized_pump(p) == Approx(std::sqrt(100.0 / 165.0)).epsilon(1e-12));
    CHECK(p.free_spectral_range() == Approx(speed_of_light / 0.407));
    const DetectionChain c;
    CHECK(total_efficiency(p, c) == Approx(0.990 * 0.985 * 0.985 * 0.912 * 0.879).epsilon(1e-12));
}

TEST_CASE("escape-efficiency constructor stores the implied loss", "[physics]") {
    const auto p = OpaParams::from_escape_efficiency(0.11, 0.879, 0.407, 100.0, 165.0);
    CHECK(escape_efficiency(p) == Approx(0.879).epsilon(1e-12));
    CHECK_THROWS_AS(OpaParams::from_escape_efficiency(0.11, 0.0, 0.407, 100.0, 165.0), Error);
}

TEST_CASE("default operating point squeezes about 6 dB at 5 kHz", "[physics]") {
    const auto pair = squeezing_spectrum(OpaParams{}, DetectionChain{}, 5e3);
    const double mag = -to_db(pair.r_minus);
    CHECK(mag > 5.8);
    CHECK(mag < 6.2);
    CHECK(to_db(pair.r_plus) > 0.0);
}

TEST_CASE("lossless zero-frequency spectrum is the ideal squeezed state", "[physics]") {
    for (double x : {0.1, 0.5, 0.9}) {
        const auto p = squeezing_spectrum(x, 1.0, 0.0);
        CHECK(p.r_minus == Approx(std::pow((1 - x) / (1 + x), 2)).epsilon(1e-12));
        CHECK(p.r_plus == Approx(std::pow((1 + x) / (1 - x), 2)).epsilon(1e-12));
        CHECK(p.r_minus * p.r_plus == Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("zero pump gives the vacuum and high frequency returns to the SQL", "[physics]") {
    const auto v = squeezing_spectrum(0.0, 0.8, 0.3);
    CHECK(v.r_minus == 1.0);
    CHECK(v.r_plus == 1.0);
    const auto far = squeezing_spectrum(0.7, 0.8, 1e4);
    CHECK(far.r_minus == Approx(1.0).margin(1e-6));
    CHECK(far.r_plus == Approx(1.0).margin(1e-6));
}

TEST_CASE("uncertainty product never drops below one", "[physics][property]") {
    auto rng = make_engine(42);
    std::uniform_real_distribution<double> ux(0.0, 0.999), uk(1e-3, 1.0), uw(0.0, 10.0);
    for (int i = 0; i < 10000; ++i) {
        const auto p = squeezing_spectrum(ux(rng), uk(rng), uw(rng));
        REQUIRE(p.r_minus * p.r_plus >= 1.0 - 1e-12);
        REQUIRE(p.r_minus <= 1.0);
        REQUIRE(p.r_plus >= 1.0);
    }
}

TEST_CASE("phase jitter mixing matches the observed degradation", "[physics]") {
    const QuadratureVariancePair ideal{from_db(-5.70), from_db(13.68)};
    const auto mixed = apply_phase_jitter(ideal, PhaseJitter{0.018});
    CHECK(to_db(mixed.r_minus) == Approx(-5.58).margin(0.05));
    CHECK(mixed.r_minus + mixed.r_plus == Approx(ideal.r_minus + ideal.r_plus).epsilon(1e-14));
    const auto none = apply_phase_jitter(ideal, PhaseJitter{0.0});
    CHECK(none.r_minus == ideal.r_minus);
    CHECK(none.r_plus == ideal.r_plus);
    const auto swapped = apply_phase_jitter(ideal, PhaseJitter{std::numbers::pi / 2});
    CHECK(swapped.r_minus == Approx(ideal.r_plus));
    CHECK(swapped.r_plus == Approx(ideal.r_minus));
}

TEST_CASE("quadrature variance interpolates between the two quadratures", "[physics]") {
    const QuadratureVariancePair p{0.25, 4.0};
    CHECK(quadrature_variance(p, 0.0) == Approx(0.25));
    CHECK(quadrature_variance(p, std::numbers::pi / 2) == Approx(4.0));
    CHECK(quadrature_variance(p, std::numbers::pi / 4) == Approx(2.125));
}

TEST_CASE("classical parametric gain endpoints", "[physics]") {
    const double x = 0.6;
    CHECK(parametric_power_gain(x, 0.0) == Approx(1.0 / ((1 - x) * (1 - x))));
    CHECK(parametric_power_gain(x, std::numbers::pi) == Approx(1.0 / ((1 + x) * (1 + x))));
    CHECK(parametric_power_gain(0.0, 1.234) == Approx(1.0));
}

TEST_CASE("invalid operating points are rejected by kind", "[physics][errors]") {
    OpaParams p;
    p.pump_power = 165.0;
    try {
        normalized_pump(p);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::above_threshold);
    }
    CHECK_THROWS_AS(squeezing_spectrum(1.0, 0.5, 0.0), Error);
    CHECK_THROWS_AS(squeezing_spectrum(0.5, 1.5, 0.0), Error);
    CHECK_THROWS_AS(squeezing_spectrum(0.5, 0.5, -1.0), Error);
    CHECK_THROWS_AS(to_db(0.0), Error);
    DetectionChain c;
    c.visibility = 1.2;
    CHECK_THROWS_AS(total_efficiency(OpaParams{}, c), Error);
    OpaParams degenerate;
    degenerate.intracavity_loss_L = -degenerate.output_coupler_T;
    CHECK_THROWS_AS(cavity_decay_rate(degenerate), Error);
}

TEST_CASE("intracavity photon number is linear in probe power", "[physics]") {
    CHECK(mean_intracavity_photons(0.0) == 0.0);
    CHECK(mean_intracavity_photons(3.0) == Approx(3.0 * photons_per_nanowatt));
    CHECK_THROWS_AS(mean_intracavity_photons(-1.0), Error);
}
