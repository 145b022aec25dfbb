#include <catch_amalgamated.hpp>

#include <cmath>

#include "sqzlab/inference.hpp"
#include "sqzlab/random.hpp"

using Catch::Approx;
using namespace sqz;

TEST_CASE("jitter from the reference pairs is about 18 mrad", "[inference]") {
    const auto fit = fit_phase_jitter({-5.57, 13.80, 5e3}, {-5.70, 13.68, 5e3});
    CHECK(fit.jitter.rms == Approx(0.018).margin(0.0015));
    CHECK(fit.from_squeezing == Approx(0.018).margin(0.0015));
    CHECK(std::isnan(fit.from_anti_squeezing));
}

TEST_CASE("identical pairs give zero jitter", "[inference]") {
    const auto fit = fit_phase_jitter({-5.70, 13.68, 0}, {-5.70, 13.68, 0});
    CHECK(fit.jitter.rms == 0.0);
    CHECK(fit.residual_db == Approx(0.0).margin(1e-12));
}

TEST_CASE("synthetic jitter round trips", "[inference][property]") {
    const MeasurementPair ideal{-7.0, 12.0, 0};
    for (double theta : {0.001, 0.01, 0.018, 0.05, 0.2}) {
        const auto m = apply_phase_jitter(ideal.linear(), PhaseJitter{theta});
        const auto fit = fit_phase_jitter({to_db(m.r_minus), to_db(m.r_plus), 0}, ideal);
        CHECK(std::abs(fit.jitter.rms - theta) < 1e-4);
        CHECK(fit.from_squeezing == Approx(theta).margin(1e-9));
        CHECK(fit.from_anti_squeezing == Approx(theta).margin(1e-9));
    }
}

TEST_CASE("jitter fit rejects inconsistent data", "[inference][errors]") {
    CHECK_THROWS_AS(fit_phase_jitter({-6.0, 13.68, 0}, {-5.70, 13.68, 0}), Error);
    CHECK_THROWS_AS(fit_phase_jitter({-5.0, 3.0, 0}, {3.0, -5.0, 0}), Error);
}

TEST_CASE("operating point round trips to 1e-6", "[inference][property]") {
    auto rng = make_engine(5);
    std::uniform_real_distribution<double> ux(0.05, 0.95), uk(0.1, 1.0), uw(0.0, 2.0);
    for (int i = 0; i < 2000; ++i) {
        const double x = ux(rng), k = uk(rng), w = uw(rng);
        const auto p = squeezing_spectrum(x, k, w);
        const auto fit = fit_opa_operating_point({to_db(p.r_minus), to_db(p.r_plus), 0}, w);
        REQUIRE(fit.x == Approx(x).margin(1e-6));
        REQUIRE(fit.total_efficiency == Approx(k).margin(1e-6));
    }
}

TEST_CASE("reference pair implies x near 0.69", "[inference]") {
    const auto fit = fit_opa_operating_point({-5.70, 13.68, 0});
    CHECK(fit.x == Approx(0.6936).margin(1e-3));
    CHECK(fit.total_efficiency == Approx(0.7556).margin(1e-3));
}

TEST_CASE("operating point edge cases", "[inference][errors]") {
    const auto vac = fit_opa_operating_point({0.0, 0.0, 0});
    CHECK(vac.x == 0.0);
    CHECK_FALSE(vac.efficiency_determined);
    CHECK_THROWS_AS(fit_opa_operating_point({-3.0, 1.0, 0}), Error);
    CHECK_THROWS_AS(fit_opa_operating_point({1.0, 3.0, 0}), Error);
    CHECK_THROWS_AS(fit_opa_operating_point({-20.0, 10.0, 0}), Error);
}

TEST_CASE("bisection finds a bracketed root", "[inference]") {
    CHECK(bisect([](double x) { return x * x - 2.0; }, 0.0, 2.0) == Approx(std::sqrt(2.0)).margin(1e-11));
    CHECK_THROWS_AS(bisect([](double x) { return x * x + 1.0; }, 0.0, 2.0), Error);
}

TEST_CASE("stability metrics of a linear drift", "[inference]") {
    std::vector<double> v(3600);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = -5.5 + 0.1 * static_cast<double>(i) / 3600.0;
    const auto m = stability_metrics(TimeSeries(1.0, v));
    CHECK(m.drift_db_per_hour == Approx(0.1).epsilon(1e-6));
    CHECK(m.peak_to_peak_db == Approx(0.1 * 3599.0 / 3600.0).epsilon(1e-9));
    CHECK(m.std_db == Approx(0.1 / std::sqrt(12.0)).epsilon(1e-3));
    CHECK_THROWS_AS(stability_metrics(TimeSeries(1.0, 5)), Error);
}
