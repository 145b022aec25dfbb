#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "sqzlab/config.hpp"
#include "sqzlab/inference.hpp"
#include "sqzlab/locking.hpp"
#include "sqzlab/noise.hpp"
#include "sqzlab/scenarios.hpp"

using Catch::Approx;
using namespace sqz;

TEST_CASE("lock-in recovers the in-phase amplitude", "[locking]") {
    const double fs = 1e5;
    LockInConfig c;
    c.mod_frequency = 5e3;
    c.lpf_cutoff = 50.0;
    TimeSeries s(fs, 50000);
    for (std::size_t i = 0; i < s.size(); ++i)
        s.samples[i] = 3.0 + 0.4 * std::sin(2 * std::numbers::pi * c.mod_frequency * s.time(i));
    const auto out = lock_in_demodulate(s, c);
    CHECK(out.samples.back() == Approx(0.4).epsilon(1e-3));
    c.demod_phase = std::numbers::pi / 2;
    CHECK(lock_in_demodulate(s, c).samples.back() == Approx(0.0).margin(1e-3));
    c.mod_frequency = 6e4;
    CHECK_THROWS_AS(lock_in_demodulate(s, c), Error);
}

TEST_CASE("PID step obeys gains, sign and clamp", "[locking]") {
    PidConfig c;
    c.kp = 2.0;
    c.ki = 10.0;
    c.output_limit = 1.0;
    PidState st;
    CHECK(pid_step(c, st, 0.01, 0.1) == Approx(2.0 * 0.01 + 10.0 * 0.01 * 0.1));
    c.sign = -1;
    PidState neg;
    CHECK(pid_step(c, neg, 0.01, 0.1) == Approx(-(2.0 * 0.01 + 0.01)));
    c.sign = 1;
    PidState sat;
    for (int i = 0; i < 100; ++i) CHECK(pid_step(c, sat, 1.0, 0.1) <= 1.0);
    CHECK(sat.integral <= 1.0);
    // Anti-windup: the output leaves the rail as soon as the error reverses.
    CHECK(pid_step(c, sat, -0.1, 0.1) < 1.0);
    CHECK_THROWS_AS(pid_step(c, sat, 0.0, 0.0), Error);
}

TEST_CASE("quantum noise lock holds the squeezed quadrature", "[locking]") {
    const ScenarioConfig cfg;
    QuantumNoisePlant::Config pc;
    pc.model = plant_model(cfg);
    PidConfig pid = cfg.locks.lo.pid;
    pid.sign = -1;
    DitherLoopOptions opt;
    opt.scan_duration = 0.2;
    const auto r = quantum_noise_lock(pc, cfg.locks.lo.lockin, pid, nullptr, 1.5, 9, opt);
    CAPTURE(r.diagnostic);
    CHECK(r.locked);
    CHECK(r.rms_error < 0.005);
}

TEST_CASE("quantum noise lock refuses a pump-off plant", "[locking]") {
    const ScenarioConfig cfg;
    QuantumNoisePlant::Config pc;
    pc.model = SqueezerModel::vacuum();
    DitherLoopOptions opt;
    opt.scan_duration = 0.2;
    const auto r = quantum_noise_lock(pc, cfg.locks.lo.lockin, cfg.locks.lo.pid, nullptr, 0.5, 9, opt);
    CHECK_FALSE(r.locked);
    CHECK(r.diagnostic.find("no fringe") != std::string::npos);
}

TEST_CASE("SPCM plant fringe follows the count-rate model", "[locking]") {
    SpcmPlant::Config pc;
    SpcmPlant plant(pc, 1);
    CHECK(plant.rate(0.0) == Approx(count_rate_model(pc.params, 3.0, 0.0, pc.spcm, pc.calibration)));
    CHECK(plant.rate(std::numbers::pi) ==
          Approx(count_rate_model(pc.params, 3.0, std::numbers::pi, pc.spcm, pc.calibration)));
}

TEST_CASE("single-photon lock reaches both targets against drift", "[locking]") {
    ScenarioConfig cfg;
    cfg.duration = 8.0;
    for (double target : {0.0, std::numbers::pi}) {
        const auto r = lock_demo(cfg, target);
        CAPTURE(target, r.lock.diagnostic, r.lock.rms_error);
        CHECK(r.lock.locked);
        CHECK(r.lock.rms_error < 0.030);
        CHECK(r.count_rate.size() == r.phase_error.size());
        CHECK(r.bin_width == Approx(0.020));
    }
}

TEST_CASE("single-photon lock without probe never reports a lock", "[locking]") {
    ScenarioConfig cfg;
    cfg.duration = 2.0;
    cfg.lock_demo.target_zero.probe_power_nw = 0.0;
    const auto r = lock_demo(cfg, 0.0);
    CHECK_FALSE(r.lock.locked);
    CHECK(r.lock.diagnostic.find("no fringe") != std::string::npos);
}

TEST_CASE("lock targets other than 0 and pi are rejected", "[locking][errors]") {
    const ScenarioConfig cfg;
    CHECK_THROWS_AS(lock_demo(cfg, 1.0), Error);
}
