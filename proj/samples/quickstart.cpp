// Evaluates the closed-form spectrum at the default operating point, mixes in a
// residual phase jitter and recovers the jitter from the degraded pair.

#include <cstdio>

#include "sqzlab/sqzlab.hpp"

int main() {
    const sqz::OpaParams opa;
    const sqz::DetectionChain chain;
    for (double f : {1e3, 5e3, 1e6, 10e6}) {
        const auto p = sqz::squeezing_spectrum(opa, chain, f);
        std::printf("%10.0f Hz  squeezing %6.2f dB  anti-squeezing %6.2f dB\n", f, sqz::to_db(p.r_minus),
                    sqz::to_db(p.r_plus));
    }

    const sqz::MeasurementPair ideal{-5.70, 13.68, 5e3};
    const auto mixed = sqz::apply_phase_jitter(ideal.linear(), sqz::PhaseJitter{0.018});
    const sqz::MeasurementPair observed{sqz::to_db(mixed.r_minus), sqz::to_db(mixed.r_plus), 5e3};
    std::printf("18 mrad jitter: %.2f / %.2f dB\n", observed.squeezing_db, observed.anti_squeezing_db);

    const auto fit = sqz::fit_phase_jitter(observed, ideal);
    std::printf("recovered jitter: %.2f mrad\n", fit.jitter.rms * 1e3);

    const auto op = sqz::fit_opa_operating_point(ideal);
    std::printf("operating point: x = %.4f, total efficiency = %.4f\n", op.x, op.total_efficiency);
    return 0;
}
