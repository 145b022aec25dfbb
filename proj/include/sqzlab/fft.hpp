#pragma once

// Thin RAII layer over FFTW's real-data transforms. Plans are created under a
// process-wide mutex (the FFTW planner is not reentrant) and cached per thread.

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <span>

#include "sqzlab/error.hpp"

namespace sqz {

namespace detail {
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace detail

/// Forward r2c / inverse c2r transform pair of fixed length n. Unnormalized,
/// so inverse(forward(x)) == n * x.
class RealFft {
public:
    explicit RealFft(std::size_t n) : n_(n) {
        detail::require(n >= 2, ErrorKind::too_short, "FFT length must be >= 2");
        real_ = static_cast<double*>(fftw_malloc(sizeof(double) * n));
        spec_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * bins()));
        std::lock_guard lock(detail::fftw_planner_mutex());
        forward_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), real_, spec_, FFTW_ESTIMATE);
        inverse_ = fftw_plan_dft_c2r_1d(static_cast<int>(n), spec_, real_, FFTW_ESTIMATE);
    }

    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;

    ~RealFft() {
        {
            std::lock_guard lock(detail::fftw_planner_mutex());
            fftw_destroy_plan(forward_);
            fftw_destroy_plan(inverse_);
        }
        fftw_free(real_);
        fftw_free(spec_);
    }

    std::size_t size() const noexcept { return n_; }
    std::size_t bins() const noexcept { return n_ / 2 + 1; }

    std::span<double> real() noexcept { return {real_, n_}; }
    std::span<std::complex<double>> spectrum() noexcept {
        return {reinterpret_cast<std::complex<double>*>(spec_), bins()};
    }

    /// real() -> spectrum()
    void forward() { fftw_execute(forward_); }
    /// spectrum() -> real(); destroys spectrum().
    void inverse() { fftw_execute(inverse_); }

private:
    std::size_t n_;
    double* real_ = nullptr;
    fftw_complex* spec_ = nullptr;
    fftw_plan forward_ = nullptr;
    fftw_plan inverse_ = nullptr;
};

/// Per-thread cached transform of length n.
inline RealFft& cached_fft(std::size_t n) {
    thread_local std::map<std::size_t, std::unique_ptr<RealFft>> cache;
    auto& slot = cache[n];
    if (!slot) {
        if (cache.size() > 16) {
            cache.clear();
            return *(cache[n] = std::make_unique<RealFft>(n));
        }
        slot = std::make_unique<RealFft>(n);
    }
    return *slot;
}

}  // namespace sqz
