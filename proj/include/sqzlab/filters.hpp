#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "sqzlab/error.hpp"

namespace sqz {

/// Discrete single-pole low-pass, y += a (x - y), with -3 dB near `cutoff`.
template <class T = double>
class OnePoleLowPass {
public:
    OnePoleLowPass() = default;
    OnePoleLowPass(double cutoff, double sample_rate) { set(cutoff, sample_rate); }

    void set(double cutoff, double sample_rate) {
        detail::require(cutoff > 0.0 && sample_rate > 0.0, ErrorKind::parameter_domain,
                        "low-pass cutoff and sample rate must be positive");
        alpha_ = 1.0 - std::exp(-2.0 * std::numbers::pi * cutoff / sample_rate);
    }
    void reset(T value = T{}) { state_ = value; }
    T operator()(T x) {
        state_ += alpha_ * (x - state_);
        return state_;
    }
    T value() const { return state_; }
    double coefficient() const { return alpha_; }

private:
    double alpha_ = 1.0;
    T state_{};
};

/// N identical single-pole sections in series.
template <class T = double>
class CascadedLowPass {
public:
    CascadedLowPass() = default;
    CascadedLowPass(int order, double cutoff, double sample_rate) : stages_(static_cast<std::size_t>(order)) {
        detail::require(order >= 1, ErrorKind::parameter_domain, "filter order must be >= 1");
        for (auto& s : stages_) s.set(cutoff, sample_rate);
    }
    void reset(T value = T{}) {
        for (auto& s : stages_) s.reset(value);
    }
    T operator()(T x) {
        for (auto& s : stages_) x = s(x);
        return x;
    }

    /// Two-sided equivalent-noise bandwidth in Hz (unit DC gain), from the impulse response.
    static double enbw(int order, double cutoff, double sample_rate) {
        CascadedLowPass<double> f(order, cutoff, sample_rate);
        double sum = 0.0, sum_sq = 0.0, y = f(1.0);
        const double a = f.stages_.front().coefficient();
        const std::size_t max_len = static_cast<std::size_t>(200.0 * order / a) + 64;
        for (std::size_t i = 0; i < max_len; ++i) {
            sum += y;
            sum_sq += y * y;
            y = f(0.0);
        }
        return sample_rate * sum_sq / (sum * sum);
    }

private:
    std::vector<OnePoleLowPass<T>> stages_;
};

/// Linear-phase FIR low-pass with Gaussian taps truncated at +-5 sigma and unit DC gain.
/// Sigma is tuned so the two-sided ENBW, fs * sum(h^2) / sum(h)^2, equals `enbw`.
template <class T = double>
class GaussianLowPass {
public:
    GaussianLowPass() = default;
    GaussianLowPass(double enbw, double sample_rate) {
        detail::require(enbw > 0.0 && enbw <= 0.25 * sample_rate, ErrorKind::parameter_domain,
                        "Gaussian filter ENBW must lie in (0, sample_rate / 4]");
        double sigma = sample_rate / (2.0 * enbw * std::sqrt(std::numbers::pi));  // samples
        for (int iter = 0; iter < 6; ++iter) {
            build(sigma);
            sigma *= enbw_of(sample_rate) / enbw;
        }
        build(sigma);
        buffer_.assign(2 * taps_.size(), T{});
    }

    T operator()(T x) {
        const std::size_t n = taps_.size();
        buffer_[pos_] = x;
        buffer_[pos_ + n] = x;
        pos_ = pos_ + 1 == n ? 0 : pos_ + 1;
        T acc{};
        const T* window = buffer_.data() + pos_;
        for (std::size_t k = 0; k < n; ++k) acc += taps_[k] * window[k];
        return acc;
    }

    std::size_t length() const { return taps_.size(); }
    double enbw_of(double sample_rate) const {
        double sum = 0.0, sum_sq = 0.0;
        for (double h : taps_) {
            sum += h;
            sum_sq += h * h;
        }
        return sample_rate * sum_sq / (sum * sum);
    }

private:
    void build(double sigma) {
        const auto half = static_cast<std::size_t>(std::ceil(5.0 * sigma));
        taps_.assign(2 * half + 1, 0.0);
        double sum = 0.0;
        for (std::size_t k = 0; k < taps_.size(); ++k) {
            const double t = (static_cast<double>(k) - static_cast<double>(half)) / sigma;
            taps_[k] = std::exp(-0.5 * t * t);
            sum += taps_[k];
        }
        for (auto& h : taps_) h /= sum;
    }

    std::vector<double> taps_{1.0};
    std::vector<T> buffer_;
    std::size_t pos_ = 0;
};

/// RBJ constant-peak-gain band-pass biquad (unity gain at center).
class BiquadBandPass {
public:
    BiquadBandPass(double center, double bandwidth, double sample_rate) {
        detail::require(center > 0.0 && bandwidth > 0.0 && center + 0.5 * bandwidth < 0.5 * sample_rate,
                        ErrorKind::parameter_domain, "band-pass must lie below Nyquist");
        const double w0 = 2.0 * std::numbers::pi * center / sample_rate;
        const double q = center / bandwidth;
        const double alpha = std::sin(w0) / (2.0 * q);
        const double a0 = 1.0 + alpha;
        b0_ = alpha / a0;
        b2_ = -alpha / a0;
        a1_ = -2.0 * std::cos(w0) / a0;
        a2_ = (1.0 - alpha) / a0;
    }
    double operator()(double x) {
        const double y = b0_ * x + b2_ * x2_ - a1_ * y1_ - a2_ * y2_;
        x2_ = x1_;
        x1_ = x;
        y2_ = y1_;
        y1_ = y;
        return y;
    }

private:
    double b0_, b2_, a1_, a2_;
    double x1_ = 0, x2_ = 0, y1_ = 0, y2_ = 0;
};

}  // namespace sqz
