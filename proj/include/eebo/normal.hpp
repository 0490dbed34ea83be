#pragma once

#include <cmath>
#include <numbers>

namespace eebo {

inline constexpr double kInvSqrt2Pi = 0.3989422804014326779399460599343819;
inline constexpr double kLogSqrt2Pi = 0.9189385332046727417803297364056176;

/// Standard normal density.
inline double normal_pdf(double s) noexcept { return kInvSqrt2Pi * std::exp(-0.5 * s * s); }

/// Standard normal CDF via erfc; accurate in both tails.
inline double normal_cdf(double s) noexcept { return 0.5 * std::erfc(-s / std::numbers::sqrt2); }

/// s * phi(s) evaluated in log space once |s| > 8 so the product does not
/// lose precision before underflowing.
inline double s_times_pdf(double s) noexcept {
    if (std::abs(s) <= 8.0) return s * normal_pdf(s);
    const double mag = std::exp(std::log(std::abs(s)) - 0.5 * s * s - kLogSqrt2Pi);
    return s < 0.0 ? -mag : mag;
}

/// s^2 * phi(s), log-space in the tails.
inline double s2_times_pdf(double s) noexcept {
    if (std::abs(s) <= 8.0) return s * s * normal_pdf(s);
    return std::exp(2.0 * std::log(std::abs(s)) - 0.5 * s * s - kLogSqrt2Pi);
}

}  // namespace eebo
