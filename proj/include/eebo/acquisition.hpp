#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

#include "eebo/normal.hpp"

namespace eebo {

/// Posterior summary and incumbent, maximisation convention.
struct AcqInput {
    double mu = 0.0;
    double sigma = 0.0;
    double f_star = 0.0;

    /// Normalised improvement s = (μ − f*)/σ; requires σ > 0.
    double s() const { return (mu - f_star) / sigma; }
};

enum class AcqKind { EI, WEI, PI, UCB };

/// Expected improvement σ(sΦ(s) + φ(s)); max(μ − f*, 0) when σ = 0.
inline double ei(const AcqInput& in) {
    if (!(in.sigma > 0.0)) return std::max(in.mu - in.f_star, 0.0);
    const double s = in.s();
    const double v = in.sigma * (s * normal_cdf(s) + normal_pdf(s));
    return std::max(v, 0.0);
}

/// Probability of improvement Φ(s); the indicator μ > f* when σ = 0.
inline double pi(const AcqInput& in) {
    if (!(in.sigma > 0.0)) return in.mu > in.f_star ? 1.0 : 0.0;
    return normal_cdf(in.s());
}

/// Upper confidence bound μ + √β σ.
inline double ucb(const AcqInput& in, double beta_t) {
    if (beta_t < 0.0) throw std::invalid_argument("ucb: beta_t must be non-negative");
    return in.mu + std::sqrt(beta_t) * in.sigma;
}

/// Weighted EI σ[ω sΦ(s) + (1−ω)φ(s)]; ω·max(μ − f*, 0) when σ = 0.
inline double wei(const AcqInput& in, double omega) {
    if (omega < 0.0 || omega > 1.0) throw std::invalid_argument("wei: omega must lie in [0, 1]");
    if (!(in.sigma > 0.0)) return omega * std::max(in.mu - in.f_star, 0.0);
    const double s = in.s();
    return omega * (in.mu - in.f_star) * normal_cdf(s) + (1.0 - omega) * in.sigma * normal_pdf(s);
}

/// Parameters of the continuous-domain UCB exploration schedule.
struct UcbSchedule {
    double a = 1.0;
    double b = 1.0;
    double delta = 0.01;
    int d = 1;
    double r = 1.0;  // domain side length; 1 in the unit cube
    int t = 1;
};

/// β_t = 2 log(t² 2π² / (3δ)) + 2d log(t² d b r √(log(4da/δ))).
inline double beta_schedule(const UcbSchedule& s) {
    if (!(s.delta > 0.0 && s.delta < 1.0)) throw std::invalid_argument("beta_schedule: delta must lie in (0, 1)");
    if (s.t < 1 || s.d < 1) throw std::invalid_argument("beta_schedule: t and d must be >= 1");
    const double t2 = static_cast<double>(s.t) * static_cast<double>(s.t);
    const double d = static_cast<double>(s.d);
    const double inner = std::log(4.0 * d * s.a / s.delta);
    const double first_arg = t2 * 2.0 * std::numbers::pi * std::numbers::pi / (3.0 * s.delta);
    if (!(inner > 0.0) || !(first_arg > 0.0)) throw std::invalid_argument("beta_schedule: non-positive log argument");
    const double second_arg = t2 * d * s.b * s.r * std::sqrt(inner);
    if (!(second_arg > 0.0)) throw std::invalid_argument("beta_schedule: non-positive log argument");
    return 2.0 * std::log(first_arg) + 2.0 * d * std::log(second_arg);
}

/// Monotonicity constant of WEI: γ = sup_{s ≥ 0} sφ(s)/Φ(s) and the
/// smallest weight γ/(2γ+1) for which ∂WEI/∂μ is non-negative everywhere.
struct GammaConstant {
    double gamma;
    double argmax;
    double threshold;
};

inline double gamma_objective(double s) { return s_times_pdf(s) / normal_cdf(s); }

/// Golden-section maximisation of sφ(s)/Φ(s) on [lo, hi] (unimodal on s ≥ 0).
inline GammaConstant gamma_constant(double lo = 0.0, double hi = 10.0, double tol = 1e-10) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = gamma_objective(c), fd = gamma_objective(d);
    while (b - a > tol) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = gamma_objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = gamma_objective(d);
        }
    }
    const double s = 0.5 * (a + b);
    const double g = gamma_objective(s);
    return {g, s, g / (2.0 * g + 1.0)};
}

/// Analytic (∂/∂μ, ∂/∂σ) of an acquisition at σ > 0. `param` is ω for WEI
/// and β_t for UCB; ignored otherwise.
inline std::pair<double, double> acq_partials(AcqKind kind, const AcqInput& in, double param = 0.0) {
    if (!(in.sigma > 0.0)) throw std::invalid_argument("acq_partials: sigma must be positive");
    const double s = in.s();
    const double pdf = normal_pdf(s);
    const double cdf = normal_cdf(s);
    switch (kind) {
        case AcqKind::EI:
            return {cdf, pdf};
        case AcqKind::WEI: {
            const double w = param;
            return {w * cdf + (2.0 * w - 1.0) * s_times_pdf(s), (1.0 - w) * pdf + (1.0 - 2.0 * w) * s2_times_pdf(s)};
        }
        case AcqKind::PI:
            return {pdf / in.sigma, -s_times_pdf(s) / in.sigma};
        case AcqKind::UCB:
            return {1.0, std::sqrt(param)};
    }
    throw std::logic_error("acq_partials: unknown kind");
}

/// Value of an acquisition by kind (same parameter convention as acq_partials).
inline double acq_value(AcqKind kind, const AcqInput& in, double param = 0.0) {
    switch (kind) {
        case AcqKind::EI: return ei(in);
        case AcqKind::WEI: return wei(in, param);
        case AcqKind::PI: return pi(in);
        case AcqKind::UCB: return ucb(in, param);
    }
    throw std::logic_error("acq_value: unknown kind");
}

}  // namespace eebo
