#pragma once

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace eebo {

struct UnknownProblemError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ProblemDomainError : std::domain_error {
    using std::domain_error::domain_error;
};

enum class Transform { None, Log };

/// A minimisation benchmark on a box domain.
///
/// `raw` is the untransformed g(x); `evaluate` applies the registered
/// transform f = log(g + shift) (or −log(−g) for Hartmann6, see `negate_log`)
/// and the sign flips for WangFreitas and Cosines. Reference optima were
/// computed offline by tools/compute_reference_optima.py.
struct Problem {
    std::string id;
    int d = 0;
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
    Transform transform = Transform::None;
    double shift = 0.0;
    bool negate_log = false;
    std::function<double(const Eigen::VectorXd&)> raw;
    double f_opt_ref = 0.0;
    std::string provenance;
    std::string note;

    bool in_domain(const Eigen::VectorXd& x, double tol = 1e-12) const {
        if (x.size() != d) return false;
        for (int i = 0; i < d; ++i)
            if (x[i] < lower[i] - tol || x[i] > upper[i] + tol) return false;
        return true;
    }

    /// The quantity the log is taken of; equals g for untransformed problems.
    double pre_log(const Eigen::VectorXd& x) const {
        const double g = raw(x);
        return negate_log ? -g : g + shift;
    }

    double evaluate(const Eigen::VectorXd& x) const {
        if (!in_domain(x)) throw ProblemDomainError(id + ": point outside the domain");
        if (transform == Transform::None) return raw(x);
        const double arg = pre_log(x);
        if (!(arg > 0.0)) throw ProblemDomainError(id + ": log argument is not positive");
        return negate_log ? -std::log(arg) : std::log(arg);
    }

    Eigen::VectorXd to_unit_cube(const Eigen::VectorXd& x_native) const {
        return ((x_native - lower).array() / (upper - lower).array()).matrix();
    }

    Eigen::VectorXd from_unit_cube(const Eigen::VectorXd& x_unit) const {
        return (lower.array() + x_unit.array() * (upper - lower).array()).matrix();
    }
};

namespace fn {

inline double wang_freitas(const Eigen::VectorXd& x) {
    constexpr double a = 0.1, b = 0.9, t1 = 0.1, t2 = 0.01;
    const double u = (x[0] - a) / t1;
    const double v = (x[0] - b) / t2;
    return -(2.0 * std::exp(-0.5 * u * u) + 4.0 * std::exp(-0.5 * v * v));
}

inline double branin(const Eigen::VectorXd& x) {
    constexpr double pi = std::numbers::pi;
    const double b = 5.1 / (4.0 * pi * pi), c = 5.0 / pi, r = 6.0, s = 10.0, t = 1.0 / (8.0 * pi);
    const double q = x[1] - b * x[0] * x[0] + c * x[0] - r;
    return q * q + s * (1.0 - t) * std::cos(x[0]) + s;
}

inline double branin_forrester(const Eigen::VectorXd& x) { return branin(x) + 5.0 * x[0]; }

inline double cosines(const Eigen::VectorXd& x) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double u = 1.6 * x[i] - 0.5;
        sum += u * u - 0.3 * std::cos(3.0 * std::numbers::pi * u);
    }
    return -(1.0 - sum);
}

inline double goldstein_price(const Eigen::VectorXd& x) {
    const double x1 = x[0], x2 = x[1];
    const double a = 1.0 + (x1 + x2 + 1.0) * (x1 + x2 + 1.0) *
                               (19.0 - 14.0 * x1 + 3.0 * x1 * x1 - 14.0 * x2 + 6.0 * x1 * x2 + 3.0 * x2 * x2);
    const double b = 30.0 + (2.0 * x1 - 3.0 * x2) * (2.0 * x1 - 3.0 * x2) *
                                (18.0 - 32.0 * x1 + 12.0 * x1 * x1 + 48.0 * x2 - 36.0 * x1 * x2 + 27.0 * x2 * x2);
    return a * b;
}

inline double six_hump_camel(const Eigen::VectorXd& x) {
    const double x1 = x[0], x2 = x[1];
    return (4.0 - 2.1 * x1 * x1 + x1 * x1 * x1 * x1 / 3.0) * x1 * x1 + x1 * x2 + (-4.0 + 4.0 * x2 * x2) * x2 * x2;
}

inline constexpr std::array<double, 4> kHartmannAlpha{1.0, 1.2, 3.0, 3.2};
inline constexpr std::array<std::array<double, 6>, 4> kHartmannA{{
    {10.0, 3.0, 17.0, 3.50, 1.7, 8.0},
    {0.05, 10.0, 17.0, 0.1, 8.0, 14.0},
    {3.0, 3.5, 1.7, 10.0, 17.0, 8.0},
    {17.0, 8.0, 0.05, 10.0, 0.1, 14.0},
}};
// P scaled by 1e4
inline constexpr std::array<std::array<double, 6>, 4> kHartmannP{{
    {1312, 1696, 5569, 124, 8283, 5886},
    {2329, 4135, 8307, 3736, 1004, 9991},
    {2348, 1451, 3522, 2883, 3047, 6650},
    {4047, 8828, 8732, 5743, 1091, 381},
}};

inline double hartmann6(const Eigen::VectorXd& x) {
    double outer = 0.0;
    for (int i = 0; i < 4; ++i) {
        double inner = 0.0;
        for (int j = 0; j < 6; ++j) {
            const double diff = x[j] - 1e-4 * kHartmannP[i][j];
            inner += kHartmannA[i][j] * diff * diff;
        }
        outer += kHartmannAlpha[i] * std::exp(-inner);
    }
    return -outer;
}

/// ∏ |4x_i − 1| / 2 (absolute-value G-Sobol variant).
inline double gsobol_abs(const Eigen::VectorXd& x) {
    double p = 1.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) p *= std::abs(4.0 * x[i] - 1.0) / 2.0;
    return p;
}

/// ∏ (4x_i − 1) / 2 as printed; may be non-positive.
inline double gsobol_printed(const Eigen::VectorXd& x) {
    double p = 1.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) p *= (4.0 * x[i] - 1.0) / 2.0;
    return p;
}

inline double rosenbrock(const Eigen::VectorXd& x) {
    double s = 0.0;
    for (Eigen::Index i = 0; i + 1 < x.size(); ++i) {
        const double a = x[i + 1] - x[i] * x[i];
        const double b = x[i] - 1.0;
        s += 100.0 * a * a + b * b;
    }
    return s;
}

inline double styblinski_tang(const Eigen::VectorXd& x) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) s += x[i] * x[i] * x[i] * x[i] - 16.0 * x[i] * x[i] + 5.0 * x[i];
    return 0.5 * s;
}

}  // namespace fn

namespace detail {

inline Problem make_problem(std::string id, Eigen::VectorXd lo, Eigen::VectorXd hi,
                            std::function<double(const Eigen::VectorXd&)> raw, double f_opt, std::string provenance,
                            Transform transform = Transform::None, double shift = 0.0, bool negate_log = false,
                            std::string note = {}) {
    Problem p;
    p.id = std::move(id);
    p.d = static_cast<int>(lo.size());
    p.lower = std::move(lo);
    p.upper = std::move(hi);
    p.raw = std::move(raw);
    p.f_opt_ref = f_opt;
    p.provenance = std::move(provenance);
    p.transform = transform;
    p.shift = shift;
    p.negate_log = negate_log;
    p.note = std::move(note);
    return p;
}

inline Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

inline Eigen::VectorXd fill(int d, double v) { return Eigen::VectorXd::Constant(d, v); }

}  // namespace detail

inline constexpr double kSixHumpShift = 1.0316 + 1e-4;
inline constexpr double kGSobolShift = 1e-4;
inline constexpr double kRosenbrockShift = 0.5;
inline constexpr double kStyblinskiTangShiftPerDim = 40.0;

/// Every registered problem, in catalogue order: the ten log-scale benchmarks,
/// the six untransformed variants, then the as-printed logGSobol.
inline const std::vector<Problem>& problem_registry() {
    static const std::vector<Problem> registry = [] {
        using detail::fill;
        using detail::make_problem;
        using detail::vec;
        const std::string brute2 = "oracle: 1e5 uniform starts, best 1000 refined by L-BFGS-B";
        const std::string bruteN = "oracle: 1e6 uniform samples, best 100 refined by L-BFGS-B";
        const std::string viaG = " (monotone transform of the untransformed optimum)";
        std::vector<Problem> r;
        r.push_back(make_problem("WangFreitas", vec({0.0}), vec({1.0}), fn::wang_freitas, -4.000000000000026, brute2));
        r.push_back(make_problem("Branin", vec({-5.0, 0.0}), vec({10.0, 15.0}), fn::branin, 0.397887357729738, brute2));
        r.push_back(make_problem("BraninForrester", vec({-5.0, 0.0}), vec({10.0, 15.0}), fn::branin_forrester,
                                 -16.6440215708432, brute2));
        r.push_back(make_problem("Cosines", vec({0.0, 0.0}), vec({5.0, 5.0}), fn::cosines, -1.6, brute2));
        r.push_back(make_problem("logGoldsteinPrice", vec({-2.0, -2.0}), vec({2.0, 2.0}), fn::goldstein_price,
                                 1.0986122886681098, brute2 + viaG, Transform::Log, 0.0));
        r.push_back(make_problem("logSixHumpCamel", vec({-3.0, -2.0}), vec({3.0, 2.0}), fn::six_hump_camel,
                                 -9.545162828516231, brute2 + viaG, Transform::Log, kSixHumpShift));
        r.push_back(make_problem("logHartmann6", fill(6, 0.0), fill(6, 1.0), fn::hartmann6, -1.2006777851323585,
                                 bruteN + viaG, Transform::Log, 0.0, true));
        r.push_back(make_problem("logGSobol", fill(10, -5.0), fill(10, 5.0), fn::gsobol_abs, -9.210340371976182,
                                 bruteN + viaG, Transform::Log, kGSobolShift, false,
                                 "absolute value per factor plus 1e-4 shift before the log"));
        r.push_back(make_problem("logRosenbrock", fill(10, -5.0), fill(10, 10.0), fn::rosenbrock, -0.6931471805599453,
                                 bruteN + viaG, Transform::Log, kRosenbrockShift));
        r.push_back(make_problem("logStyblinskiTang", fill(10, -5.0), fill(10, 5.0), fn::styblinski_tang,
                                 2.1208645110528215, bruteN + viaG, Transform::Log,
                                 kStyblinskiTangShiftPerDim * 10));
        r.push_back(make_problem("GoldsteinPrice", vec({-2.0, -2.0}), vec({2.0, 2.0}), fn::goldstein_price, 3.0,
                                 brute2 + " (analytic value 3 confirmed)"));
        r.push_back(make_problem("SixHumpCamel", vec({-3.0, -2.0}), vec({3.0, 2.0}), fn::six_hump_camel,
                                 -1.0316284534898774, brute2));
        r.push_back(make_problem("Hartmann6", fill(6, 0.0), fill(6, 1.0), fn::hartmann6, -3.322368011415511, bruteN));
        r.push_back(make_problem("GSobol", fill(10, -5.0), fill(10, 5.0), fn::gsobol_abs, 0.0,
                                 bruteN + " (analytic value 0 at x_i = 1/4 confirmed)", Transform::None, 0.0, false,
                                 "absolute value per factor"));
        r.push_back(make_problem("Rosenbrock", fill(10, -5.0), fill(10, 10.0), fn::rosenbrock, 0.0,
                                 bruteN + " (analytic value 0 confirmed)"));
        r.push_back(make_problem("StyblinskiTang", fill(10, -5.0), fill(10, 5.0), fn::styblinski_tang,
                                 -391.66165703771415, bruteN));
        r.push_back(make_problem("logGSobolPrinted", fill(10, -5.0), fill(10, 5.0), fn::gsobol_printed,
                                 -std::numeric_limits<double>::infinity(), "unbounded below (log of a product tending to 0+)",
                                 Transform::Log, 0.0, false,
                                 "as printed: log of prod (4x_i - 1)/2, undefined where the product is non-positive"));
        return r;
    }();
    return registry;
}

inline const Problem& find_problem(std::string_view id) {
    for (const auto& p : problem_registry())
        if (p.id == id) return p;
    throw UnknownProblemError("unknown problem: " + std::string(id));
}

inline double reference_optimum(std::string_view id) { return find_problem(id).f_opt_ref; }

}  // namespace eebo
