#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <vector>

namespace eebo::detail {

struct LbfgsOptions {
    int max_iterations = 100;
    int memory = 8;
    double gtol = 1e-6;   // projected-gradient infinity norm
    double ftol = 1e-10;  // relative decrease between iterations
    int max_evaluations = std::numeric_limits<int>::max();
};

struct LbfgsResult {
    Eigen::VectorXd x;
    double f = std::numeric_limits<double>::infinity();
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
    bool failed = false;  // start point infeasible (non-finite objective)
};

inline Eigen::VectorXd clamp_box(const Eigen::VectorXd& x, const Eigen::VectorXd& lo,
                                 const Eigen::VectorXd& hi) {
    return x.cwiseMax(lo).cwiseMin(hi);
}

/// Box-constrained minimisation by projected L-BFGS with Armijo backtracking
/// along the projected path. `fg(x, grad)` returns f(x) and fills grad; a
/// non-finite return marks x infeasible and makes the line search back off.
template <class ObjectiveGrad>
LbfgsResult minimize_box(ObjectiveGrad&& fg, const Eigen::VectorXd& x0, const Eigen::VectorXd& lo,
                         const Eigen::VectorXd& hi, const LbfgsOptions& opt = {}) {
    const Eigen::Index n = x0.size();
    LbfgsResult res;
    res.x = clamp_box(x0, lo, hi);
    Eigen::VectorXd g(n);
    res.f = fg(res.x, g);
    res.evaluations = 1;
    if (!std::isfinite(res.f) || !g.allFinite()) {
        res.failed = true;
        return res;
    }

    std::deque<Eigen::VectorXd> s_hist, y_hist;
    std::deque<double> rho_hist;
    Eigen::VectorXd g_new(n);

    auto projected_gradient = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& grad) {
        Eigen::VectorXd pg = grad;
        for (Eigen::Index i = 0; i < n; ++i) {
            if ((x[i] <= lo[i] && grad[i] > 0.0) || (x[i] >= hi[i] && grad[i] < 0.0)) pg[i] = 0.0;
        }
        return pg;
    };

    for (res.iterations = 0; res.iterations < opt.max_iterations; ++res.iterations) {
        const Eigen::VectorXd pg = projected_gradient(res.x, g);
        if (pg.lpNorm<Eigen::Infinity>() < opt.gtol) {
            res.converged = true;
            break;
        }

        // Two-loop recursion on the projected gradient.
        Eigen::VectorXd q = pg;
        std::vector<double> alpha(s_hist.size());
        for (std::size_t k = s_hist.size(); k-- > 0;) {
            alpha[k] = rho_hist[k] * s_hist[k].dot(q);
            q -= alpha[k] * y_hist[k];
        }
        if (!s_hist.empty()) q *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
        for (std::size_t k = 0; k < s_hist.size(); ++k) {
            const double beta = rho_hist[k] * y_hist[k].dot(q);
            q += (alpha[k] - beta) * s_hist[k];
        }
        Eigen::VectorXd d = -q;
        for (Eigen::Index i = 0; i < n; ++i) {
            if ((res.x[i] <= lo[i] && d[i] < 0.0) || (res.x[i] >= hi[i] && d[i] > 0.0)) d[i] = 0.0;
        }
        if (d.dot(pg) >= 0.0) {
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            d = -pg;
        }

        double step = s_hist.empty() ? std::min(1.0, 1.0 / d.lpNorm<Eigen::Infinity>()) : 1.0;
        bool accepted = false;
        Eigen::VectorXd x_new;
        double f_new = 0.0;
        for (int bt = 0; bt < 40 && res.evaluations < opt.max_evaluations; ++bt) {
            x_new = clamp_box(res.x + step * d, lo, hi);
            f_new = fg(x_new, g_new);
            ++res.evaluations;
            if (std::isfinite(f_new) && g_new.allFinite() &&
                f_new <= res.f + 1e-4 * g.dot(x_new - res.x)) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;

        const Eigen::VectorXd s = x_new - res.x;
        const Eigen::VectorXd y = g_new - g;
        const double sy = s.dot(y);
        if (sy > 1e-12 * y.squaredNorm() && sy > 0.0) {
            s_hist.push_back(s);
            y_hist.push_back(y);
            rho_hist.push_back(1.0 / sy);
            if (static_cast<int>(s_hist.size()) > opt.memory) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }
        const double decrease = res.f - f_new;
        res.x = x_new;
        res.f = f_new;
        g = g_new;
        if (decrease <= opt.ftol * std::max(1.0, std::abs(res.f))) {
            res.converged = true;
            ++res.iterations;
            break;
        }
        if (res.evaluations >= opt.max_evaluations) break;
    }
    return res;
}

/// Central-difference gradient (one-sided at the box faces).
template <class Objective>
double numeric_gradient(Objective&& f, const Eigen::VectorXd& x, const Eigen::VectorXd& lo,
                        const Eigen::VectorXd& hi, Eigen::VectorXd& grad, double h = 1e-6) {
    const double fx = f(x);
    grad.resize(x.size());
    Eigen::VectorXd xp = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double up = std::min(hi[i], x[i] + h);
        const double dn = std::max(lo[i], x[i] - h);
        xp[i] = up;
        const double fu = f(xp);
        xp[i] = dn;
        const double fd = f(xp);
        xp[i] = x[i];
        grad[i] = (up > dn) ? (fu - fd) / (up - dn) : 0.0;
    }
    return fx;
}

}  // namespace eebo::detail
