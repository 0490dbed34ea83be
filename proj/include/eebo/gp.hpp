#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "eebo/detail/lbfgs.hpp"
#include "eebo/rng.hpp"

namespace eebo {

/// K + jitter·I was not numerically positive definite.
struct FactorizationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Every hyperparameter restart failed to factorise.
struct FitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Query point outside the unit cube tolerance band.
struct OutOfDomainError : std::domain_error {
    using std::domain_error::domain_error;
};

inline constexpr double kDomainTolerance = 1e-9;
inline constexpr double kSqrt5 = 2.2360679774997896964091736687313;

/// Matérn 5/2 covariance at ARD-scaled distance r.
inline double matern52(double r, double signal_variance = 1.0) noexcept {
    const double sr = kSqrt5 * r;
    return signal_variance * (1.0 + sr + (5.0 / 3.0) * r * r) * std::exp(-sr);
}

/// Observations in the unit cube with standardised targets.
///
/// `y_raw` is whatever the caller models (already negated for minimisation
/// problems so that larger is better); `y` is the zero-mean unit-variance copy
/// the GP is fitted to. A constant `y_raw` (stdev < 1e-12) standardises to the
/// zero vector.
class Dataset {
public:
    Dataset() = default;

    Dataset(Eigen::MatrixXd x_unit, Eigen::VectorXd y_raw, Eigen::VectorXd lower, Eigen::VectorXd upper)
        : x_(std::move(x_unit)), y_raw_(std::move(y_raw)), lower_(std::move(lower)), upper_(std::move(upper)) {
        if (x_.rows() < 1) throw std::invalid_argument("Dataset: at least one observation required");
        if (x_.rows() != y_raw_.size()) throw std::invalid_argument("Dataset: |X| != |y|");
        if (lower_.size() != x_.cols() || upper_.size() != x_.cols())
            throw std::invalid_argument("Dataset: domain bounds do not match dimensionality");
        if ((x_.array() < 0.0).any() || (x_.array() > 1.0).any())
            throw OutOfDomainError("Dataset: inputs must lie in the unit cube");
        if (!y_raw_.allFinite()) throw std::invalid_argument("Dataset: non-finite observation");
        restandardize();
    }

    /// Unit-cube dataset without native-domain metadata.
    static Dataset unit(Eigen::MatrixXd x_unit, Eigen::VectorXd y_raw) {
        const Eigen::Index d = x_unit.cols();
        return Dataset(std::move(x_unit), std::move(y_raw), Eigen::VectorXd::Zero(d), Eigen::VectorXd::Ones(d));
    }

    void append(const Eigen::VectorXd& x_unit, double y_raw) {
        if (x_unit.size() != dim()) throw std::invalid_argument("Dataset::append: dimension mismatch");
        if ((x_unit.array() < 0.0).any() || (x_unit.array() > 1.0).any())
            throw OutOfDomainError("Dataset::append: input outside the unit cube");
        if (!std::isfinite(y_raw)) throw std::invalid_argument("Dataset::append: non-finite observation");
        const Eigen::Index m = size();
        x_.conservativeResize(m + 1, Eigen::NoChange);
        x_.row(m) = x_unit.transpose();
        y_raw_.conservativeResize(m + 1);
        y_raw_[m] = y_raw;
        restandardize();
    }

    Eigen::Index size() const { return x_.rows(); }
    Eigen::Index dim() const { return x_.cols(); }
    const Eigen::MatrixXd& X() const { return x_; }
    const Eigen::VectorXd& y_raw() const { return y_raw_; }
    const Eigen::VectorXd& y() const { return y_; }
    const Eigen::VectorXd& lower() const { return lower_; }
    const Eigen::VectorXd& upper() const { return upper_; }
    double y_mean() const { return mean_; }
    double y_scale() const { return scale_; }
    bool constant_targets() const { return constant_; }

    double standardize(double raw) const { return constant_ ? 0.0 : (raw - mean_) / scale_; }

    /// Index of the largest standardised target (first on ties).
    Eigen::Index best_index() const {
        Eigen::Index best = 0;
        for (Eigen::Index i = 1; i < size(); ++i)
            if (y_[i] > y_[best]) best = i;
        return best;
    }

    /// Incumbent f* in standardised units.
    double best_y() const { return y_[best_index()]; }

private:
    void restandardize() {
        const auto m = static_cast<double>(size());
        mean_ = y_raw_.mean();
        const double var = (y_raw_.array() - mean_).square().sum() / m;
        scale_ = std::sqrt(var);
        constant_ = !(scale_ >= 1e-12);
        if (constant_) {
            scale_ = 1.0;
            y_ = Eigen::VectorXd::Zero(size());
        } else {
            y_ = (y_raw_.array() - mean_) / scale_;
        }
    }

    Eigen::MatrixXd x_;
    Eigen::VectorXd y_raw_;
    Eigen::VectorXd y_;
    Eigen::VectorXd lower_;
    Eigen::VectorXd upper_;
    double mean_ = 0.0;
    double scale_ = 1.0;
    bool constant_ = false;
};

/// ARD Matérn 5/2 hyperparameters. The jitter is fixed, never optimised.
struct Hyperparams {
    Eigen::VectorXd lengthscales;
    double signal_variance = 1.0;
    double jitter = 1e-6;

    static Hyperparams isotropic(Eigen::Index d, double lengthscale, double signal_variance = 1.0,
                                 double jitter = 1e-6) {
        return {Eigen::VectorXd::Constant(d, lengthscale), signal_variance, jitter};
    }

    /// Packed as (log ℓ_1 … log ℓ_d, log σ_f²).
    Eigen::VectorXd to_log() const {
        Eigen::VectorXd v(lengthscales.size() + 1);
        v.head(lengthscales.size()) = lengthscales.array().log();
        v[lengthscales.size()] = std::log(signal_variance);
        return v;
    }

    static Hyperparams from_log(const Eigen::VectorXd& v, double jitter) {
        const Eigen::Index d = v.size() - 1;
        return {v.head(d).array().exp(), std::exp(v[d]), jitter};
    }

    bool valid() const {
        return lengthscales.size() > 0 && (lengthscales.array() > 0.0).all() && lengthscales.allFinite() &&
               signal_variance > 0.0 && std::isfinite(signal_variance) && jitter > 0.0;
    }
};

/// Box for the log-space likelihood search (unit-cube lengthscale units).
struct HyperBounds {
    double lengthscale_min = 1e-2;
    double lengthscale_max = 10.0;
    double signal_variance_min = 1e-4;
    double signal_variance_max = 1e4;

    Eigen::VectorXd log_lower(Eigen::Index d) const {
        Eigen::VectorXd v = Eigen::VectorXd::Constant(d + 1, std::log(lengthscale_min));
        v[d] = std::log(signal_variance_min);
        return v;
    }
    Eigen::VectorXd log_upper(Eigen::Index d) const {
        Eigen::VectorXd v = Eigen::VectorXd::Constant(d + 1, std::log(lengthscale_max));
        v[d] = std::log(signal_variance_max);
        return v;
    }
};

struct GpOptions {
    int restarts = 10;
    double jitter = 1e-6;
    HyperBounds bounds;
    detail::LbfgsOptions lbfgs{.max_iterations = 60, .memory = 8, .gtol = 1e-5, .ftol = 1e-9};
};

struct Prediction {
    double mu = 0.0;
    double sigma = 0.0;
};

namespace detail {

/// Pairwise ARD-scaled Euclidean distances between the rows of x.
inline Eigen::MatrixXd scaled_distances(const Eigen::MatrixXd& x, const Eigen::VectorXd& lengthscales) {
    const Eigen::Index m = x.rows();
    const Eigen::MatrixXd xs = x.array().rowwise() / lengthscales.transpose().array();
    Eigen::MatrixXd r(m, m);
    for (Eigen::Index j = 0; j < m; ++j) {
        r(j, j) = 0.0;
        for (Eigen::Index i = j + 1; i < m; ++i) {
            const double v = (xs.row(i) - xs.row(j)).norm();
            r(i, j) = v;
            r(j, i) = v;
        }
    }
    return r;
}

inline Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& r, const Hyperparams& theta) {
    return r.unaryExpr([&](double v) { return matern52(v, theta.signal_variance); });
}

}  // namespace detail

/// Log marginal likelihood of the standardised targets,
///   −½ log|K| − ½ yᵀK⁻¹y − (M/2) log 2π,
/// with log|K| from the Cholesky diagonal. When `grad_log` is given it
/// receives the gradient w.r.t. (log ℓ, log σ_f²).
/// Throws FactorizationError if K + jitter·I is not positive definite.
inline double log_marginal_likelihood(const Dataset& data, const Hyperparams& theta,
                                      Eigen::VectorXd* grad_log = nullptr) {
    const Eigen::Index m = data.size();
    const Eigen::Index d = data.dim();
    const Eigen::MatrixXd r = detail::scaled_distances(data.X(), theta.lengthscales);
    Eigen::MatrixXd k = detail::kernel_matrix(r, theta);
    Eigen::MatrixXd kj = k;
    kj.diagonal().array() += theta.jitter;
    const Eigen::LLT<Eigen::MatrixXd> llt(kj);
    if (llt.info() != Eigen::Success) throw FactorizationError("log_marginal_likelihood: K is not positive definite");
    const Eigen::VectorXd& y = data.y();
    const Eigen::VectorXd alpha = llt.solve(y);
    const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    const double lml = -0.5 * log_det - 0.5 * y.dot(alpha) - 0.5 * static_cast<double>(m) * std::log(2.0 * std::numbers::pi);
    if (!std::isfinite(lml)) throw FactorizationError("log_marginal_likelihood: non-finite value");

    if (grad_log) {
        // ∂/∂θ = ½ tr((ααᵀ − K⁻¹) ∂K/∂θ)
        Eigen::MatrixXd w = alpha * alpha.transpose() - llt.solve(Eigen::MatrixXd::Identity(m, m));
        grad_log->resize(d + 1);
        (*grad_log)[d] = 0.5 * (w.array() * k.array()).sum();
        // ∂K_ij/∂log ℓ_k = σ_f² (5/3)(1 + √5 r) e^{−√5 r} Δ_k² / ℓ_k²
        Eigen::MatrixXd g(m, m);
        for (Eigen::Index j = 0; j < m; ++j)
            for (Eigen::Index i = 0; i < m; ++i) {
                const double rv = r(i, j);
                g(i, j) = w(i, j) * theta.signal_variance * (5.0 / 3.0) * (1.0 + kSqrt5 * rv) * std::exp(-kSqrt5 * rv);
            }
        for (Eigen::Index dim = 0; dim < d; ++dim) {
            const double inv_l2 = 1.0 / (theta.lengthscales[dim] * theta.lengthscales[dim]);
            double acc = 0.0;
            for (Eigen::Index j = 0; j < m; ++j)
                for (Eigen::Index i = j + 1; i < m; ++i) {
                    const double delta = data.X()(i, dim) - data.X()(j, dim);
                    acc += g(i, j) * delta * delta;
                }
            // off-diagonal pairs counted once above, symmetric partner doubles it
            (*grad_log)[dim] = 0.5 * 2.0 * acc * inv_l2;
        }
    }
    return lml;
}

/// Fitted GP posterior; immutable after construction.
class GpModel {
public:
    GpModel(Dataset data, Hyperparams theta) : data_(std::move(data)), theta_(std::move(theta)) {
        if (!theta_.valid()) throw std::invalid_argument("GpModel: invalid hyperparameters");
        if (theta_.lengthscales.size() != data_.dim())
            throw std::invalid_argument("GpModel: lengthscale count does not match dimensionality");
        const Eigen::MatrixXd r = detail::scaled_distances(data_.X(), theta_.lengthscales);
        Eigen::MatrixXd k = detail::kernel_matrix(r, theta_);
        k.diagonal().array() += theta_.jitter;
        Eigen::LLT<Eigen::MatrixXd> llt(k);
        if (llt.info() != Eigen::Success) throw FactorizationError("GpModel: K is not positive definite");
        chol_ = llt.matrixL();
        alpha_ = llt.solve(data_.y());
        log_likelihood_ = -chol_.diagonal().array().log().sum() - 0.5 * data_.y().dot(alpha_) -
                          0.5 * static_cast<double>(data_.size()) * std::log(2.0 * std::numbers::pi);
    }

    const Dataset& dataset() const { return data_; }
    const Hyperparams& theta() const { return theta_; }
    const Eigen::MatrixXd& cholesky() const { return chol_; }
    const Eigen::VectorXd& alpha() const { return alpha_; }
    double log_likelihood() const { return log_likelihood_; }
    Eigen::Index dim() const { return data_.dim(); }

    /// Cross-covariances κ(X, x) for a unit-cube point.
    Eigen::VectorXd cross_covariance(const Eigen::VectorXd& x) const {
        const Eigen::Index m = data_.size();
        Eigen::VectorXd kx(m);
        const Eigen::ArrayXd inv_l = theta_.lengthscales.array().inverse();
        for (Eigen::Index i = 0; i < m; ++i) {
            const double r = ((data_.X().row(i).transpose().array() - x.array()) * inv_l).matrix().norm();
            kx[i] = matern52(r, theta_.signal_variance);
        }
        return kx;
    }

private:
    Dataset data_;
    Hyperparams theta_;
    Eigen::MatrixXd chol_;
    Eigen::VectorXd alpha_;
    double log_likelihood_ = 0.0;
};

namespace detail {
inline Eigen::VectorXd checked_unit_point(const Eigen::VectorXd& x, Eigen::Index d) {
    if (x.size() != d) throw std::invalid_argument("predict: dimension mismatch");
    Eigen::VectorXd out = x;
    for (Eigen::Index i = 0; i < d; ++i) {
        if (!(x[i] >= -kDomainTolerance && x[i] <= 1.0 + kDomainTolerance))
            throw OutOfDomainError("predict: query outside the unit cube");
        out[i] = std::clamp(x[i], 0.0, 1.0);
    }
    return out;
}
}  // namespace detail

/// Posterior mean and standard deviation at a unit-cube point (standardised scale).
inline Prediction predict(const GpModel& model, const Eigen::VectorXd& x) {
    const Eigen::VectorXd xq = detail::checked_unit_point(x, model.dim());
    const Eigen::VectorXd kx = model.cross_covariance(xq);
    const double mu = kx.dot(model.alpha());
    const Eigen::VectorXd v = model.cholesky().triangularView<Eigen::Lower>().solve(kx);
    const double var = model.theta().signal_variance - v.squaredNorm();
    return {mu, std::sqrt(std::max(0.0, var))};
}

/// Batched prediction; `points` holds one query per row. Agrees with
/// predict() up to floating-point summation order.
inline std::vector<Prediction> predict_many(const GpModel& model, const Eigen::MatrixXd& points) {
    const Eigen::Index n = points.rows();
    const Eigen::Index m = model.dataset().size();
    Eigen::MatrixXd kx(m, n);
    for (Eigen::Index j = 0; j < n; ++j)
        kx.col(j) = model.cross_covariance(detail::checked_unit_point(points.row(j).transpose(), model.dim()));
    const Eigen::VectorXd mu = kx.transpose() * model.alpha();
    model.cholesky().triangularView<Eigen::Lower>().solveInPlace(kx);
    std::vector<Prediction> out(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < n; ++j) {
        const double var = model.theta().signal_variance - kx.col(j).squaredNorm();
        out[static_cast<std::size_t>(j)] = {mu[j], std::sqrt(std::max(0.0, var))};
    }
    return out;
}

struct FitReport {
    int restarts_run = 0;
    int restarts_failed = 0;
    double best_log_likelihood = -std::numeric_limits<double>::infinity();
};

/// Maximum-likelihood fit with `opts.restarts` projected L-BFGS climbs in
/// log-hyperparameter space. Restart 0 starts from `warm_start` when given,
/// the rest from uniform draws in the log box. Throws FitError when every
/// restart fails to factorise.
inline GpModel fit(const Dataset& data, const GpOptions& opts, Rng& rng,
                   const std::optional<Hyperparams>& warm_start = std::nullopt, FitReport* report = nullptr) {
    if (data.size() < 2) throw std::invalid_argument("fit: at least two observations required");
    if (opts.restarts < 1) throw std::invalid_argument("fit: restarts must be >= 1");
    const Eigen::Index d = data.dim();
    const Eigen::VectorXd lo = opts.bounds.log_lower(d);
    const Eigen::VectorXd hi = opts.bounds.log_upper(d);

    auto negative_lml = [&](const Eigen::VectorXd& v, Eigen::VectorXd& grad) {
        try {
            const double lml = log_marginal_likelihood(data, Hyperparams::from_log(v, opts.jitter), &grad);
            grad = -grad;
            return -lml;
        } catch (const FactorizationError&) {
            grad.setZero(v.size());
            return std::numeric_limits<double>::infinity();
        }
    };

    FitReport rep;
    std::optional<Eigen::VectorXd> best;
    double best_f = std::numeric_limits<double>::infinity();
    for (int r = 0; r < opts.restarts; ++r) {
        Eigen::VectorXd x0(d + 1);
        if (r == 0 && warm_start && warm_start->lengthscales.size() == d) {
            x0 = detail::clamp_box(warm_start->to_log(), lo, hi);
        } else {
            for (Eigen::Index i = 0; i <= d; ++i) x0[i] = rng.uniform(lo[i], hi[i]);
        }
        ++rep.restarts_run;
        const auto res = detail::minimize_box(negative_lml, x0, lo, hi, opts.lbfgs);
        if (res.failed || !std::isfinite(res.f)) {
            ++rep.restarts_failed;
            continue;
        }
        if (res.f < best_f) {
            best_f = res.f;
            best = res.x;
        }
    }
    if (!best) throw FitError("fit: all " + std::to_string(opts.restarts) + " restarts failed to factorise K");
    rep.best_log_likelihood = -best_f;
    if (report) *report = rep;
    return GpModel(data, Hyperparams::from_log(*best, opts.jitter));
}

}  // namespace eebo
