#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "eebo/acquisition.hpp"
#include "eebo/detail/lbfgs.hpp"
#include "eebo/gp.hpp"
#include "eebo/pareto.hpp"
#include "eebo/rng.hpp"

namespace eebo {

enum class Method { LHS, Uniform, Explore, Exploit, EI, PI, UCB, PFRandom, EpsPF, EpsRS };

inline constexpr std::array<std::pair<Method, std::string_view>, 10> kMethodNames{{
    {Method::LHS, "LHS"},
    {Method::Uniform, "Uniform"},
    {Method::Explore, "Explore"},
    {Method::Exploit, "Exploit"},
    {Method::EI, "EI"},
    {Method::PI, "PI"},
    {Method::UCB, "UCB"},
    {Method::PFRandom, "PFRandom"},
    {Method::EpsPF, "EpsPF"},
    {Method::EpsRS, "EpsRS"},
}};

inline std::string_view method_name(Method m) {
    for (const auto& [k, v] : kMethodNames)
        if (k == m) return v;
    throw std::logic_error("method_name: unknown method");
}

inline constexpr double kDefaultEpsilon = 0.1;

/// Selection policy plus its ε for the ε-greedy variants.
struct StrategyId {
    Method method = Method::EI;
    double epsilon = kDefaultEpsilon;

    bool is_eps_greedy() const { return method == Method::EpsPF || method == Method::EpsRS; }
    bool needs_model() const { return method != Method::LHS && method != Method::Uniform; }

    /// "EpsPF_eps0.1" for ε-greedy methods, the bare name otherwise.
    std::string label() const {
        std::string s(method_name(method));
        if (is_eps_greedy()) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "_eps%g", epsilon);
            s += buf;
        }
        return s;
    }

    /// Accepts a bare method name or a label as produced by label().
    static StrategyId parse(std::string_view text, std::optional<double> epsilon = std::nullopt) {
        std::string_view name = text;
        std::optional<double> eps = epsilon;
        if (const auto pos = text.find("_eps"); pos != std::string_view::npos) {
            name = text.substr(0, pos);
            const std::string num(text.substr(pos + 4));
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(num, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != num.size() || num.empty())
                throw std::invalid_argument("StrategyId: bad epsilon in '" + std::string(text) + "'");
            if (!eps) eps = v;
        }
        for (const auto& [k, v] : kMethodNames) {
            if (v != name) continue;
            StrategyId id{k, eps.value_or(kDefaultEpsilon)};
            if (!id.is_eps_greedy() && eps && text.find("_eps") != std::string_view::npos)
                throw std::invalid_argument("StrategyId: epsilon given for non ε-greedy method");
            if (id.epsilon < 0.0 || id.epsilon > 1.0)
                throw std::invalid_argument("StrategyId: epsilon must lie in [0, 1]");
            return id;
        }
        throw std::invalid_argument("StrategyId: unknown method '" + std::string(name) + "'");
    }
};

enum class Branch { None, Greedy, Exploratory };

inline std::string_view branch_name(Branch b) {
    switch (b) {
        case Branch::Greedy: return "greedy";
        case Branch::Exploratory: return "explore";
        case Branch::None: break;
    }
    return "none";
}

/// What a selection call chose and why. `acq_value` is the criterion the
/// policy maximised at x (μ for Exploit and PFRandom, σ for Explore).
struct SelectionTrace {
    Eigen::VectorXd x;
    Branch branch = Branch::None;
    std::size_t archive_size = 0;
    double acq_value = 0.0;
    long model_evaluations = 0;
    bool perturbed = false;
};

struct PiOptions {
    int samples_per_dim = 1000;
    int n_refine = 10;
    long budget_per_dim = 5000;
};

/// Everything a policy reads. `t` is the index of the evaluation being chosen.
struct SelectionContext {
    const GpModel& model;
    Rng& strategy_rng;
    Rng& moea_rng;
    int t = 1;
    MoeaParams moea;
    PiOptions pi{};
};

inline SelectionContext make_context(const GpModel& model, Rng& strategy_rng, Rng& moea_rng, int t) {
    return {model, strategy_rng, moea_rng, t, MoeaParams::for_dimension(static_cast<int>(model.dim()))};
}

/// NSGA-II approximation of the (μ, σ) front with the best observed input
/// injected into the initial population.
inline ParetoArchive build_archive(const SelectionContext& ctx) {
    const auto& data = ctx.model.dataset();
    const std::vector<Eigen::VectorXd> seeds{data.X().row(data.best_index()).transpose()};
    auto evaluator = [&](const Eigen::MatrixXd& pts) {
        const auto preds = predict_many(ctx.model, pts);
        std::vector<Objectives> out(preds.size());
        for (std::size_t i = 0; i < preds.size(); ++i) out[i] = {preds[i].mu, preds[i].sigma};
        return out;
    };
    return nsga2(evaluator, ctx.moea, ctx.moea_rng, seeds);
}

enum class ScalarCriterion { EI, UCB, Exploit, Explore };

/// Archive member maximising a scalar criterion (first on ties).
inline SelectionTrace select_scalar_acq(const SelectionContext& ctx, ScalarCriterion kind) {
    const ParetoArchive archive = build_archive(ctx);
    const double f_star = ctx.model.dataset().best_y();
    double beta = 0.0;
    if (kind == ScalarCriterion::UCB)
        beta = beta_schedule({.d = static_cast<int>(ctx.model.dim()), .t = ctx.t});
    auto score = [&](const Objectives& o) {
        switch (kind) {
            case ScalarCriterion::EI: return ei({o.mu, o.sigma, f_star});
            case ScalarCriterion::UCB: return ucb({o.mu, o.sigma, f_star}, beta);
            case ScalarCriterion::Exploit: return o.mu;
            case ScalarCriterion::Explore: return o.sigma;
        }
        return o.mu;
    };
    std::size_t best;
    if (kind == ScalarCriterion::Exploit) {
        best = archive.best_mu_index();
    } else if (kind == ScalarCriterion::Explore) {
        best = archive.best_sigma_index();
    } else {
        best = 0;
        double best_v = score(archive.members[0].obj);
        for (std::size_t i = 1; i < archive.size(); ++i) {
            const double v = score(archive.members[i].obj);
            if (v > best_v) {
                best_v = v;
                best = i;
            }
        }
    }
    const auto& m = archive.members[best];
    return {m.x, Branch::None, archive.size(), score(m.obj), archive.evaluations};
}

/// Uniformly chosen member of the archive.
inline SelectionTrace select_pf_random(const SelectionContext& ctx) {
    const ParetoArchive archive = build_archive(ctx);
    const auto& m = archive.members[ctx.strategy_rng.index(archive.size())];
    return {m.x, Branch::Exploratory, archive.size(), m.obj.mu, archive.evaluations};
}

/// ε-greedy with Pareto-front exploration. The coin is drawn from the
/// strategy stream before the archive is built; the greedy branch returns the
/// archive's largest-μ member.
inline SelectionTrace select_eps_pf(const SelectionContext& ctx, double epsilon) {
    if (epsilon < 0.0 || epsilon > 1.0) throw std::invalid_argument("select_eps_pf: epsilon must lie in [0, 1]");
    const bool explore = ctx.strategy_rng.uniform() < epsilon;
    const ParetoArchive archive = build_archive(ctx);
    const std::size_t pick = explore ? ctx.strategy_rng.index(archive.size()) : archive.best_mu_index();
    const auto& m = archive.members[pick];
    return {m.x, explore ? Branch::Exploratory : Branch::Greedy, archive.size(), m.obj.mu, archive.evaluations};
}

/// ε-greedy with uniform exploration of the cube; the exploratory branch
/// skips the evolutionary search entirely.
inline SelectionTrace select_eps_rs(const SelectionContext& ctx, double epsilon) {
    if (epsilon < 0.0 || epsilon > 1.0) throw std::invalid_argument("select_eps_rs: epsilon must lie in [0, 1]");
    const bool explore = ctx.strategy_rng.uniform() < epsilon;
    if (explore) {
        Eigen::VectorXd x(ctx.model.dim());
        for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = ctx.strategy_rng.uniform();
        return {x, Branch::Exploratory, 0, predict(ctx.model, x).mu, 1};
    }
    const ParetoArchive archive = build_archive(ctx);
    const auto& m = archive.members[archive.best_mu_index()];
    return {m.x, Branch::Greedy, archive.size(), m.obj.mu, archive.evaluations};
}

/// Probability of improvement by uniform sampling plus bounded quasi-Newton
/// refinement (central-difference gradients) of the `n_refine` best samples.
/// Total model evaluations stay within budget_per_dim · d.
inline SelectionTrace select_pi(const SelectionContext& ctx) {
    const Eigen::Index d = ctx.model.dim();
    const double f_star = ctx.model.dataset().best_y();
    const long n_samples = static_cast<long>(ctx.pi.samples_per_dim) * d;
    const long budget = ctx.pi.budget_per_dim * d;
    if (n_samples < 1 || n_samples > budget) throw std::invalid_argument("select_pi: sample count exceeds budget");

    Eigen::MatrixXd pts(n_samples, d);
    for (Eigen::Index i = 0; i < n_samples; ++i)
        for (Eigen::Index j = 0; j < d; ++j) pts(i, j) = ctx.strategy_rng.uniform();
    const auto preds = predict_many(ctx.model, pts);
    std::vector<double> values(preds.size());
    for (std::size_t i = 0; i < preds.size(); ++i) values[i] = pi({preds[i].mu, preds[i].sigma, f_star});
    long evaluations = n_samples;

    // Indices of the best samples, stable so earlier samples win ties.
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    const auto n_refine = std::min<std::size_t>(static_cast<std::size_t>(std::max(0, ctx.pi.n_refine)), order.size());
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });

    Eigen::VectorXd best_x = pts.row(static_cast<Eigen::Index>(order[0])).transpose();
    double best_v = values[order[0]];

    if (n_refine > 0) {
        const long per_start = (budget - n_samples) / static_cast<long>(n_refine);
        const long per_call = 2 * d + 1;
        const Eigen::VectorXd lo = Eigen::VectorXd::Zero(d);
        const Eigen::VectorXd hi = Eigen::VectorXd::Ones(d);
        long used = 0;
        auto neg_pi = [&](const Eigen::VectorXd& x) {
            ++used;
            const auto p = predict(ctx.model, x);
            return -pi({p.mu, p.sigma, f_star});
        };
        for (std::size_t k = 0; k < n_refine; ++k) {
            const Eigen::VectorXd x0 = pts.row(static_cast<Eigen::Index>(order[k])).transpose();
            detail::LbfgsOptions opt;
            opt.max_iterations = 50;
            opt.gtol = 1e-9;
            opt.max_evaluations = static_cast<int>(std::max<long>(1, per_start / per_call));
            used = 0;
            auto fg = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
                return detail::numeric_gradient(neg_pi, x, lo, hi, g);
            };
            const auto res = detail::minimize_box(fg, x0, lo, hi, opt);
            evaluations += used;
            if (!res.failed && -res.f > best_v) {
                best_v = -res.f;
                best_x = res.x;
            }
        }
    }
    return {best_x, Branch::None, 0, best_v, evaluations};
}

/// Minimum Euclidean distance from x to the rows of X.
inline double min_distance(const Eigen::VectorXd& x, const Eigen::MatrixXd& X) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < X.rows(); ++i) best = std::min(best, (X.row(i).transpose() - x).squaredNorm());
    return std::sqrt(best);
}

inline constexpr double kDuplicateDistance = 1e-8;
inline constexpr double kDuplicateRadius = 1e-6;

/// Nudges a proposal that (nearly) repeats an observed input by uniform noise
/// of radius 1e-6, clipped to the cube. Returns true when it perturbed.
inline bool duplicate_guard(Eigen::VectorXd& x, const Eigen::MatrixXd& observed, Rng& rng) {
    if (observed.rows() == 0 || min_distance(x, observed) >= kDuplicateDistance) return false;
    for (int attempt = 0; attempt < 16; ++attempt) {
        Eigen::VectorXd y = x;
        for (Eigen::Index i = 0; i < y.size(); ++i)
            y[i] = std::clamp(y[i] + rng.uniform(-kDuplicateRadius, kDuplicateRadius), 0.0, 1.0);
        if (min_distance(y, observed) >= kDuplicateDistance || attempt == 15) {
            x = y;
            break;
        }
    }
    return true;
}

/// Dispatch for the model-based policies.
inline SelectionTrace select(const StrategyId& id, const SelectionContext& ctx) {
    switch (id.method) {
        case Method::Explore: return select_scalar_acq(ctx, ScalarCriterion::Explore);
        case Method::Exploit: return select_scalar_acq(ctx, ScalarCriterion::Exploit);
        case Method::EI: return select_scalar_acq(ctx, ScalarCriterion::EI);
        case Method::UCB: return select_scalar_acq(ctx, ScalarCriterion::UCB);
        case Method::PI: return select_pi(ctx);
        case Method::PFRandom: return select_pf_random(ctx);
        case Method::EpsPF: return select_eps_pf(ctx, id.epsilon);
        case Method::EpsRS: return select_eps_rs(ctx, id.epsilon);
        case Method::LHS:
        case Method::Uniform: break;
    }
    throw std::invalid_argument("select: " + id.label() + " does not select from a model");
}

}  // namespace eebo
