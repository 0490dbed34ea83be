#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <type_traits>
#include <utility>
#include <vector>

#include "eebo/rng.hpp"

namespace eebo {

/// Exploitation/exploration pair, both maximised.
struct Objectives {
    double mu = 0.0;
    double sigma = 0.0;

    friend bool operator==(const Objectives&, const Objectives&) = default;
};

/// a dominates b: no worse in both objectives and not identical.
inline bool dominates(const Objectives& a, const Objectives& b) noexcept {
    return a.mu >= b.mu && a.sigma >= b.sigma && (a.mu > b.mu || a.sigma > b.sigma);
}

/// Indices of the points no other point dominates. Duplicates of a
/// non-dominated point are all kept. O(n log n): sweep in decreasing μ.
inline std::vector<std::size_t> non_dominated_filter(std::span<const Objectives> pts) {
    if (pts.empty()) throw std::invalid_argument("non_dominated_filter: empty input");
    std::vector<std::size_t> order(pts.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (pts[a].mu != pts[b].mu) return pts[a].mu > pts[b].mu;
        return pts[a].sigma > pts[b].sigma;
    });
    std::vector<std::size_t> keep;
    // best σ among points with strictly larger μ, and among the current μ group
    double best_sigma_above = -std::numeric_limits<double>::infinity();
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        const double mu = pts[order[i]].mu;
        const double group_max_sigma = pts[order[i]].sigma;
        while (j < order.size() && pts[order[j]].mu == mu) {
            const double s = pts[order[j]].sigma;
            if (s == group_max_sigma && s > best_sigma_above) keep.push_back(order[j]);
            ++j;
        }
        best_sigma_above = std::max(best_sigma_above, group_max_sigma);
        i = j;
    }
    std::sort(keep.begin(), keep.end());
    return keep;
}

/// Non-domination rank per point: 0 for the first front, k for the front that
/// is non-dominated once ranks < k are removed.
inline std::vector<int> fast_nondominated_sort(std::span<const Objectives> pts) {
    const std::size_t n = pts.size();
    std::vector<std::vector<std::size_t>> dominated(n);
    std::vector<int> domination_count(n, 0);
    std::vector<int> rank(n, -1);
    std::vector<std::size_t> front;
    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t q = 0; q < n; ++q) {
            if (p == q) continue;
            if (dominates(pts[p], pts[q]))
                dominated[p].push_back(q);
            else if (dominates(pts[q], pts[p]))
                ++domination_count[p];
        }
        if (domination_count[p] == 0) {
            rank[p] = 0;
            front.push_back(p);
        }
    }
    int r = 0;
    while (!front.empty()) {
        std::vector<std::size_t> next;
        for (std::size_t p : front)
            for (std::size_t q : dominated[p])
                if (--domination_count[q] == 0) {
                    rank[q] = r + 1;
                    next.push_back(q);
                }
        ++r;
        front = std::move(next);
    }
    return rank;
}

/// Crowding distance within one front: +∞ at each objective's extremes,
/// otherwise the sum of normalised neighbour gaps.
inline std::vector<double> crowding_distance(std::span<const Objectives> front) {
    const std::size_t n = front.size();
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(n, 0.0);
    if (n <= 2) {
        std::fill(dist.begin(), dist.end(), inf);
        return dist;
    }
    std::vector<std::size_t> order(n);
    for (int m = 0; m < 2; ++m) {
        auto val = [&](std::size_t i) { return m == 0 ? front[i].mu : front[i].sigma; };
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return val(a) < val(b); });
        const double lo = val(order.front());
        const double hi = val(order.back());
        dist[order.front()] = inf;
        dist[order.back()] = inf;
        if (hi <= lo) continue;
        for (std::size_t k = 1; k + 1 < n; ++k)
            dist[order[k]] += (val(order[k + 1]) - val(order[k - 1])) / (hi - lo);
    }
    return dist;
}

/// Simulated binary crossover on the unit box. With probability `prob` the
/// pair is recombined, each variable swapped with probability ½.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> sbx_crossover(const Eigen::VectorXd& p1, const Eigen::VectorXd& p2,
                                                                 double eta, double prob, Rng& rng) {
    Eigen::VectorXd c1 = p1, c2 = p2;
    if (!rng.bernoulli(prob)) return {c1, c2};
    constexpr double lo = 0.0, hi = 1.0;
    for (Eigen::Index i = 0; i < p1.size(); ++i) {
        if (!rng.bernoulli(0.5)) continue;
        if (std::abs(p1[i] - p2[i]) <= 1e-14) continue;
        const double y1 = std::min(p1[i], p2[i]);
        const double y2 = std::max(p1[i], p2[i]);
        const double u = rng.uniform();
        auto betaq = [&](double beta) {
            const double alpha = 2.0 - std::pow(beta, -(eta + 1.0));
            return u <= 1.0 / alpha ? std::pow(u * alpha, 1.0 / (eta + 1.0))
                                    : std::pow(1.0 / (2.0 - u * alpha), 1.0 / (eta + 1.0));
        };
        double v1 = 0.5 * ((y1 + y2) - betaq(1.0 + 2.0 * (y1 - lo) / (y2 - y1)) * (y2 - y1));
        double v2 = 0.5 * ((y1 + y2) + betaq(1.0 + 2.0 * (hi - y2) / (y2 - y1)) * (y2 - y1));
        v1 = std::clamp(v1, lo, hi);
        v2 = std::clamp(v2, lo, hi);
        if (rng.bernoulli(0.5)) std::swap(v1, v2);
        c1[i] = v1;
        c2[i] = v2;
    }
    return {c1, c2};
}

/// Bounded polynomial mutation on the unit box; each variable mutates with
/// probability `prob`.
inline Eigen::VectorXd polynomial_mutation(const Eigen::VectorXd& x, double eta, double prob, Rng& rng) {
    Eigen::VectorXd y = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (!rng.bernoulli(prob)) continue;
        const double v = y[i];
        const double delta1 = v;
        const double delta2 = 1.0 - v;
        const double u = rng.uniform();
        const double pw = 1.0 / (eta + 1.0);
        double deltaq;
        if (u <= 0.5) {
            const double val = 2.0 * u + (1.0 - 2.0 * u) * std::pow(1.0 - delta1, eta + 1.0);
            deltaq = std::pow(val, pw) - 1.0;
        } else {
            const double val = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * std::pow(1.0 - delta2, eta + 1.0);
            deltaq = 1.0 - std::pow(val, pw);
        }
        y[i] = std::clamp(v + deltaq, 0.0, 1.0);
    }
    return y;
}

struct MoeaParams {
    int dim = 1;
    int pop_size = 100;
    int generations = 50;
    double crossover_prob = 0.8;
    double mutation_prob = 1.0;
    double eta_crossover = 20.0;
    double eta_mutation = 20.0;
    long eval_budget_cap = 5000;

    /// Population 100d, 50 generations, p_c = 0.8, p_m = 1/d, η = 20, cap 5000d.
    static MoeaParams for_dimension(int d) {
        if (d < 1) throw std::invalid_argument("MoeaParams: dimension must be >= 1");
        MoeaParams p;
        p.dim = d;
        p.pop_size = 100 * d;
        p.mutation_prob = 1.0 / d;
        p.eval_budget_cap = 5000L * d;
        return p;
    }

    void validate() const {
        if (dim < 1 || pop_size < 2 || pop_size % 2 != 0 || generations < 0 || eval_budget_cap < pop_size ||
            !(eta_crossover > 0.0) || !(eta_mutation > 0.0) || crossover_prob < 0.0 || crossover_prob > 1.0 ||
            mutation_prob < 0.0 || mutation_prob > 1.0)
            throw std::invalid_argument("MoeaParams: invalid parameters");
    }

    /// Generations actually run once the evaluation cap is applied.
    int effective_generations() const {
        const long by_budget = (eval_budget_cap - pop_size) / pop_size;
        return static_cast<int>(std::min<long>(generations, by_budget));
    }
};

struct Individual {
    Eigen::VectorXd x;
    Objectives obj;
    int rank = 0;
    double crowding = 0.0;
};

/// Final-population first front.
struct ParetoArchive {
    std::vector<Individual> members;
    long evaluations = 0;
    int generations = 0;
    int seeded = 0;

    std::size_t size() const { return members.size(); }

    /// Member with the largest μ (largest σ on ties, then first).
    std::size_t best_mu_index() const {
        std::size_t b = 0;
        for (std::size_t i = 1; i < members.size(); ++i) {
            const auto& o = members[i].obj;
            const auto& ob = members[b].obj;
            if (o.mu > ob.mu || (o.mu == ob.mu && o.sigma > ob.sigma)) b = i;
        }
        return b;
    }

    /// Member with the largest σ (largest μ on ties, then first).
    std::size_t best_sigma_index() const {
        std::size_t b = 0;
        for (std::size_t i = 1; i < members.size(); ++i) {
            const auto& o = members[i].obj;
            const auto& ob = members[b].obj;
            if (o.sigma > ob.sigma || (o.sigma == ob.sigma && o.mu > ob.mu)) b = i;
        }
        return b;
    }
};

namespace detail {

template <class Evaluator>
std::vector<Objectives> evaluate_rows(Evaluator& eval, const std::vector<Eigen::VectorXd>& xs) {
    if constexpr (std::is_invocable_r_v<std::vector<Objectives>, Evaluator&, const Eigen::MatrixXd&>) {
        Eigen::MatrixXd m(static_cast<Eigen::Index>(xs.size()), xs.empty() ? 0 : xs.front().size());
        for (std::size_t i = 0; i < xs.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = xs[i].transpose();
        return eval(m);
    } else {
        std::vector<Objectives> out;
        out.reserve(xs.size());
        for (const auto& x : xs) out.push_back(eval(x));
        return out;
    }
}

/// Rank and crowding for a whole population, in place.
inline void assign_rank_and_crowding(std::vector<Individual>& pop) {
    std::vector<Objectives> objs;
    objs.reserve(pop.size());
    for (const auto& ind : pop) objs.push_back(ind.obj);
    const auto ranks = fast_nondominated_sort(objs);
    const int max_rank = *std::max_element(ranks.begin(), ranks.end());
    for (int r = 0; r <= max_rank; ++r) {
        std::vector<std::size_t> idx;
        std::vector<Objectives> front;
        for (std::size_t i = 0; i < pop.size(); ++i)
            if (ranks[i] == r) {
                idx.push_back(i);
                front.push_back(objs[i]);
            }
        const auto cd = crowding_distance(front);
        for (std::size_t k = 0; k < idx.size(); ++k) {
            pop[idx[k]].rank = r;
            pop[idx[k]].crowding = cd[k];
        }
    }
}

inline bool crowded_less(const Individual& a, const Individual& b) {
    if (a.rank != b.rank) return a.rank < b.rank;
    return a.crowding > b.crowding;
}

}  // namespace detail

/// NSGA-II over the unit cube maximising the evaluator's (μ, σ).
///
/// The evaluator may be point-wise (`Objectives(const Eigen::VectorXd&)`) or
/// batched (`std::vector<Objectives>(const Eigen::MatrixXd&)`, one row per
/// point). `seeds` replace the first members of the random initial population.
/// Returns the first front of the final population.
template <class Evaluator>
ParetoArchive nsga2(Evaluator&& eval, const MoeaParams& params, Rng& rng,
                    std::span<const Eigen::VectorXd> seeds = {}) {
    params.validate();
    const auto n = static_cast<std::size_t>(params.pop_size);
    const int d = params.dim;

    std::vector<Eigen::VectorXd> xs(n);
    for (auto& x : xs) {
        x.resize(d);
        for (int i = 0; i < d; ++i) x[i] = rng.uniform();
    }
    int seeded = 0;
    for (std::size_t k = 0; k < seeds.size() && k < n; ++k) {
        if (seeds[k].size() != d) throw std::invalid_argument("nsga2: seed dimension mismatch");
        xs[k] = seeds[k].cwiseMax(0.0).cwiseMin(1.0);
        ++seeded;
    }
    auto objs = detail::evaluate_rows(eval, xs);
    long evaluations = static_cast<long>(n);

    std::vector<Individual> pop(n);
    for (std::size_t i = 0; i < n; ++i) pop[i] = {std::move(xs[i]), objs[i], 0, 0.0};
    detail::assign_rank_and_crowding(pop);

    auto tournament = [&]() -> const Individual& {
        const auto& a = pop[rng.index(n)];
        const auto& b = pop[rng.index(n)];
        if (detail::crowded_less(a, b)) return a;
        if (detail::crowded_less(b, a)) return b;
        return rng.bernoulli(0.5) ? a : b;
    };

    const int generations = params.effective_generations();
    for (int g = 0; g < generations; ++g) {
        std::vector<Eigen::VectorXd> children;
        children.reserve(n);
        while (children.size() < n) {
            const auto& p1 = tournament();
            const auto& p2 = tournament();
            auto [c1, c2] = sbx_crossover(p1.x, p2.x, params.eta_crossover, params.crossover_prob, rng);
            children.push_back(polynomial_mutation(c1, params.eta_mutation, params.mutation_prob, rng));
            children.push_back(polynomial_mutation(c2, params.eta_mutation, params.mutation_prob, rng));
        }
        const auto child_objs = detail::evaluate_rows(eval, children);
        evaluations += static_cast<long>(n);

        std::vector<Individual> combined = std::move(pop);
        combined.reserve(2 * n);
        for (std::size_t i = 0; i < n; ++i) combined.push_back({std::move(children[i]), child_objs[i], 0, 0.0});
        detail::assign_rank_and_crowding(combined);
        std::vector<std::size_t> order(combined.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return detail::crowded_less(combined[a], combined[b]); });
        pop.clear();
        for (std::size_t k = 0; k < n; ++k) pop.push_back(std::move(combined[order[k]]));
        // Crowding of the survivors is recomputed on the truncated population.
        detail::assign_rank_and_crowding(pop);
    }

    ParetoArchive archive;
    archive.evaluations = evaluations;
    archive.generations = generations;
    archive.seeded = seeded;
    for (auto& ind : pop)
        if (ind.rank == 0) archive.members.push_back(std::move(ind));
    return archive;
}

}  // namespace eebo
