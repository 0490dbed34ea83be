#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "eebo/rng.hpp"

namespace eebo {

enum class DesignKind { LatinHypercube, Uniform };

/// n × d design in [0,1)^d, one point per row.
struct Design {
    Eigen::MatrixXd points;
    DesignKind kind = DesignKind::Uniform;
};

/// Smallest pairwise Euclidean distance between rows (+∞ for fewer than two rows).
inline double min_pairwise_distance(const Eigen::MatrixXd& pts) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < pts.rows(); ++i)
        for (Eigen::Index j = i + 1; j < pts.rows(); ++j)
            best = std::min(best, (pts.row(i) - pts.row(j)).squaredNorm());
    return std::sqrt(best);
}

namespace detail {

/// Fisher–Yates on the Rng's bounded draws (std::shuffle is implementation defined).
template <class T>
void shuffle(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.index(i)]);
}

}  // namespace detail

/// One random Latin hypercube: a permutation of strata per dimension, each
/// point jittered uniformly inside its stratum [k/n, (k+1)/n).
inline Eigen::MatrixXd latin_hypercube(Eigen::Index n, Eigen::Index d, Rng& rng) {
    if (n < 1 || d < 1) throw std::invalid_argument("latin_hypercube: n and d must be >= 1");
    Eigen::MatrixXd pts(n, d);
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < d; ++j) {
        std::iota(perm.begin(), perm.end(), 0);
        detail::shuffle(perm, rng);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double v = (static_cast<double>(perm[static_cast<std::size_t>(i)]) + rng.uniform()) /
                             static_cast<double>(n);
            pts(i, j) = std::min(v, std::nextafter(1.0, 0.0));
        }
    }
    return pts;
}

/// Max-min Latin hypercube: the best of `candidates` random LHS designs by
/// minimum pairwise distance (first wins ties).
inline Design maximin_lhs(Eigen::Index n, Eigen::Index d, Rng& rng, int candidates = 100) {
    if (candidates < 1) throw std::invalid_argument("maximin_lhs: candidates must be >= 1");
    Design best{latin_hypercube(n, d, rng), DesignKind::LatinHypercube};
    double best_dist = min_pairwise_distance(best.points);
    for (int c = 1; c < candidates; ++c) {
        Eigen::MatrixXd cand = latin_hypercube(n, d, rng);
        const double dist = min_pairwise_distance(cand);
        if (dist > best_dist) {
            best_dist = dist;
            best.points = std::move(cand);
        }
    }
    return best;
}

/// i.i.d. uniform design.
inline Design uniform_design(Eigen::Index n, Eigen::Index d, Rng& rng) {
    if (n < 1 || d < 1) throw std::invalid_argument("uniform_design: n and d must be >= 1");
    Design out{Eigen::MatrixXd(n, d), DesignKind::Uniform};
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < d; ++j) out.points(i, j) = rng.uniform();
    return out;
}

/// Extends an existing design to a `total`-row partial Latin hypercube.
///
/// Each dimension is cut into `total` strata; strata already holding a point
/// of `existing` are skipped and the new rows take a random permutation of
/// the free ones (a random subset when collisions leave more free strata than
/// rows to add). Of `candidates` such extensions the one maximising the
/// minimum distance over all rows is returned. Only the new rows come back.
inline Eigen::MatrixXd extend_maximin_lhs(const Eigen::MatrixXd& existing, Eigen::Index total, Rng& rng,
                                          int candidates = 100) {
    const Eigen::Index m = existing.rows();
    const Eigen::Index d = existing.cols();
    if (total < m) throw std::invalid_argument("extend_maximin_lhs: total smaller than existing design");
    const Eigen::Index extra = total - m;
    if (extra == 0) return Eigen::MatrixXd(0, d);

    std::vector<std::vector<Eigen::Index>> free(static_cast<std::size_t>(d));
    for (Eigen::Index j = 0; j < d; ++j) {
        std::vector<bool> used(static_cast<std::size_t>(total), false);
        for (Eigen::Index i = 0; i < m; ++i) {
            const auto k = std::min<Eigen::Index>(total - 1, static_cast<Eigen::Index>(existing(i, j) * total));
            used[static_cast<std::size_t>(k)] = true;
        }
        for (Eigen::Index k = 0; k < total; ++k)
            if (!used[static_cast<std::size_t>(k)]) free[static_cast<std::size_t>(j)].push_back(k);
    }

    Eigen::MatrixXd best;
    double best_dist = -1.0;
    Eigen::MatrixXd all(total, d);
    all.topRows(m) = existing;
    for (int c = 0; c < candidates; ++c) {
        Eigen::MatrixXd cand(extra, d);
        for (Eigen::Index j = 0; j < d; ++j) {
            auto strata = free[static_cast<std::size_t>(j)];
            detail::shuffle(strata, rng);
            for (Eigen::Index i = 0; i < extra; ++i) {
                const double v = (static_cast<double>(strata[static_cast<std::size_t>(i)]) + rng.uniform()) /
                                 static_cast<double>(total);
                cand(i, j) = std::min(v, std::nextafter(1.0, 0.0));
            }
        }
        all.bottomRows(extra) = cand;
        const double dist = min_pairwise_distance(all);
        if (dist > best_dist) {
            best_dist = dist;
            best = cand;
        }
    }
    return best;
}

}  // namespace eebo
