#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "eebo/normal.hpp"

namespace eebo {

struct TooFewPairsError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct PairingMismatchError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

inline double median(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("median: empty input");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct MedianMad {
    double median;
    double mad;
};

/// Median and median absolute deviation from the median.
inline MedianMad median_mad(std::span<const double> values) {
    std::vector<double> v(values.begin(), values.end());
    const double m = median(v);
    for (auto& x : v) x = std::abs(x - m);
    return {m, median(std::move(v))};
}

/// Linear-interpolation quantile (q in [0,1]) of an unsorted sample.
inline double quantile(std::vector<double> v, double q) {
    if (v.empty()) throw std::invalid_argument("quantile: empty input");
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

/// Mid-ranks (1-based) of the values; ties share the average rank.
inline std::vector<double> midranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

struct WilcoxonResult {
    double p_value;
    double w_plus;       // rank sum of positive differences a − b
    std::size_t n;       // non-zero differences used
    bool exact;
};

inline constexpr std::size_t kWilcoxonExactLimit = 25;
inline constexpr std::size_t kWilcoxonMinPairs = 5;

/// One-sided paired Wilcoxon signed-rank test of H₁: a is stochastically
/// smaller than b. Zero differences are dropped and tied |differences| get
/// mid-ranks. For n ≤ 25 the p-value P(W⁺ ≤ observed) is exact (the null
/// distribution of W⁺ over all 2ⁿ sign patterns, by dynamic programming on
/// doubled ranks); beyond that a normal approximation with tie and continuity
/// corrections is used.
inline WilcoxonResult wilcoxon_one_sided(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw PairingMismatchError("wilcoxon_one_sided: samples are not paired");
    std::vector<double> diffs;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double dlt = a[i] - b[i];
        if (dlt != 0.0) diffs.push_back(dlt);
    }
    const std::size_t n = diffs.size();
    if (n < kWilcoxonMinPairs)
        throw TooFewPairsError("wilcoxon_one_sided: need at least 5 non-zero differences, got " + std::to_string(n));
    std::vector<double> absd(n);
    for (std::size_t i = 0; i < n; ++i) absd[i] = std::abs(diffs[i]);
    const auto ranks = midranks(absd);
    double w_plus = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        if (diffs[i] > 0.0) w_plus += ranks[i];

    if (n <= kWilcoxonExactLimit) {
        // Mid-ranks are multiples of ½, so doubled ranks are integers.
        std::vector<int> doubled(n);
        int total = 0;
        for (std::size_t i = 0; i < n; ++i) {
            doubled[i] = static_cast<int>(std::lround(2.0 * ranks[i]));
            total += doubled[i];
        }
        std::vector<double> count(static_cast<std::size_t>(total) + 1, 0.0);
        count[0] = 1.0;
        int reach = 0;
        for (int r : doubled) {
            for (int s = reach; s >= 0; --s)
                if (count[static_cast<std::size_t>(s)] != 0.0) count[static_cast<std::size_t>(s + r)] += count[static_cast<std::size_t>(s)];
            reach += r;
        }
        const auto observed = static_cast<int>(std::lround(2.0 * w_plus));
        double tail = 0.0;
        for (int s = 0; s <= observed; ++s) tail += count[static_cast<std::size_t>(s)];
        const double p = tail / std::ldexp(1.0, static_cast<int>(n));
        return {std::min(1.0, p), w_plus, n, true};
    }

    const double nn = static_cast<double>(n);
    const double mean = nn * (nn + 1.0) / 4.0;
    double tie_term = 0.0;
    {
        std::vector<double> sorted = absd;
        std::sort(sorted.begin(), sorted.end());
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j + 1 < n && sorted[j + 1] == sorted[i]) ++j;
            const double t = static_cast<double>(j - i + 1);
            tie_term += t * t * t - t;
            i = j + 1;
        }
    }
    const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
    const double z = (w_plus - mean + 0.5) / std::sqrt(var);
    return {normal_cdf(z), w_plus, n, false};
}

/// Holm–Bonferroni step-down: reject p₍k₎ while p₍k₎ ≤ α/(m − k + 1).
/// Flags are returned in input order.
inline std::vector<bool> holm_bonferroni(std::span<const double> p_values, double alpha = 0.05) {
    const std::size_t m = p_values.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });
    std::vector<bool> reject(m, false);
    for (std::size_t k = 0; k < m; ++k) {
        if (p_values[order[k]] <= alpha / static_cast<double>(m - k)) {
            reject[order[k]] = true;
        } else {
            break;
        }
    }
    return reject;
}

/// Holm-adjusted p-values: max_{j ≤ k} min(1, (m − j + 1) p₍j₎).
inline std::vector<double> holm_adjust(std::span<const double> p_values) {
    const std::size_t m = p_values.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });
    std::vector<double> adj(m);
    double running = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        running = std::max(running, std::min(1.0, static_cast<double>(m - k) * p_values[order[k]]));
        adj[order[k]] = running;
    }
    return adj;
}

struct MethodResults {
    std::string method;
    std::vector<double> regrets;  // indexed by repeat
};

struct TableRow {
    std::string method;
    double median = 0.0;
    double mad = 0.0;
    bool best = false;
    bool equivalent = false;   // statistically equivalent to the best (includes best)
    double p_value = 1.0;      // raw one-sided p against the best; 1 for the best itself
    double p_adjusted = 1.0;   // Holm-adjusted
    std::string note;
};

struct ComparisonTable {
    std::vector<TableRow> rows;
    std::size_t best_index = 0;
    double alpha = 0.05;
    bool median_tie = false;  // best chosen by registration order among equal medians
};

/// Median/MAD per method, best = lowest median (first listed on ties); each
/// other method is tested one-sided (best < method) and marked equivalent
/// when the Holm-corrected test does not reject at α. Comparisons with fewer
/// than five non-zero paired differences cannot reject and get p = 1.
inline ComparisonTable build_table(std::span<const MethodResults> results, double alpha = 0.05) {
    if (results.size() < 2) throw std::invalid_argument("build_table: at least two methods required");
    const std::size_t reps = results.front().regrets.size();
    for (const auto& r : results)
        if (r.regrets.size() != reps || reps == 0)
            throw PairingMismatchError("build_table: methods have different repeat counts");

    ComparisonTable table;
    table.alpha = alpha;
    for (const auto& r : results) {
        const auto mm = median_mad(r.regrets);
        TableRow row;
        row.method = r.method;
        row.median = mm.median;
        row.mad = mm.mad;
        table.rows.push_back(std::move(row));
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < table.rows.size(); ++i)
        if (table.rows[i].median < table.rows[best].median) best = i;
    for (std::size_t i = 0; i < table.rows.size(); ++i)
        if (i != best && table.rows[i].median == table.rows[best].median) table.median_tie = true;
    table.best_index = best;
    table.rows[best].best = true;
    table.rows[best].equivalent = true;

    std::vector<std::size_t> others;
    std::vector<double> pvals;
    for (std::size_t i = 0; i < results.size(); ++i) {
        if (i == best) continue;
        double p = 1.0;
        try {
            p = wilcoxon_one_sided(results[best].regrets, results[i].regrets).p_value;
        } catch (const TooFewPairsError&) {
            table.rows[i].note = "fewer than 5 non-zero differences";
        }
        others.push_back(i);
        pvals.push_back(p);
    }
    const auto reject = holm_bonferroni(pvals, alpha);
    const auto adjusted = holm_adjust(pvals);
    for (std::size_t k = 0; k < others.size(); ++k) {
        auto& row = table.rows[others[k]];
        row.p_value = pvals[k];
        row.p_adjusted = adjusted[k];
        row.equivalent = !reject[k];
    }
    return table;
}

}  // namespace eebo
