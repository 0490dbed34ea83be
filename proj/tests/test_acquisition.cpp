#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "eebo/acquisition.hpp"
#include "eebo/pareto.hpp"
#include "eebo/rng.hpp"

using namespace eebo;

namespace {

// Reference values evaluated with mpmath at 30 digits.
constexpr double kPdf0 = 0.398942280401432677939946059934;
constexpr double kCdf1 = 0.841344746068542948585232545632;
constexpr double kBeta1 = 14.7686655800823486810525606841;

double fd(const std::function<double(double)>& f, double x, double h) { return (f(x + h) - f(x - h)) / (2.0 * h); }

}  // namespace

TEST(Normal, MatchesReferenceValues) {
    EXPECT_NEAR(normal_pdf(0.0), kPdf0, 1e-15);
    EXPECT_NEAR(normal_cdf(1.0), kCdf1, 1e-15);
    EXPECT_NEAR(normal_cdf(-40.0), 0.0, 1e-300);
    EXPECT_DOUBLE_EQ(normal_cdf(0.0), 0.5);
}

TEST(Normal, TailProductsStayAccurate) {
    for (double s : {-30.0, -12.0, -8.5, 8.5, 12.0, 30.0}) {
        const double direct = s * std::exp(-0.5 * s * s) / std::sqrt(2.0 * std::numbers::pi);
        EXPECT_NEAR(s_times_pdf(s) / direct, 1.0, 1e-12);
        EXPECT_NEAR(s2_times_pdf(s) / (s * direct), 1.0, 1e-12);
    }
}

TEST(ExpectedImprovement, WorkedExamples) {
    EXPECT_NEAR(ei({0.3, 1.0, 0.3}), kPdf0, 1e-15);
    EXPECT_DOUBLE_EQ(ei({3.0, 0.0, 1.0}), 2.0);
    EXPECT_DOUBLE_EQ(ei({-1.0, 0.0, 1.0}), 0.0);
    EXPECT_LE(ei({-10.0, 0.1, 0.0}), 1e-12);
    EXPECT_GE(ei({-10.0, 0.1, 0.0}), 0.0);
}

TEST(ExpectedImprovement, StrictlyIncreasingInMuAndSigma) {
    Rng rng(1);
    for (int i = 0; i < 500; ++i) {
        const AcqInput in{rng.uniform(-2, 2), rng.uniform(0.05, 2), rng.uniform(-1, 1)};
        const double h = 1e-4;
        const double dmu = ei({in.mu + h, in.sigma, in.f_star}) - ei({in.mu - h, in.sigma, in.f_star});
        const double dsigma = ei({in.mu, in.sigma + h, in.f_star}) - ei({in.mu, in.sigma - h, in.f_star});
        // far in either tail EI is flat to rounding: 0 on the left, μ − f* on the right
        if (std::abs((in.mu - in.f_star) / in.sigma) <= 5.0) {
            EXPECT_GT(dmu, 0.0);
            EXPECT_GT(dsigma, 0.0);
        } else {
            EXPECT_GE(dmu, -1e-12);
            EXPECT_GE(dsigma, -1e-12);
        }
    }
}

TEST(ProbabilityOfImprovement, WorkedExamples) {
    EXPECT_DOUBLE_EQ(pi({1.0, 0.7, 1.0}), 0.5);
    EXPECT_NEAR(pi({2.0, 1.0, 1.0}), kCdf1, 1e-15);
    EXPECT_DOUBLE_EQ(pi({0.0, 0.0, 1.0}), 0.0);
    EXPECT_DOUBLE_EQ(pi({2.0, 0.0, 1.0}), 1.0);
}

TEST(UpperConfidenceBound, WorkedExamples) {
    EXPECT_DOUBLE_EQ(ucb({0.7, 3.0, 0.0}, 0.0), 0.7);
    EXPECT_DOUBLE_EQ(ucb({1.0, 2.0, 0.0}, 4.0), 5.0);
    EXPECT_LT(ucb({1.0, 1.0, 0.0}, 2.0), ucb({1.0, 1.1, 0.0}, 2.0));
    EXPECT_THROW(ucb({0, 1, 0}, -1.0), std::invalid_argument);
}

TEST(BetaSchedule, HighPrecisionValueAtFirstStep) {
    EXPECT_NEAR(beta_schedule({.d = 1, .t = 1}), kBeta1, 1e-9);
}

TEST(BetaSchedule, MonotoneInTAndD) {
    for (int d : {1, 2, 6, 10}) {
        double prev = beta_schedule({.d = d, .t = 1});
        EXPECT_GT(prev, 0.0);
        for (int t = 2; t <= 250; ++t) {
            const double b = beta_schedule({.d = d, .t = t});
            EXPECT_GE(b, prev);
            prev = b;
        }
    }
    EXPECT_GT(beta_schedule({.d = 10, .t = 100}), beta_schedule({.d = 2, .t = 100}));
}

TEST(BetaSchedule, RejectsInvalidParameters) {
    EXPECT_THROW(beta_schedule({.delta = 0.0}), std::invalid_argument);
    EXPECT_THROW(beta_schedule({.delta = 1.5}), std::invalid_argument);
    EXPECT_THROW(beta_schedule({.t = 0}), std::invalid_argument);
    EXPECT_THROW(beta_schedule({.a = 0.001, .delta = 0.5}), std::invalid_argument);
}

TEST(WeightedEI, WorkedExamples) {
    Rng rng(2);
    for (int i = 0; i < 100; ++i) {
        const AcqInput in{rng.uniform(-2, 2), rng.uniform(0.05, 2), rng.uniform(-1, 1)};
        EXPECT_NEAR(wei(in, 0.5), ei(in) / 2.0, 1e-15 * std::max(1.0, ei(in)));
        EXPECT_NEAR(wei(in, 1.0), (in.mu - in.f_star) * normal_cdf(in.s()), 1e-15);
    }
    EXPECT_NEAR(wei({0.0, 2.0, 0.0}, 0.0), 2.0 * kPdf0, 1e-15);
    EXPECT_DOUBLE_EQ(wei({3.0, 0.0, 1.0}, 0.25), 0.5);
    EXPECT_THROW(wei({0, 1, 0}, 1.5), std::invalid_argument);
}

TEST(GammaConstant, MatchesPublishedValueAndHighPrecisionOracle) {
    const auto g = gamma_constant();
    EXPECT_NEAR(g.gamma, 0.295, 1e-3);
    EXPECT_NEAR(g.threshold, 0.185, 1e-3);
    EXPECT_NEAR(g.gamma, 0.294528219011414, 1e-9);
    EXPECT_NEAR(g.argmax, 0.8399237, 1e-4);
    EXPECT_DOUBLE_EQ(gamma_objective(0.0), 0.0);
}

TEST(GammaConstant, StableAcrossBrackets) {
    const double ref = gamma_constant().gamma;
    for (auto [lo, hi] : std::vector<std::pair<double, double>>{{0.0, 5.0}, {0.2, 3.0}, {0.5, 10.0}, {0.0, 2.0}})
        EXPECT_NEAR(gamma_constant(lo, hi).gamma, ref, 1e-6);
}

TEST(AcqPartials, WorkedExamples) {
    const auto [dmu, dsig] = acq_partials(AcqKind::EI, {1.0, 2.0, 1.0});
    EXPECT_DOUBLE_EQ(dmu, 0.5);
    EXPECT_NEAR(dsig, kPdf0, 1e-15);
    const auto ucbp = acq_partials(AcqKind::UCB, {0.0, 1.0, 0.0}, 9.0);
    EXPECT_DOUBLE_EQ(ucbp.first, 1.0);
    EXPECT_DOUBLE_EQ(ucbp.second, 3.0);
    EXPECT_THROW(acq_partials(AcqKind::EI, {0, 0, 0}), std::invalid_argument);
}

TEST(AcqPartials, PiSigmaDerivativeSign) {
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
        const AcqInput in{rng.uniform(-2, 2), rng.uniform(0.05, 2), rng.uniform(-1, 1)};
        const double ds = acq_partials(AcqKind::PI, in).second;
        if (in.s() > 0) {
            EXPECT_LT(ds, 0.0);
        } else if (in.s() < 0) {
            EXPECT_GT(ds, 0.0);
        }
    }
}

TEST(AcqPartials, MatchFiniteDifferences) {
    Rng rng(4);
    const std::vector<std::pair<AcqKind, double>> kinds{{AcqKind::EI, 0.0},   {AcqKind::PI, 0.0},
                                                        {AcqKind::WEI, 0.0},  {AcqKind::WEI, 0.1},
                                                        {AcqKind::WEI, 0.185}, {AcqKind::WEI, 0.5},
                                                        {AcqKind::WEI, 1.0},  {AcqKind::UCB, 3.7}};
    for (const auto& [kind, param] : kinds) {
        for (int i = 0; i < 100; ++i) {
            const AcqInput in{rng.uniform(-2, 2), rng.uniform(0.1, 2), rng.uniform(-1, 1)};
            const auto [dmu, dsig] = acq_partials(kind, in, param);
            const double h = 1e-5;
            const double fmu = fd([&](double m) { return acq_value(kind, {m, in.sigma, in.f_star}, param); }, in.mu, h);
            const double fsig = fd([&](double s) { return acq_value(kind, {in.mu, s, in.f_star}, param); }, in.sigma, h);
            EXPECT_NEAR(dmu, fmu, 1e-5 * std::max(1.0, std::abs(fmu)));
            EXPECT_NEAR(dsig, fsig, 1e-5 * std::max(1.0, std::abs(fsig)));
        }
    }
}

namespace {

std::vector<Objectives> random_set(Rng& rng, std::size_t n) {
    std::vector<Objectives> v(n);
    for (auto& o : v) o = {rng.uniform(-2, 2), rng.uniform(0.05, 2)};
    return v;
}

template <class Score>
std::size_t argmax(const std::vector<Objectives>& v, Score score) {
    std::size_t b = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (score(v[i]) > score(v[b])) b = i;
    return b;
}

bool brute_non_dominated(const std::vector<Objectives>& v, std::size_t i) {
    for (const auto& o : v)
        if (dominates(o, v[i])) return false;
    return true;
}

}  // namespace

TEST(DominanceProperties, EiAndUcbMaximisersAreNonDominated) {
    Rng rng(5);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto set = random_set(rng, 2 + rng.index(40));
        const double f_star = rng.uniform(-1, 1);
        const double beta = rng.uniform(0.0, 30.0);
        EXPECT_TRUE(brute_non_dominated(set, argmax(set, [&](const Objectives& o) { return ei({o.mu, o.sigma, f_star}); })));
        EXPECT_TRUE(brute_non_dominated(set, argmax(set, [&](const Objectives& o) { return ucb({o.mu, o.sigma, f_star}, beta); })));
    }
}

TEST(DominanceProperties, WeiWindowMaximisersAreNonDominated) {
    Rng rng(6);
    for (double omega : {0.186, 0.25, 0.4, 0.5}) {
        for (int trial = 0; trial < 300; ++trial) {
            const auto set = random_set(rng, 2 + rng.index(40));
            const double f_star = rng.uniform(-1, 1);
            const auto best = argmax(set, [&](const Objectives& o) { return wei({o.mu, o.sigma, f_star}, omega); });
            EXPECT_TRUE(brute_non_dominated(set, best)) << "omega " << omega;
        }
    }
}

TEST(DominanceProperties, WitnessesOutsideTheWindow) {
    // ω = 1 and PI in the s > 0 region prefer the lower σ at equal μ.
    const std::vector<Objectives> sigma_pair{{1.0, 2.0}, {1.0, 0.5}};
    for (auto score : std::vector<std::function<double(const Objectives&)>>{
             [](const Objectives& o) { return wei({o.mu, o.sigma, 0.0}, 1.0); },
             [](const Objectives& o) { return pi({o.mu, o.sigma, 0.0}); }}) {
        const auto b = argmax(sigma_pair, score);
        EXPECT_EQ(b, 1u);
        EXPECT_FALSE(brute_non_dominated(sigma_pair, b));
    }
    // ω ∈ {0, 0.1} prefer the lower μ at equal σ when s is moderate.
    const std::vector<Objectives> mu_pair{{1.0, 1.0}, {0.5, 1.0}};
    for (double omega : {0.0, 0.1}) {
        const auto b = argmax(mu_pair, [&](const Objectives& o) { return wei({o.mu, o.sigma, 0.0}, omega); });
        EXPECT_EQ(b, 1u) << omega;
        EXPECT_FALSE(brute_non_dominated(mu_pair, b));
    }
}
