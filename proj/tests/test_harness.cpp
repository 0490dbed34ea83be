#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "eebo/harness.hpp"

using namespace eebo;
namespace fs = std::filesystem;

namespace {

ExperimentConfig quick(const std::string& problem, const std::string& method, int budget, int init = 0) {
    ExperimentConfig c;
    c.problem = problem;
    c.strategy = StrategyId::parse(method);
    c.budget = budget;
    c.init = init;
    c.repeats = 1;
    c.seed = 11;
    c.gp_restarts = 2;
    c.lhs_candidates = 10;
    auto mp = MoeaParams::for_dimension(c.dim());
    mp.pop_size = 20;
    mp.generations = 10;
    mp.eval_budget_cap = 200;
    c.moea = mp;
    return c;
}

class TempDir {
public:
    explicit TempDir(const std::string& tag)
        : path_(fs::temp_directory_path() / ("eebo_test_" + tag + "_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()))) {
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

Eigen::VectorXd native(const Problem& p, const Eigen::VectorXd& u) {
    return p.from_unit_cube(u).cwiseMax(p.lower).cwiseMin(p.upper);
}

std::vector<std::vector<double>> split_tsv(const std::string& text) {
    std::vector<std::vector<double>> out;
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string cell;
        std::getline(ls, cell, '\t');
        std::vector<double> row;
        while (std::getline(ls, cell, '\t')) row.push_back(std::stod(cell));
        out.push_back(row);
    }
    return out;
}

}  // namespace

TEST(RunBo, BudgetEqualToInitIsPureDesign) {
    const auto rec = run_bo(quick("Branin", "EI", 4, 4), 0);
    ASSERT_EQ(rec.rows.size(), 4u);
    for (const auto& r : rec.rows) EXPECT_EQ(r.source, "design");
}

TEST(RunBo, UniformContinuesTheDesignStream) {
    const auto cfg = quick("Branin", "Uniform", 12);
    const auto rec = run_bo(cfg, 2);
    const Problem& p = find_problem("Branin");
    auto streams = RunStreams::derive(cfg.seed, "Branin", 2);
    const auto design = maximin_lhs(4, 2, streams.design, cfg.lhs_candidates);
    const auto extra = uniform_design(8, 2, streams.design);
    ASSERT_EQ(rec.rows.size(), 12u);
    for (int i = 0; i < 12; ++i) {
        const Eigen::VectorXd u = i < 4 ? Eigen::VectorXd(design.points.row(i).transpose())
                                        : Eigen::VectorXd(extra.points.row(i - 4).transpose());
        const Eigen::VectorXd x = native(p, u);
        EXPECT_EQ(rec.rows[i].x, std::vector<double>(x.data(), x.data() + 2));
        EXPECT_EQ(rec.rows[i].source, i < 4 ? "design" : "baseline");
    }
}

TEST(RunBo, LhsBaselineExtendsTheDesign) {
    const auto cfg = quick("Branin", "LHS", 10);
    const auto rec = run_bo(cfg, 0);
    const Problem& p = find_problem("Branin");
    auto streams = RunStreams::derive(cfg.seed, "Branin", 0);
    const auto design = maximin_lhs(4, 2, streams.design, cfg.lhs_candidates);
    const Eigen::MatrixXd extra = extend_maximin_lhs(design.points, 10, streams.design, cfg.lhs_candidates);
    for (int i = 4; i < 10; ++i) {
        const Eigen::VectorXd x = native(p, extra.row(i - 4).transpose());
        EXPECT_EQ(rec.rows[i].x, std::vector<double>(x.data(), x.data() + 2));
    }
}

TEST(RunBo, DeterministicSerialisation) {
    for (const char* m : {"EI", "EpsPF", "EpsRS", "PI"}) {
        const auto cfg = quick("Branin", m, 8);
        EXPECT_EQ(run_bo(cfg, 1).serialize(), run_bo(cfg, 1).serialize()) << m;
    }
}

TEST(RunBo, DesignIsPairedAcrossStrategies) {
    const auto ref = run_bo(quick("Branin", "LHS", 6), 3);
    for (const char* m : {"Uniform", "Explore", "Exploit", "EI", "PI", "UCB", "PFRandom", "EpsPF", "EpsRS"}) {
        const auto rec = run_bo(quick("Branin", m, 6), 3);
        for (int i = 0; i < 4; ++i) {
            EXPECT_EQ(rec.rows[i].x, ref.rows[i].x) << m;
            EXPECT_EQ(rec.rows[i].f, ref.rows[i].f) << m;
        }
    }
}

TEST(RunBo, TraceInvariants) {
    const auto cfg = quick("Cosines", "EpsRS", 15);
    const auto rec = run_bo(cfg, 0);
    ASSERT_EQ(rec.rows.size(), 15u);
    double best = std::numeric_limits<double>::infinity();
    const Problem& p = find_problem("Cosines");
    for (int i = 0; i < 15; ++i) {
        const auto& r = rec.rows[i];
        EXPECT_EQ(r.t, i + 1);
        best = std::min(best, r.f);
        EXPECT_EQ(r.best, best);
        const Eigen::Map<const Eigen::VectorXd> x(r.x.data(), 2);
        EXPECT_TRUE(p.in_domain(x));
        EXPECT_EQ(r.f, p.evaluate(x));
        if (i >= 4) {
            EXPECT_EQ(r.source, "model");
            EXPECT_NE(r.branch, "none");
        }
    }
    EXPECT_EQ(rec.final_regret, best - rec.f_opt_ref);
    EXPECT_GE(rec.final_regret, 0.0);
    if (rec.f_opt_updated) {
        EXPECT_EQ(rec.f_opt_ref, best);
        EXPECT_FALSE(rec.warnings.empty());
    }
}

TEST(RunBo, ConfigValidation) {
    EXPECT_THROW(run_bo(quick("Branin", "EI", 3, 4), 0), std::invalid_argument);
    EXPECT_THROW(run_bo(quick("Branin", "EI", 5, 1), 0), std::invalid_argument);
    EXPECT_NO_THROW(run_bo(quick("Branin", "LHS", 3, 1), 0));
    EXPECT_THROW(run_bo(quick("Branin", "EI", 5), -1), std::invalid_argument);
    EXPECT_THROW(quick("Sphere", "EI", 5), UnknownProblemError);
    auto bad = quick("Branin", "EpsPF", 6);
    bad.strategy.epsilon = 2.0;
    EXPECT_THROW(bad.validate(), std::invalid_argument);
    auto wrong_dim = quick("Branin", "EI", 6);
    wrong_dim.moea = MoeaParams::for_dimension(3);
    EXPECT_THROW(wrong_dim.validate(), std::invalid_argument);
}

TEST(Persistence, RoundTripAndHashCheck) {
    TempDir dir("roundtrip");
    const auto cfg = quick("WangFreitas", "EpsPF", 6);
    const auto rec = run_bo(cfg, 4);
    const auto path = run_path(dir.path(), cfg, 4);
    EXPECT_EQ(path.filename(), "run_004.json");
    EXPECT_EQ(path.parent_path().filename(), "EpsPF_eps0.1");
    save_run(path, rec);
    EXPECT_TRUE(fs::exists(timing_path(path)));
    const auto back = load_run(path);
    EXPECT_EQ(back.serialize(), rec.serialize());
    EXPECT_EQ(back.rows, rec.rows);
    EXPECT_EQ(back.config.hash(), cfg.hash());

    auto j = Json::parse(detail::read_file(path));
    j["config"]["budget"] = 7;
    EXPECT_THROW(RunRecord::from_json(j), RunFormatError);
    j = Json::parse(detail::read_file(path));
    j["format"] = "other";
    EXPECT_THROW(RunRecord::from_json(j), RunFormatError);
}

TEST(Persistence, HashIgnoresBatchOnlyFields) {
    auto a = quick("Branin", "EI", 10);
    auto b = a;
    b.repeats = 51;
    b.out_dir = "elsewhere";
    EXPECT_EQ(a.hash(), b.hash());
    b.budget = 11;
    EXPECT_NE(a.hash(), b.hash());
    auto c = quick("Branin", "EpsPF", 10);
    auto e = c;
    e.strategy.epsilon = 0.2;
    EXPECT_NE(c.hash(), e.hash());
}

TEST(Experiment, RunsMatrixResumesAndSummarises) {
    TempDir dir("matrix");
    ExperimentMatrix mx;
    mx.problems = {"WangFreitas"};
    mx.strategies = {StrategyId::parse("EpsRS"), StrategyId::parse("Exploit")};
    mx.base.budget = 6;
    mx.base.repeats = 3;
    mx.base.seed = 3;
    mx.base.gp_restarts = 2;
    mx.base.out_dir = dir.path().string();
    mx.threads = 2;

    const auto first = run_experiment(mx);
    EXPECT_TRUE(first.failures.empty());
    EXPECT_EQ(first.executed, 6);
    ASSERT_EQ(first.records.size(), 6u);
    ASSERT_EQ(first.problems.size(), 1u);
    ASSERT_TRUE(first.problems[0].table.has_value());
    EXPECT_EQ(first.problems[0].table->rows.size(), 2u);
    EXPECT_EQ(first.problems[0].table->rows[0].method, "EpsRS_eps0.1");
    for (const char* f : {"manifest.json", "summary.json", "tables.txt"}) EXPECT_TRUE(fs::exists(dir.path() / f)) << f;

    int callbacks = 0;
    const auto second = run_experiment(mx, [&](const RunRecord&, bool reused) {
        ++callbacks;
        EXPECT_TRUE(reused);
    });
    EXPECT_EQ(second.executed, 0);
    EXPECT_EQ(second.reused, 6);
    EXPECT_EQ(callbacks, 6);
    for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(second.records[i].serialize(), first.records[i].serialize());

    // Persisted files reproduce the table medians.
    const auto loaded = load_runs(dir.path());
    ASSERT_EQ(loaded.size(), 6u);
    const auto summary = summarize(loaded, mx.strategies);
    const auto& table = *summary[0].table;
    for (const auto& row : table.rows) {
        std::vector<double> regrets;
        for (const auto& r : loaded)
            if (r.method_label() == row.method) regrets.push_back(r.best() - summary[0].f_opt);
        const auto mm = median_mad(regrets);
        EXPECT_EQ(row.median, mm.median);
        EXPECT_EQ(row.mad, mm.mad);
    }

    // Convergence: one row per (strategy, t), final medians equal the table.
    const std::string tsv = emit_convergence(loaded, summary[0].f_opt);
    EXPECT_EQ(tsv.substr(0, tsv.find('\n')), "strategy\tt\tq25\tmedian\tq75");
    const auto rows = split_tsv(tsv);
    ASSERT_EQ(rows.size(), 12u);
    EXPECT_EQ(rows[5][0], 6.0);
    const double conv_median_last = rows[5][2];
    const std::string first_label = tsv.substr(tsv.find('\n') + 1, tsv.find('\t', tsv.find('\n')) - tsv.find('\n') - 1);
    for (const auto& row : table.rows)
        if (row.method == first_label) {
            EXPECT_DOUBLE_EQ(row.median, conv_median_last);
        }
    for (const auto& r : rows) {
        EXPECT_LE(r[1], r[2]);
        EXPECT_LE(r[2], r[3]);
    }

    // A changed configuration invalidates the stored runs.
    mx.base.budget = 7;
    const auto third = run_experiment(mx);
    EXPECT_EQ(third.executed, 6);
}

TEST(Experiment, IncompleteMethodsAreExcluded) {
    std::vector<RunRecord> recs;
    for (int rep = 0; rep < 3; ++rep) {
        recs.push_back(run_bo(quick("Branin", "LHS", 5), rep));
        recs.push_back(run_bo(quick("Branin", "Uniform", 5), rep));
    }
    recs.push_back(run_bo(quick("Branin", "EI", 5), 0));
    const auto s = summarize(recs);
    ASSERT_EQ(s.size(), 1u);
    EXPECT_EQ(s[0].results.size(), 2u);
    ASSERT_FALSE(s[0].notes.empty());
    EXPECT_NE(s[0].notes.back().find("EI"), std::string::npos);
    EXPECT_NE(render_table(s[0]).find("LHS"), std::string::npos);
}

TEST(Experiment, ReferenceOptimumLoweredToBestFound) {
    auto rec = run_bo(quick("Branin", "LHS", 5), 0);
    auto other = run_bo(quick("Branin", "Uniform", 5), 0);
    const double below = find_problem("Branin").f_opt_ref - 0.5;
    rec.rows.back().best = below;
    const auto s = summarize({rec, other});
    EXPECT_EQ(s[0].f_opt, below);
    EXPECT_EQ(s[0].results[0].regrets[0], 0.0);
    EXPECT_FALSE(s[0].notes.empty());
}

TEST(Experiment, BatchFileAndEpsilonSweep) {
    const Json j = Json::parse(R"({"problems": ["Branin"], "strategies": ["EI", "EpsPF_eps0.2"],
                                   "budget": 30, "repeats": 5, "seed": 9, "out": "x", "threads": 1,
                                   "eps_sweep": true})");
    const auto mx = ExperimentMatrix::from_json(j);
    EXPECT_EQ(mx.base.budget, 30);
    EXPECT_EQ(mx.base.repeats, 5);
    EXPECT_EQ(mx.base.seed, 9u);
    EXPECT_EQ(mx.base.out_dir, "x");
    // 2 listed plus 2 methods × 6 sweep values, minus the duplicate EpsPF 0.2
    EXPECT_EQ(mx.strategies.size(), 13u);

    std::vector<RunRecord> recs;
    for (double eps : {0.05, 0.3})
        for (int rep = 0; rep < 2; ++rep) {
            auto cfg = quick("WangFreitas", "EpsRS", 4);
            cfg.strategy.epsilon = eps;
            recs.push_back(run_bo(cfg, rep));
        }
    const std::string report = eps_sweep_report(recs);
    EXPECT_EQ(report.substr(0, report.find('\n')), "problem\tmethod\tepsilon\tn\tmedian\tmad");
    EXPECT_EQ(std::count(report.begin(), report.end(), '\n'), 3);
    EXPECT_NE(report.find("WangFreitas\tEpsRS\t0.05\t2\t"), std::string::npos);
    EXPECT_NE(report.find("WangFreitas\tEpsRS\t0.3\t2\t"), std::string::npos);
}
