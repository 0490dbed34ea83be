#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "json.hpp"

#include "eebo/benchmarks.hpp"
#include "eebo/gp.hpp"
#include "eebo/pareto.hpp"
#include "eebo/rng.hpp"
#include "eebo/sampling.hpp"
#include "eebo/stats.hpp"
#include "eebo/strategies.hpp"

namespace eebo {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view kRunFormat = "eebo-run/1";
inline constexpr std::array<double, 6> kEpsSweep{0.01, 0.05, 0.1, 0.2, 0.3, 0.5};

struct RunFormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

// JSON has no infinities; they are stored as the strings "inf" / "-inf".
inline Json json_number(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

inline double json_double(const Json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    }
    throw RunFormatError("expected a number, got " + j.dump());
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::create_directories(path.parent_path());
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace detail

/// One (problem, strategy) configuration. `init = 0` means 2d initial samples
/// and an empty `moea` means MoeaParams::for_dimension(d).
struct ExperimentConfig {
    std::string problem;
    StrategyId strategy;
    int budget = 250;
    int init = 0;
    int repeats = 51;
    std::uint64_t seed = 0;
    int gp_restarts = 10;
    int lhs_candidates = 100;
    std::optional<MoeaParams> moea;
    std::string out_dir = "results";

    int dim() const { return find_problem(problem).d; }
    int initial_samples() const { return init > 0 ? init : 2 * dim(); }
    MoeaParams moea_params() const { return moea ? *moea : MoeaParams::for_dimension(dim()); }

    void validate() const {
        const Problem& p = find_problem(problem);
        const int m = initial_samples();
        if (m < 1) throw std::invalid_argument("ExperimentConfig: init must be >= 1");
        if (budget < m) throw std::invalid_argument("ExperimentConfig: budget must be >= init");
        if (strategy.needs_model() && m < 2 && budget > m)
            throw std::invalid_argument("ExperimentConfig: model-based strategies need init >= 2");
        if (repeats < 1) throw std::invalid_argument("ExperimentConfig: repeats must be >= 1");
        if (gp_restarts < 1) throw std::invalid_argument("ExperimentConfig: gp_restarts must be >= 1");
        if (lhs_candidates < 1) throw std::invalid_argument("ExperimentConfig: lhs_candidates must be >= 1");
        if (strategy.epsilon < 0.0 || strategy.epsilon > 1.0)
            throw std::invalid_argument("ExperimentConfig: epsilon must lie in [0, 1]");
        const MoeaParams mp = moea_params();
        if (mp.dim != p.d) throw std::invalid_argument("ExperimentConfig: moea dimension mismatch");
        mp.validate();
    }

    /// Fields that determine a run's trace. Repeat count and output directory
    /// are batch properties and are left out.
    Json snapshot() const {
        const MoeaParams mp = moea_params();
        Json j;
        j["problem"] = problem;
        j["strategy"] = std::string(method_name(strategy.method));
        if (strategy.is_eps_greedy()) j["epsilon"] = strategy.epsilon;
        j["budget"] = budget;
        j["init"] = initial_samples();
        j["seed"] = seed;
        j["gp_restarts"] = gp_restarts;
        j["lhs_candidates"] = lhs_candidates;
        j["moea"] = {{"pop_size", mp.pop_size},
                     {"generations", mp.generations},
                     {"crossover_prob", mp.crossover_prob},
                     {"mutation_prob", mp.mutation_prob},
                     {"eta_crossover", mp.eta_crossover},
                     {"eta_mutation", mp.eta_mutation},
                     {"eval_budget_cap", mp.eval_budget_cap}};
        return j;
    }

    std::uint64_t hash() const { return fnv1a64(snapshot().dump()); }

    static ExperimentConfig from_snapshot(const Json& j) {
        ExperimentConfig c;
        c.problem = j.at("problem").get<std::string>();
        std::optional<double> eps;
        if (j.contains("epsilon")) eps = j.at("epsilon").get<double>();
        c.strategy = StrategyId::parse(j.at("strategy").get<std::string>(), eps);
        c.budget = j.at("budget").get<int>();
        c.init = j.at("init").get<int>();
        c.seed = j.at("seed").get<std::uint64_t>();
        c.gp_restarts = j.at("gp_restarts").get<int>();
        c.lhs_candidates = j.at("lhs_candidates").get<int>();
        const Json& m = j.at("moea");
        MoeaParams mp = MoeaParams::for_dimension(c.dim());
        mp.pop_size = m.at("pop_size").get<int>();
        mp.generations = m.at("generations").get<int>();
        mp.crossover_prob = m.at("crossover_prob").get<double>();
        mp.mutation_prob = m.at("mutation_prob").get<double>();
        mp.eta_crossover = m.at("eta_crossover").get<double>();
        mp.eta_mutation = m.at("eta_mutation").get<double>();
        mp.eval_budget_cap = m.at("eval_budget_cap").get<long>();
        c.moea = mp;
        return c;
    }
};

/// One expensive evaluation. `source` is "design", "baseline" (LHS/Uniform
/// continuation) or "model"; the trace fields are only meaningful for "model".
struct IterationRow {
    int t = 0;
    std::vector<double> x;
    double f = 0.0;
    double best = 0.0;
    std::string source;
    std::string branch = "none";
    std::size_t archive_size = 0;
    std::optional<double> acq_value;
    bool perturbed = false;

    static IterationRow from_source(std::string source) {
        IterationRow r;
        r.source = std::move(source);
        return r;
    }

    bool operator==(const IterationRow&) const = default;
};

struct RunTiming {
    double total_seconds = 0.0;
    double fit_seconds = 0.0;
    double select_seconds = 0.0;
};

struct RunRecord {
    ExperimentConfig config;
    int repeat = 0;
    std::vector<IterationRow> rows;
    double f_opt_ref = 0.0;
    bool f_opt_updated = false;
    double final_regret = 0.0;
    std::vector<std::string> warnings;
    RunTiming timing;  // persisted separately, never part of the record bytes

    std::string method_label() const { return config.strategy.label(); }
    double best() const { return rows.empty() ? std::numeric_limits<double>::infinity() : rows.back().best; }

    /// best-so-far(t) − f_opt for t = 1..T.
    std::vector<double> regret_trace(double f_opt) const {
        std::vector<double> r(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) r[i] = rows[i].best - f_opt;
        return r;
    }

    Json to_json() const {
        Json j;
        j["format"] = kRunFormat;
        j["config_hash"] = detail::hex64(config.hash());
        j["config"] = config.snapshot();
        j["repeat"] = repeat;
        j["f_opt_ref"] = detail::json_number(f_opt_ref);
        j["f_opt_updated"] = f_opt_updated;
        j["final_regret"] = detail::json_number(final_regret);
        j["warnings"] = warnings;
        Json rows_j = Json::array();
        for (const auto& r : rows) {
            Json row;
            row["t"] = r.t;
            row["x"] = r.x;
            row["f"] = detail::json_number(r.f);
            row["best"] = detail::json_number(r.best);
            row["source"] = r.source;
            row["branch"] = r.branch;
            row["archive"] = r.archive_size;
            row["acq"] = r.acq_value ? detail::json_number(*r.acq_value) : Json(nullptr);
            row["perturbed"] = r.perturbed;
            rows_j.push_back(std::move(row));
        }
        j["rows"] = std::move(rows_j);
        return j;
    }

    std::string serialize() const { return to_json().dump(1) + "\n"; }

    static RunRecord from_json(const Json& j) {
        if (j.value("format", std::string{}) != kRunFormat) throw RunFormatError("unsupported run record format");
        RunRecord r;
        r.config = ExperimentConfig::from_snapshot(j.at("config"));
        if (detail::hex64(r.config.hash()) != j.at("config_hash").get<std::string>())
            throw RunFormatError("config hash does not match the stored configuration");
        r.repeat = j.at("repeat").get<int>();
        r.f_opt_ref = detail::json_double(j.at("f_opt_ref"));
        r.f_opt_updated = j.at("f_opt_updated").get<bool>();
        r.final_regret = detail::json_double(j.at("final_regret"));
        r.warnings = j.at("warnings").get<std::vector<std::string>>();
        for (const auto& row : j.at("rows")) {
            IterationRow ir;
            ir.t = row.at("t").get<int>();
            ir.x = row.at("x").get<std::vector<double>>();
            ir.f = detail::json_double(row.at("f"));
            ir.best = detail::json_double(row.at("best"));
            ir.source = row.at("source").get<std::string>();
            ir.branch = row.at("branch").get<std::string>();
            ir.archive_size = row.at("archive").get<std::size_t>();
            if (!row.at("acq").is_null()) ir.acq_value = detail::json_double(row.at("acq"));
            ir.perturbed = row.at("perturbed").get<bool>();
            r.rows.push_back(std::move(ir));
        }
        return r;
    }

    static RunRecord parse(const std::string& text) { return from_json(Json::parse(text)); }
};

/// Algorithm loop for one repeat: a max-min LHS design of M points shared by
/// every strategy, then T − M model-driven (or baseline) evaluations. Minimised
/// objectives are negated before modelling.
inline RunRecord run_bo(const ExperimentConfig& cfg, int repeat) {
    using Clock = std::chrono::steady_clock;
    const auto t_start = Clock::now();
    cfg.validate();
    if (repeat < 0) throw std::invalid_argument("run_bo: repeat index must be >= 0");
    const Problem& prob = find_problem(cfg.problem);
    const int d = prob.d;
    const int m = cfg.initial_samples();
    const int budget = cfg.budget;

    RunStreams streams = RunStreams::derive(cfg.seed, prob.id, static_cast<std::uint64_t>(repeat));
    RunRecord rec;
    rec.config = cfg;
    rec.repeat = repeat;
    rec.rows.reserve(static_cast<std::size_t>(budget));

    double best = std::numeric_limits<double>::infinity();
    auto evaluate = [&](const Eigen::VectorXd& u, IterationRow row) {
        Eigen::VectorXd x = prob.from_unit_cube(u.cwiseMax(0.0).cwiseMin(1.0));
        x = x.cwiseMax(prob.lower).cwiseMin(prob.upper);
        const double f = prob.evaluate(x);
        best = std::min(best, f);
        row.t = static_cast<int>(rec.rows.size()) + 1;
        row.x.assign(x.data(), x.data() + x.size());
        row.f = f;
        row.best = best;
        rec.rows.push_back(std::move(row));
        return f;
    };

    const Design design = maximin_lhs(m, d, streams.design, cfg.lhs_candidates);
    Eigen::VectorXd y_neg(m);
    for (int i = 0; i < m; ++i) y_neg[i] = -evaluate(design.points.row(i).transpose(), IterationRow::from_source("design"));

    if (budget > m) {
        if (cfg.strategy.method == Method::LHS || cfg.strategy.method == Method::Uniform) {
            const Eigen::MatrixXd extra = cfg.strategy.method == Method::LHS
                                              ? extend_maximin_lhs(design.points, budget, streams.design, cfg.lhs_candidates)
                                              : uniform_design(budget - m, d, streams.design).points;
            for (Eigen::Index i = 0; i < extra.rows(); ++i) evaluate(extra.row(i).transpose(), IterationRow::from_source("baseline"));
        } else {
            Dataset data(design.points, y_neg, prob.lower, prob.upper);
            GpOptions gp_opts;
            gp_opts.restarts = cfg.gp_restarts;
            const MoeaParams moea = cfg.moea_params();
            std::optional<Hyperparams> warm;
            for (int t = m + 1; t <= budget; ++t) {
                const auto t_fit = Clock::now();
                const GpModel model = fit(data, gp_opts, streams.gp, warm);
                warm = model.theta();
                const auto t_sel = Clock::now();
                rec.timing.fit_seconds += std::chrono::duration<double>(t_sel - t_fit).count();

                SelectionContext ctx{model, streams.strategy, streams.moea, t, moea};
                SelectionTrace trace = select(cfg.strategy, ctx);
                Eigen::VectorXd x = trace.x.cwiseMax(0.0).cwiseMin(1.0);
                trace.perturbed = duplicate_guard(x, data.X(), streams.guard);
                rec.timing.select_seconds += std::chrono::duration<double>(Clock::now() - t_sel).count();
                if (trace.perturbed)
                    rec.warnings.push_back("t=" + std::to_string(t) + ": proposal repeated an observed input; perturbed");

                IterationRow row = IterationRow::from_source("model");
                row.branch = branch_name(trace.branch);
                row.archive_size = trace.archive_size;
                row.acq_value = trace.acq_value;
                row.perturbed = trace.perturbed;
                const double f = evaluate(x, std::move(row));
                data.append(x, -f);
            }
        }
    }

    rec.f_opt_ref = prob.f_opt_ref;
    if (best < rec.f_opt_ref) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "best value %.17g is below the reference optimum %.17g; reference updated", best,
                      rec.f_opt_ref);
        rec.warnings.emplace_back(buf);
        rec.f_opt_ref = best;
        rec.f_opt_updated = true;
    }
    rec.final_regret = best - rec.f_opt_ref;
    rec.timing.total_seconds = std::chrono::duration<double>(Clock::now() - t_start).count();
    return rec;
}

// ---------------------------------------------------------------------------
// Persistence

inline std::filesystem::path run_path(const std::filesystem::path& out_dir, const ExperimentConfig& cfg, int repeat) {
    char name[32];
    std::snprintf(name, sizeof name, "run_%03d.json", repeat);
    return out_dir / cfg.problem / cfg.strategy.label() / name;
}

inline std::filesystem::path timing_path(const std::filesystem::path& record_path) {
    auto p = record_path;
    p.replace_extension(".timing.json");
    return p;
}

inline void save_run(const std::filesystem::path& path, const RunRecord& rec) {
    detail::write_file_atomic(path, rec.serialize());
    Json t;
    t["total_seconds"] = rec.timing.total_seconds;
    t["fit_seconds"] = rec.timing.fit_seconds;
    t["select_seconds"] = rec.timing.select_seconds;
    detail::write_file_atomic(timing_path(path), t.dump(1) + "\n");
}

inline RunRecord load_run(const std::filesystem::path& path) {
    RunRecord rec = RunRecord::parse(detail::read_file(path));
    const auto tp = timing_path(path);
    if (std::filesystem::exists(tp)) {
        const Json t = Json::parse(detail::read_file(tp));
        rec.timing.total_seconds = t.value("total_seconds", 0.0);
        rec.timing.fit_seconds = t.value("fit_seconds", 0.0);
        rec.timing.select_seconds = t.value("select_seconds", 0.0);
    }
    return rec;
}

/// Every run record below `dir`, ordered by (problem, method, repeat).
inline std::vector<RunRecord> load_runs(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
        const auto name = e.path().filename().string();
        if (e.is_regular_file() && name.starts_with("run_") && name.ends_with(".json") &&
            !name.ends_with(".timing.json"))
            files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<RunRecord> out;
    out.reserve(files.size());
    for (const auto& f : files) out.push_back(load_run(f));
    return out;
}

// ---------------------------------------------------------------------------
// Aggregation

struct ProblemSummary {
    std::string problem;
    double f_opt = 0.0;  // registry value, lowered to the best value any run found
    std::vector<MethodResults> results;
    std::optional<ComparisonTable> table;
    std::vector<std::string> notes;
};

/// Registration order of methods: enum order, then ε.
inline bool method_order_less(const StrategyId& a, const StrategyId& b) {
    if (a.method != b.method) return a.method < b.method;
    return a.epsilon < b.epsilon && a.is_eps_greedy();
}

/// Groups records by problem and builds a comparison table per problem from
/// the final regrets. Methods appear in `order` when given, otherwise in
/// registration order; methods whose repeat sets differ from the most
/// complete one are left out of the table with a note.
inline std::vector<ProblemSummary> summarize(const std::vector<RunRecord>& records,
                                             const std::vector<StrategyId>& order = {}, double alpha = 0.05) {
    std::vector<std::string> problems;
    for (const auto& r : records)
        if (std::find(problems.begin(), problems.end(), r.config.problem) == problems.end())
            problems.push_back(r.config.problem);
    std::sort(problems.begin(), problems.end());

    std::vector<ProblemSummary> out;
    for (const auto& pid : problems) {
        ProblemSummary ps;
        ps.problem = pid;
        ps.f_opt = find_problem(pid).f_opt_ref;
        std::vector<StrategyId> methods = order;
        std::map<std::string, std::map<int, const RunRecord*>> by_method;
        for (const auto& r : records) {
            if (r.config.problem != pid) continue;
            ps.f_opt = std::min(ps.f_opt, r.best());
            by_method[r.method_label()][r.repeat] = &r;
            const auto same = [&](const StrategyId& s) { return s.label() == r.method_label(); };
            if (std::none_of(methods.begin(), methods.end(), same)) methods.push_back(r.config.strategy);
        }
        if (order.empty()) std::stable_sort(methods.begin(), methods.end(), method_order_less);
        if (ps.f_opt < find_problem(pid).f_opt_ref) ps.notes.push_back("reference optimum lowered to the best value found");

        std::vector<int> repeats;
        for (const auto& [label, runs] : by_method) {
            if (runs.size() <= repeats.size()) continue;
            repeats.clear();
            for (const auto& kv : runs) repeats.push_back(kv.first);
        }
        for (const auto& s : methods) {
            const auto it = by_method.find(s.label());
            if (it == by_method.end()) continue;
            MethodResults mr{s.label(), {}};
            bool complete = true;
            for (int rep : repeats) {
                const auto jt = it->second.find(rep);
                if (jt == it->second.end()) {
                    complete = false;
                    break;
                }
                mr.regrets.push_back(jt->second->best() - ps.f_opt);
            }
            if (!complete) {
                ps.notes.push_back(s.label() + ": incomplete repeats, excluded from the table");
                continue;
            }
            ps.results.push_back(std::move(mr));
        }
        if (ps.results.size() >= 2) ps.table = build_table(ps.results, alpha);
        out.push_back(std::move(ps));
    }
    return out;
}

inline Json table_json(const ProblemSummary& ps) {
    Json j;
    j["problem"] = ps.problem;
    j["f_opt"] = detail::json_number(ps.f_opt);
    j["notes"] = ps.notes;
    if (!ps.table) {
        j["table"] = nullptr;
        return j;
    }
    const auto& t = *ps.table;
    Json tj;
    tj["alpha"] = t.alpha;
    tj["best"] = t.rows[t.best_index].method;
    tj["median_tie_broken_by_order"] = t.median_tie;
    Json rows = Json::array();
    for (const auto& r : t.rows) {
        rows.push_back({{"method", r.method},
                        {"median", detail::json_number(r.median)},
                        {"mad", detail::json_number(r.mad)},
                        {"best", r.best},
                        {"equivalent", r.equivalent},
                        {"p_value", r.p_value},
                        {"p_adjusted", r.p_adjusted},
                        {"note", r.note}});
    }
    tj["rows"] = std::move(rows);
    j["table"] = std::move(tj);
    return j;
}

/// Aligned text table; "*" marks the best median, "=" methods statistically
/// equivalent to it.
inline std::string render_table(const ProblemSummary& ps) {
    std::ostringstream os;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s  (f_opt = %.10g)\n", ps.problem.c_str(), ps.f_opt);
    os << buf;
    if (!ps.table) {
        os << "  fewer than two complete methods; no comparison\n";
    } else {
        std::snprintf(buf, sizeof buf, "  %-2s %-16s %12s %12s %10s %10s\n", "", "method", "median", "MAD", "p", "p_holm");
        os << buf;
        for (const auto& r : ps.table->rows) {
            const char* mark = r.best ? "*" : (r.equivalent ? "=" : "");
            std::snprintf(buf, sizeof buf, "  %-2s %-16s %12.4e %12.4e %10.4g %10.4g%s%s\n", mark, r.method.c_str(), r.median,
                          r.mad, r.p_value, r.p_adjusted, r.note.empty() ? "" : "  ", r.note.c_str());
            os << buf;
        }
        if (ps.table->median_tie) os << "  (median tie broken by method order)\n";
    }
    for (const auto& n : ps.notes) os << "  note: " << n << "\n";
    return os.str();
}

/// Per-strategy regret quantiles at every t, as TSV with the columns
/// strategy, t, q25, median, q75. `records` should come from one problem.
inline std::string emit_convergence(const std::vector<RunRecord>& records, double f_opt) {
    std::vector<std::string> labels;
    std::map<std::string, std::vector<const RunRecord*>> groups;
    for (const auto& r : records) {
        if (!groups.count(r.method_label())) labels.push_back(r.method_label());
        groups[r.method_label()].push_back(&r);
    }
    std::ostringstream os;
    os << "strategy\tt\tq25\tmedian\tq75\n";
    char buf[160];
    for (const auto& label : labels) {
        const auto& runs = groups[label];
        std::size_t len = std::numeric_limits<std::size_t>::max();
        for (const auto* r : runs) len = std::min(len, r->rows.size());
        for (std::size_t t = 0; t < len; ++t) {
            std::vector<double> v;
            v.reserve(runs.size());
            for (const auto* r : runs) v.push_back(r->rows[t].best - f_opt);
            std::snprintf(buf, sizeof buf, "%s\t%zu\t%.17g\t%.17g\t%.17g\n", label.c_str(), t + 1, quantile(v, 0.25),
                          quantile(v, 0.5), quantile(v, 0.75));
            os << buf;
        }
    }
    return os.str();
}

/// Median/MAD of final regret for every ε-greedy configuration, as TSV with
/// the columns problem, method, epsilon, n, median, mad.
inline std::string eps_sweep_report(const std::vector<RunRecord>& records) {
    const auto summaries = summarize(records);
    std::map<std::string, double> f_opt;
    for (const auto& s : summaries) f_opt[s.problem] = s.f_opt;

    std::map<std::tuple<std::string, int, double>, std::vector<double>> groups;
    for (const auto& r : records) {
        if (!r.config.strategy.is_eps_greedy()) continue;
        groups[{r.config.problem, static_cast<int>(r.config.strategy.method), r.config.strategy.epsilon}].push_back(
            r.best() - f_opt[r.config.problem]);
    }
    std::ostringstream os;
    os << "problem\tmethod\tepsilon\tn\tmedian\tmad\n";
    char buf[256];
    for (const auto& [key, regrets] : groups) {
        const auto& [pid, method, eps] = key;
        const auto mm = median_mad(regrets);
        std::snprintf(buf, sizeof buf, "%s\t%s\t%g\t%zu\t%.17g\t%.17g\n", pid.c_str(),
                      std::string(method_name(static_cast<Method>(method))).c_str(), eps, regrets.size(), mm.median,
                      mm.mad);
        os << buf;
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Batches

/// Problems × strategies × repeats sharing the remaining settings of `base`.
struct ExperimentMatrix {
    std::vector<std::string> problems;
    std::vector<StrategyId> strategies;
    ExperimentConfig base;
    int threads = 0;  // 0: hardware concurrency
    bool resume = true;

    /// Adds EpsPF and EpsRS at every sweep ε not already present.
    void add_eps_sweep() {
        for (Method m : {Method::EpsPF, Method::EpsRS})
            for (double e : kEpsSweep) {
                const StrategyId s{m, e};
                const auto same = [&](const StrategyId& o) { return o.label() == s.label(); };
                if (std::none_of(strategies.begin(), strategies.end(), same)) strategies.push_back(s);
            }
    }

    /// Reads the batch file layout documented in the README.
    static ExperimentMatrix from_json(const Json& j) {
        ExperimentMatrix m;
        m.problems = j.at("problems").get<std::vector<std::string>>();
        for (const auto& s : j.at("strategies")) m.strategies.push_back(StrategyId::parse(s.get<std::string>()));
        m.base.budget = j.value("budget", m.base.budget);
        m.base.init = j.value("init", m.base.init);
        m.base.repeats = j.value("repeats", m.base.repeats);
        m.base.seed = j.value("seed", m.base.seed);
        m.base.gp_restarts = j.value("gp_restarts", m.base.gp_restarts);
        m.base.lhs_candidates = j.value("lhs_candidates", m.base.lhs_candidates);
        m.base.out_dir = j.value("out", m.base.out_dir);
        m.threads = j.value("threads", m.threads);
        m.resume = j.value("resume", m.resume);
        if (j.value("eps_sweep", false)) m.add_eps_sweep();
        return m;
    }
};

struct RunFailure {
    std::string problem;
    std::string method;
    int repeat = 0;
    std::string message;
};

struct ExperimentSummary {
    std::vector<RunRecord> records;
    std::vector<ProblemSummary> problems;
    std::vector<RunFailure> failures;
    int executed = 0;
    int reused = 0;
};

using RunCallback = std::function<void(const RunRecord&, bool reused)>;

/// Runs every (problem, strategy, repeat) cell on a thread pool, persisting
/// each record as it completes; with `resume`, records on disk whose config
/// hash matches are loaded instead of rerun. Failed runs are collected and
/// the batch carries on. Afterwards writes manifest.json, summary.json and
/// tables.txt to the output directory.
inline ExperimentSummary run_experiment(const ExperimentMatrix& matrix, const RunCallback& on_done = {}) {
    struct Task {
        ExperimentConfig cfg;
        int repeat;
    };
    std::vector<Task> tasks;
    for (const auto& pid : matrix.problems)
        for (const auto& s : matrix.strategies) {
            ExperimentConfig cfg = matrix.base;
            cfg.problem = pid;
            cfg.strategy = s;
            cfg.moea.reset();
            cfg.validate();
            for (int r = 0; r < cfg.repeats; ++r) tasks.push_back({cfg, r});
        }

    const std::filesystem::path out_dir = matrix.base.out_dir;
    std::vector<std::optional<RunRecord>> slots(tasks.size());
    std::vector<bool> reused(tasks.size(), false);
    std::vector<std::optional<RunFailure>> failures(tasks.size());
    std::atomic<std::size_t> next{0};
    std::mutex callback_mutex;

    auto worker = [&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++) {
            const auto& task = tasks[i];
            const auto path = run_path(out_dir, task.cfg, task.repeat);
            try {
                if (matrix.resume && std::filesystem::exists(path)) {
                    try {
                        RunRecord rec = load_run(path);
                        if (rec.config.hash() == task.cfg.hash() && rec.repeat == task.repeat) {
                            slots[i] = std::move(rec);
                            reused[i] = true;
                        }
                    } catch (const std::exception&) {
                        // Unreadable or stale files are rerun and overwritten.
                    }
                }
                if (!slots[i]) {
                    RunRecord rec = run_bo(task.cfg, task.repeat);
                    save_run(path, rec);
                    slots[i] = std::move(rec);
                }
                if (on_done) {
                    std::lock_guard lock(callback_mutex);
                    on_done(*slots[i], reused[i]);
                }
            } catch (const std::exception& e) {
                failures[i] = RunFailure{task.cfg.problem, task.cfg.strategy.label(), task.repeat, e.what()};
            }
        }
    };
    int n_threads = matrix.threads > 0 ? matrix.threads : static_cast<int>(std::thread::hardware_concurrency());
    n_threads = std::clamp(n_threads, 1, static_cast<int>(std::max<std::size_t>(1, tasks.size())));
    std::vector<std::thread> pool;
    for (int k = 1; k < n_threads; ++k) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    ExperimentSummary summary;
    Json manifest;
    manifest["format"] = "eebo-manifest/1";
    Json runs = Json::array();
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        if (failures[i]) {
            summary.failures.push_back(*failures[i]);
            continue;
        }
        (reused[i] ? summary.reused : summary.executed) += 1;
        const auto path = run_path(out_dir, tasks[i].cfg, tasks[i].repeat);
        runs.push_back({{"problem", tasks[i].cfg.problem},
                        {"method", tasks[i].cfg.strategy.label()},
                        {"repeat", tasks[i].repeat},
                        {"config_hash", detail::hex64(tasks[i].cfg.hash())},
                        {"file", std::filesystem::relative(path, out_dir).generic_string()}});
        summary.records.push_back(std::move(*slots[i]));
    }
    manifest["runs"] = std::move(runs);
    Json failed = Json::array();
    for (const auto& f : summary.failures)
        failed.push_back({{"problem", f.problem}, {"method", f.method}, {"repeat", f.repeat}, {"error", f.message}});
    manifest["failures"] = std::move(failed);

    summary.problems = summarize(summary.records, matrix.strategies);
    Json tables = Json::array();
    std::string text;
    for (const auto& ps : summary.problems) {
        tables.push_back(table_json(ps));
        text += render_table(ps) + "\n";
    }
    detail::write_file_atomic(out_dir / "manifest.json", manifest.dump(1) + "\n");
    detail::write_file_atomic(out_dir / "summary.json", tables.dump(1) + "\n");
    detail::write_file_atomic(out_dir / "tables.txt", text);
    return summary;
}

}  // namespace eebo
