// Command-line driver: single-configuration runs, JSON-configured batches,
// reports over persisted runs and the benchmark catalogue.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "eebo/eebo.hpp"

namespace {

void print_progress(const eebo::RunRecord& rec, bool reused) {
    std::fprintf(stderr, "%-18s %-16s repeat %3d  regret %.4e  %s\n", rec.config.problem.c_str(),
                 rec.method_label().c_str(), rec.repeat, rec.final_regret, reused ? "(resumed)" : "");
    for (const auto& w : rec.warnings)
        if (w.find("reference updated") != std::string::npos) std::fprintf(stderr, "  warning: %s\n", w.c_str());
}

int finish(const eebo::ExperimentSummary& summary) {
    for (const auto& ps : summary.problems) std::cout << eebo::render_table(ps) << "\n";
    std::fprintf(stderr, "%d runs executed, %d resumed, %zu failed\n", summary.executed, summary.reused,
                 summary.failures.size());
    for (const auto& f : summary.failures)
        std::fprintf(stderr, "  failed: %s %s repeat %d: %s\n", f.problem.c_str(), f.method.c_str(), f.repeat,
                     f.message.c_str());
    return summary.failures.empty() ? 0 : 1;
}

std::string catalogue_json() {
    eebo::Json out = eebo::Json::array();
    for (const auto& p : eebo::problem_registry()) {
        eebo::Json j;
        j["id"] = p.id;
        j["d"] = p.d;
        j["lower"] = std::vector<double>(p.lower.data(), p.lower.data() + p.d);
        j["upper"] = std::vector<double>(p.upper.data(), p.upper.data() + p.d);
        j["transform"] = p.transform == eebo::Transform::Log ? "log" : "none";
        j["shift"] = p.shift;
        j["f_opt_ref"] = eebo::detail::json_number(p.f_opt_ref);
        j["provenance"] = p.provenance;
        if (!p.note.empty()) j["note"] = p.note;
        out.push_back(std::move(j));
    }
    return out.dump(1);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian optimisation benchmark harness"};
    app.require_subcommand(1);

    eebo::ExperimentMatrix run_matrix;
    std::string problem, method;
    std::optional<double> epsilon;
    auto* run = app.add_subcommand("run", "Run one problem/method for R repeats");
    run->add_option("--problem", problem, "Problem id (see `catalogue`)")->required();
    run->add_option("--method", method, "Strategy: LHS Uniform Explore Exploit EI PI UCB PFRandom EpsPF EpsRS")
        ->required();
    run->add_option("--epsilon", epsilon, "ε for EpsPF/EpsRS (default 0.1)");
    run->add_option("--budget", run_matrix.base.budget, "Total evaluations T")->capture_default_str();
    run->add_option("--init", run_matrix.base.init, "Initial LHS samples M (default 2d)");
    run->add_option("--repeats", run_matrix.base.repeats, "Repeats R")->capture_default_str();
    run->add_option("--seed", run_matrix.base.seed, "Master seed")->capture_default_str();
    run->add_option("--gp-restarts", run_matrix.base.gp_restarts, "Likelihood restarts per fit")->capture_default_str();
    run->add_option("--out", run_matrix.base.out_dir, "Output directory")->capture_default_str();
    run->add_option("--threads", run_matrix.threads, "Worker threads (0: all cores)")->capture_default_str();
    bool no_resume = false;
    run->add_flag("--no-resume", no_resume, "Rerun even when matching records exist");

    std::string batch_file;
    auto* batch = app.add_subcommand("batch", "Run a problem x strategy matrix from a JSON file");
    batch->add_option("--config", batch_file, "Batch file")->required()->check(CLI::ExistingFile);

    std::string in_dir;
    bool want_table = false, want_convergence = false, want_sweep = false;
    auto* report = app.add_subcommand("report", "Summarise persisted runs");
    report->add_option("--in", in_dir, "Directory containing run files")->required()->check(CLI::ExistingDirectory);
    report->add_flag("--table", want_table, "Comparison tables (default)");
    report->add_flag("--convergence", want_convergence, "Regret quantiles per t, written per problem");
    report->add_flag("--eps-sweep", want_sweep, "Median/MAD per ε for the ε-greedy methods");

    auto* catalogue = app.add_subcommand("catalogue", "Print the benchmark registry as JSON");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            run_matrix.problems = {problem};
            run_matrix.strategies = {eebo::StrategyId::parse(method, epsilon)};
            run_matrix.resume = !no_resume;
            return finish(eebo::run_experiment(run_matrix, print_progress));
        }
        if (*batch) {
            const auto matrix = eebo::ExperimentMatrix::from_json(
                eebo::Json::parse(eebo::detail::read_file(batch_file)));
            return finish(eebo::run_experiment(matrix, print_progress));
        }
        if (*report) {
            const auto records = eebo::load_runs(in_dir);
            if (records.empty()) {
                std::cerr << "no run files under " << in_dir << "\n";
                return 1;
            }
            if (!want_convergence && !want_sweep) want_table = true;
            const auto summaries = eebo::summarize(records);
            if (want_table)
                for (const auto& ps : summaries) std::cout << eebo::render_table(ps) << "\n";
            if (want_convergence) {
                for (const auto& ps : summaries) {
                    std::vector<eebo::RunRecord> subset;
                    for (const auto& r : records)
                        if (r.config.problem == ps.problem) subset.push_back(r);
                    const auto path = std::filesystem::path(in_dir) / (ps.problem + ".convergence.tsv");
                    eebo::detail::write_file_atomic(path, eebo::emit_convergence(subset, ps.f_opt));
                    std::cout << "wrote " << path.string() << "\n";
                }
            }
            if (want_sweep) std::cout << eebo::eps_sweep_report(records);
            return 0;
        }
        if (*catalogue) {
            std::cout << catalogue_json() << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
