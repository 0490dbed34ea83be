// Optimises Branin with ε-PF from a shared LHS design and prints the trace.
#include <cstdio>

#include "eebo/eebo.hpp"

int main(int argc, char** argv) {
    eebo::ExperimentConfig cfg;
    cfg.problem = argc > 1 ? argv[1] : "Branin";
    cfg.strategy = eebo::StrategyId::parse(argc > 2 ? argv[2] : "EpsPF");
    cfg.budget = 30;
    cfg.seed = 7;

    const eebo::RunRecord rec = eebo::run_bo(cfg, 0);
    for (const auto& row : rec.rows)
        std::printf("%3d  %-8s %-8s f = %-14.8g best = %.8g\n", row.t, row.source.c_str(), row.branch.c_str(), row.f,
                    row.best);
    std::printf("regret after %d evaluations: %.3e (%.1f s)\n", cfg.budget, rec.final_regret, rec.timing.total_seconds);
    return 0;
}
