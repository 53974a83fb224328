#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qnlb/harness.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Quantum non-linear bandit optimizer (simulated oracles)"};
    app.require_subcommand(1);

    qnlb::ExperimentOptions opts;
    std::string out_dir = "runs";
    std::string config_path;
    auto* run = app.add_subcommand("run", "run seeded repeats and write trace/aggregate CSVs");
    run->add_option("--task", opts.task, "rastrigin | styblinski | tabular:<path> | planted:<family>:<d_x>[:<seed>]")
        ->required();
    run->add_option("--model", opts.model, "linear | quadratic | mlp");
    run->add_option("--T", opts.horizon, "horizon (rounds per run)");
    run->add_option("--repeats", opts.repeats, "number of seeded repeats")->capture_default_str();
    run->add_option("--seed", opts.seed, "base seed (QNLB_SEED overrides)")->capture_default_str();
    run->add_option("--beta", opts.beta, "practical | theoretical");
    run->add_option("--qme-mode", opts.qme_mode, "det | inject");
    run->add_option("--out", out_dir, "output directory")->capture_default_str();
    run->add_option("--config", config_path, "flat key = value config file");
    run->add_flag("--qlinucb", opts.qlinucb, "run the linear baseline preset");

    auto* check = app.add_subcommand("check", "run the invariant self-check suite");

    std::vector<double> eps{0.2, 0.1, 0.05, 0.025};
    double delta = 0.01;
    double sigma2 = 0.01;
    double c1 = 1.0;
    auto* budget = app.add_subcommand("budget", "compare quantum and classical query counts");
    budget->add_option("--eps", eps, "precision schedule")->delimiter(',');
    budget->add_option("--delta", delta)->capture_default_str();
    budget->add_option("--sigma2", sigma2)->capture_default_str();
    budget->add_option("--c1", c1)->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            opts.out = out_dir;
            if (!config_path.empty()) opts.config = config_path;
            return qnlb::run_experiment(opts, std::cout, std::cerr);
        }
        if (*check) {
            return qnlb::run_invariant_suite(std::cout);
        }
        if (*budget) {
            const std::vector<double> deltas(eps.size(), delta);
            const auto rows = qnlb::budget_report(eps, deltas, sigma2, c1);
            qnlb::write_budget_csv(std::cout, rows);
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
