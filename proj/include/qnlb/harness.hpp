#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "qnlb/bandit.hpp"
#include "qnlb/record.hpp"
#include "qnlb/tasks.hpp"

namespace qnlb {

// round,stage,x1..xd,y,inst_regret,cum_regret,q_queries,c_queries
void write_trace_csv(std::ostream& out, std::span<const TraceRow> rows, std::size_t input_dim);
std::vector<TraceRow> parse_trace_csv(std::istream& in);

struct AggregateRow {
    std::size_t round = 0;
    double mean_cum_regret = 0.0;
    double stderr_cum_regret = 0.0;
};

struct AggregateStats {
    std::vector<AggregateRow> rows;
    std::vector<bool> padded;  // per input trace
    bool any_padded() const;
};

// Per-round mean and sample-std / sqrt(R) of cumulative regret. Short traces
// are padded with their final value.
AggregateStats aggregate_repeats(std::span<const std::vector<TraceRow>> traces);

// round,mean_cum_regret,stderr_cum_regret
void write_aggregate_csv(std::ostream& out, const AggregateStats& stats);

struct BudgetRow {
    double eps = 0.0;
    double delta = 0.0;
    std::uint64_t quantum = 0;
    std::uint64_t classical = 0;
    double ratio = 0.0;  // quantum / classical
};

// Quantum estimator cost against the classical Monte Carlo count
// ceil(2 (sigma2 / eps^2) ln(2 / delta)) for the same (eps, delta).
std::vector<BudgetRow> budget_report(std::span<const double> eps, std::span<const double> delta,
                                     double sigma2, double c1);
void write_budget_csv(std::ostream& out, std::span<const BudgetRow> rows);

// rastrigin | styblinski | tabular:<path> | planted:<family>:<d_x>[:<seed>]
Task make_task(const std::string& spec);

// Violated run invariants, empty when the run is sound.
std::vector<std::string> check_run(const Task& task, const RunConfig& cfg, const RunRecord& record);

struct ExperimentOptions {
    std::string task = "rastrigin";
    std::size_t repeats = 5;
    std::uint64_t seed = 0;
    std::filesystem::path out = "runs";
    std::optional<std::filesystem::path> config;
    // Unset values fall back to the config file, then to built-in defaults.
    std::optional<std::string> model;
    std::optional<std::size_t> horizon;
    std::optional<std::string> beta;
    std::optional<std::string> qme_mode;
    bool qlinucb = false;
};

// Builds the run configuration for one repeat, applying task defaults, the
// config file, then explicit options.
RunConfig make_run_config(const ExperimentOptions& opts, const Task& task, std::uint64_t seed);

// Runs all repeats and writes trace_<i>.csv plus aggregate.csv into opts.out.
// Returns 0 iff every run completed and passed check_run.
int run_experiment(const ExperimentOptions& opts, std::ostream& out, std::ostream& err);

// Quick invariant suite behind the `check` subcommand.
int run_invariant_suite(std::ostream& out);

}  // namespace qnlb
