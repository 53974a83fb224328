#include "qnlb/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string_view>

#include <fmt/format.h>

#include "qnlb/config.hpp"

namespace qnlb {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

template <typename T>
T parse_number(std::string_view cell, std::size_t line) {
    T v{};
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw std::runtime_error(fmt::format("trace line {}: cannot parse '{}'", line, cell));
    }
    return v;
}

}  // namespace

void write_trace_csv(std::ostream& out, std::span<const TraceRow> rows, std::size_t input_dim) {
    out << "round,stage";
    for (std::size_t i = 1; i <= input_dim; ++i) out << ",x" << i;
    out << ",y,inst_regret,cum_regret,q_queries,c_queries\n";
    for (const auto& r : rows) {
        std::string line = fmt::format("{},{}", r.round, r.stage);
        for (Eigen::Index i = 0; i < r.x.size(); ++i) line += fmt::format(",{}", r.x[i]);
        line += fmt::format(",{},{},{},{},{}\n", r.y, r.inst_regret, r.cum_regret, r.quantum_queries,
                            r.classical_queries);
        out << line;
    }
}

std::vector<TraceRow> parse_trace_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error("trace is empty");
    }
    const auto header = split(line, ',');
    if (header.size() < 8 || header[0] != "round" || header[1] != "stage") {
        throw std::runtime_error("trace header is malformed");
    }
    const std::size_t dims = header.size() - 7;
    std::vector<TraceRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto cells = split(line, ',');
        if (cells.size() != dims + 7) {
            throw std::runtime_error(fmt::format("trace line {}: expected {} cells", line_no, dims + 7));
        }
        TraceRow r;
        r.round = parse_number<std::size_t>(cells[0], line_no);
        r.stage = parse_number<std::size_t>(cells[1], line_no);
        r.x.resize(static_cast<Eigen::Index>(dims));
        for (std::size_t i = 0; i < dims; ++i) {
            r.x[static_cast<Eigen::Index>(i)] = parse_number<double>(cells[2 + i], line_no);
        }
        r.y = parse_number<double>(cells[2 + dims], line_no);
        r.inst_regret = parse_number<double>(cells[3 + dims], line_no);
        r.cum_regret = parse_number<double>(cells[4 + dims], line_no);
        r.quantum_queries = parse_number<std::uint64_t>(cells[5 + dims], line_no);
        r.classical_queries = parse_number<std::uint64_t>(cells[6 + dims], line_no);
        rows.push_back(std::move(r));
    }
    return rows;
}

bool AggregateStats::any_padded() const {
    return std::find(padded.begin(), padded.end(), true) != padded.end();
}

AggregateStats aggregate_repeats(std::span<const std::vector<TraceRow>> traces) {
    if (traces.empty()) {
        throw std::invalid_argument("aggregate_repeats needs at least one trace");
    }
    std::size_t length = 0;
    for (const auto& t : traces) length = std::max(length, t.size());
    AggregateStats stats;
    for (const auto& t : traces) stats.padded.push_back(t.size() < length);

    const double reps = static_cast<double>(traces.size());
    for (std::size_t k = 0; k < length; ++k) {
        double sum = 0.0;
        std::vector<double> vals;
        vals.reserve(traces.size());
        for (const auto& t : traces) {
            const double v = t.empty() ? 0.0 : (k < t.size() ? t[k].cum_regret : t.back().cum_regret);
            vals.push_back(v);
            sum += v;
        }
        const double mean = sum / reps;
        double se = 0.0;
        if (traces.size() > 1) {
            double ss = 0.0;
            for (double v : vals) ss += (v - mean) * (v - mean);
            se = std::sqrt(ss / (reps - 1.0)) / std::sqrt(reps);
        }
        stats.rows.push_back(AggregateRow{k + 1, mean, se});
    }
    return stats;
}

void write_aggregate_csv(std::ostream& out, const AggregateStats& stats) {
    out << "round,mean_cum_regret,stderr_cum_regret\n";
    for (const auto& r : stats.rows) {
        out << fmt::format("{},{},{}\n", r.round, r.mean_cum_regret, r.stderr_cum_regret);
    }
}

std::vector<BudgetRow> budget_report(std::span<const double> eps, std::span<const double> delta, double sigma2,
                                     double c1) {
    if (eps.size() != delta.size()) {
        throw std::invalid_argument("budget_report needs matched eps and delta schedules");
    }
    std::vector<BudgetRow> rows;
    for (std::size_t i = 0; i < eps.size(); ++i) {
        BudgetRow r;
        r.eps = eps[i];
        r.delta = delta[i];
        r.quantum = qme_query_cost(r.eps, r.delta, c1);
        const double classical = 2.0 * (sigma2 / (r.eps * r.eps)) * std::log(2.0 / r.delta);
        r.classical = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(classical)));
        r.ratio = static_cast<double>(r.quantum) / static_cast<double>(r.classical);
        rows.push_back(r);
    }
    return rows;
}

void write_budget_csv(std::ostream& out, std::span<const BudgetRow> rows) {
    out << "eps,delta,quantum_queries,classical_queries,ratio\n";
    for (const auto& r : rows) {
        out << fmt::format("{},{},{},{},{}\n", r.eps, r.delta, r.quantum, r.classical, r.ratio);
    }
}

Task make_task(const std::string& spec) {
    if (spec == "rastrigin") return Task::rastrigin();
    if (spec == "styblinski" || spec == "styblinski_tang") return Task::styblinski_tang();
    if (spec.starts_with("tabular:")) {
        return Task(load_tabular(spec.substr(8)));
    }
    if (spec.starts_with("planted:")) {
        const auto parts = split(std::string_view(spec).substr(8), ':');
        if (parts.size() < 2 || parts.size() > 3) {
            throw std::invalid_argument("planted task spec is planted:<family>:<d_x>[:<seed>]");
        }
        ModelSpec model;
        model.family = parse_model_family(parts[0]);
        model.input_dim = parse_number<std::size_t>(parts[1], 0);
        const std::uint64_t seed = parts.size() == 3 ? parse_number<std::uint64_t>(parts[2], 0) : 0;
        model.validate();
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        ParamVector w(static_cast<Eigen::Index>(model.param_dim()));
        for (auto& v : w) v = unit(rng);
        return Task(PlantedTask{model, w, BoxDomain::cube(model.input_dim, -1.0, 1.0)});
    }
    throw std::invalid_argument(fmt::format("unknown task '{}'", spec));
}

std::vector<std::string> check_run(const Task& task, const RunConfig& cfg, const RunRecord& record) {
    std::vector<std::string> bad;
    const auto horizon = cfg.bandit.horizon;
    std::size_t rounds = 0;
    double inv_eps = 0.0;
    double inv_eps2 = 0.0;
    for (const auto& st : record.stages) {
        rounds += st.rounds;
        if (st.rounds < 1) bad.push_back(fmt::format("stage {} played no rounds", st.s));
        bool feasible = true;
        if (task.is_tabular()) {
            const auto& tab = std::get<TabularTask>(task.variant());
            if (snap_to_grid(tab, st.x) != st.x) bad.push_back(fmt::format("stage {} action is not a grid row", st.s));
        } else if (!task.domain().contains(st.x)) {
            bad.push_back(fmt::format("stage {} action lies outside the domain", st.s));
            feasible = false;
        }
        if (feasible && cfg.qme.mode == QmeMode::deterministic_bounded &&
            !(std::abs(st.y - task.eval_true(st.x)) <= st.eps)) {
            bad.push_back(fmt::format("stage {} observation outside its eps bound", st.s));
        }
        if (!st.truncated) {
            inv_eps += 1.0 / st.eps;
            inv_eps2 += 1.0 / (st.eps * st.eps);
        }
    }
    const double t = static_cast<double>(horizon);
    if (inv_eps > t) bad.push_back(fmt::format("sum of 1/eps over full stages is {} > T", inv_eps));
    if (inv_eps2 > t * t) bad.push_back(fmt::format("sum of 1/eps^2 over full stages is {} > T^2", inv_eps2));
    if (record.stages.size() > record.max_stages) {
        bad.push_back(fmt::format("{} stages exceed the bound {}", record.stages.size(), record.max_stages));
    }
    if (record.rows.size() != std::min(horizon, rounds)) {
        bad.push_back(fmt::format("trace has {} rows, expected {}", record.rows.size(), std::min(horizon, rounds)));
    }
    double cum = 0.0;
    for (std::size_t k = 0; k < record.rows.size(); ++k) {
        const auto& row = record.rows[k];
        cum += row.inst_regret;
        if (row.round != k + 1 || row.cum_regret != cum) {
            bad.push_back(fmt::format("trace row {} breaks the running regret sum", k + 1));
            break;
        }
    }
    return bad;
}

RunConfig make_run_config(const ExperimentOptions& opts, const Task& task, std::uint64_t seed) {
    RunConfig cfg;
    cfg.model.input_dim = task.input_dim();
    const auto name = task.name();
    if (name == "styblinski") {
        cfg.bandit.lr_x = 1e-5;
        cfg.bandit.lr_w = 1e-5;
    }
    cfg.regression.seed = splitmix64(seed ^ 0x1ULL);
    cfg.qme.seed = splitmix64(seed ^ 0x2ULL);
    cfg.bandit.seed = splitmix64(seed ^ 0x3ULL);
    if (opts.config) {
        apply_config(cfg, load_key_values(*opts.config));
    }
    if (opts.model) cfg.model.family = parse_model_family(*opts.model);
    if (opts.horizon) cfg.bandit.horizon = *opts.horizon;
    if (opts.beta) cfg.bandit.beta_mode = parse_beta_mode(*opts.beta);
    if (opts.qme_mode) cfg.qme.mode = parse_qme_mode(*opts.qme_mode);
    if (opts.qlinucb) cfg = qlinucb_preset(std::move(cfg));
    cfg.model.input_dim = task.input_dim();
    cfg.qme.c1 = cfg.bandit.c1;
    return cfg;
}

int run_experiment(const ExperimentOptions& opts, std::ostream& out, std::ostream& err) {
    std::uint64_t seed = opts.seed;
    if (const char* env = std::getenv("QNLB_SEED")) {
        const std::string_view s(env);
        std::uint64_t v = 0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size()) {
            err << "QNLB_SEED must be a non-negative integer\n";
            return 2;
        }
        seed = v;
    }
    if (opts.repeats < 1) {
        err << "--repeats must be at least 1\n";
        return 2;
    }

    std::optional<Task> task;
    std::vector<RunConfig> configs;
    try {
        task.emplace(make_task(opts.task));
        for (std::size_t i = 0; i < opts.repeats; ++i) {
            configs.push_back(make_run_config(opts, *task, seed + i));
            configs.back().model.validate();
            configs.back().bandit.validate();
        }
        std::filesystem::create_directories(opts.out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }

    bool ok = true;
    std::vector<std::vector<TraceRow>> traces;
    std::uint64_t total_quantum = 0;
    std::uint64_t total_classical = 0;
    for (std::size_t i = 0; i < opts.repeats; ++i) {
        const auto& cfg = configs[i];
        QueryLedger ledger;
        RunRecord record;
        try {
            record = run(*task, cfg, ledger);
        } catch (const std::exception& e) {
            err << fmt::format("run {} failed: {}\n", i, e.what());
            ok = false;
            traces.emplace_back();
            continue;
        }
        for (const auto& v : check_run(*task, cfg, record)) {
            err << fmt::format("run {} invariant violated: {}\n", i, v);
            ok = false;
        }
        const auto path = opts.out / fmt::format("trace_{}.csv", i);
        std::ofstream file(path);
        write_trace_csv(file, record.rows, task->input_dim());
        if (!file) {
            err << fmt::format("cannot write {}\n", path.string());
            ok = false;
        }
        std::size_t floored = 0;
        for (const auto& st : record.stages) floored += st.eps_floored ? 1 : 0;
        out << fmt::format("run {}: R_T = {:.4f}, stages = {}/{}, quantum = {}, classical = {}, {:.2f} s{}\n", i,
                           record.final_regret(), record.stages.size(), record.max_stages, ledger.quantum_queries(),
                           ledger.classical_queries(), record.wall_time,
                           floored > 0 ? fmt::format(" ({} stages hit the eps floor)", floored) : "");
        total_quantum += ledger.quantum_queries();
        total_classical += ledger.classical_queries();
        traces.push_back(std::move(record.rows));
    }

    const auto stats = aggregate_repeats(traces);
    {
        std::ofstream file(opts.out / "aggregate.csv");
        write_aggregate_csv(file, stats);
    }
    if (stats.any_padded()) {
        out << "note: traces differ in length; shorter ones were padded with their final value\n";
    }
    if (!stats.rows.empty()) {
        const auto& last = stats.rows.back();
        out << fmt::format("final R_T = {:.4f} +- {:.4f} over {} repeats\n", last.mean_cum_regret,
                           last.stderr_cum_regret, opts.repeats);
    }
    out << fmt::format("total quantum queries = {}, classical queries = {}\n", total_quantum, total_classical);
    return ok ? 0 : 1;
}

}  // namespace qnlb
