#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "qnlb/models.hpp"

namespace qnlb {

struct StageRecord {
    std::size_t s = 0;
    Vector x;
    Vector g;           // gradient of f_x at w0_hat
    double f_w0 = 0.0;  // f_x(w0_hat)
    double eps = 0.0;
    double y = 0.0;
    std::size_t rounds = 0;
    bool eps_floored = false;
    bool truncated = false;
};

struct TraceRow {
    std::size_t round = 0;
    std::size_t stage = 0;
    Vector x;
    double y = 0.0;
    double inst_regret = 0.0;
    double cum_regret = 0.0;
    std::uint64_t quantum_queries = 0;
    std::uint64_t classical_queries = 0;

    friend bool operator==(const TraceRow& a, const TraceRow& b) {
        return a.round == b.round && a.stage == b.stage && a.x.size() == b.x.size() &&
               a.x == b.x && a.y == b.y && a.inst_regret == b.inst_regret &&
               a.cum_regret == b.cum_regret && a.quantum_queries == b.quantum_queries &&
               a.classical_queries == b.classical_queries;
    }
};

struct RunRecord {
    std::vector<TraceRow> rows;
    std::vector<StageRecord> stages;
    Vector recommendation;  // uniform draw over played actions
    Vector best_observed;   // action with the highest observation
    ParamVector w0_hat;
    std::size_t max_stages = 0;
    std::size_t covariance_rebuilds = 0;
    double wall_time = 0.0;  // seconds

    double final_regret() const { return rows.empty() ? 0.0 : rows.back().cum_regret; }
};

}  // namespace qnlb
