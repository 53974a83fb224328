#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "qnlb/harness.hpp"

namespace qnlb {
namespace {

struct Check {
    std::string name;
    std::function<bool(std::string&)> body;
};

Vector gaussian(Eigen::Index n, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector v(n);
    for (auto& e : v) e = normal(rng);
    return v;
}

bool determinant_doubling(std::string& detail) {
    std::mt19937_64 rng(11);
    auto state = CovarianceState::init(10, 3.0);
    for (std::size_t k = 1; k <= 30; ++k) {
        const Vector g = gaussian(10, rng);
        state.update(g, compute_eps(state, g));
        const double expect = static_cast<double>(k) * std::log(2.0) + 10.0 * std::log(3.0);
        if (std::abs(state.logdet() - expect) > 1e-6 * static_cast<double>(k + 10)) {
            detail = fmt::format("update {}: logdet {} vs {}", k, state.logdet(), expect);
            return false;
        }
    }
    return true;
}

bool inverse_fidelity(std::string& detail) {
    std::mt19937_64 rng(12);
    auto state = CovarianceState::init(8, 1.0);
    for (int k = 0; k < 50; ++k) {
        const Vector g = gaussian(8, rng);
        state.update(g, compute_eps(state, g));
    }
    detail = fmt::format("max |Sigma Sigma^-1 - I| = {:.3g}", state.inverse_residual());
    return state.inverse_residual() <= 1e-8;
}

bool wls_stationarity(std::string& detail) {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Index d = 6;
        const double lambda = 2.0;
        auto state = CovarianceState::init(d, lambda);
        const ParamVector w0 = gaussian(d, rng);
        std::vector<StageRecord> hist;
        for (int s = 0; s < 5; ++s) {
            StageRecord r;
            r.g = gaussian(d, rng);
            r.eps = std::max(compute_eps(state, r.g), 1e-6);
            r.f_w0 = gaussian(1, rng)[0];
            r.y = gaussian(1, rng)[0];
            state.update(r.g, r.eps);
            hist.push_back(r);
        }
        const ParamVector w = solve_wls(hist, w0, lambda, state);
        Vector grad = lambda * (w - w0);
        for (const auto& r : hist) grad += ((w - w0).dot(r.g) + r.f_w0 - r.y) / (r.eps * r.eps) * r.g;
        if (grad.norm() > 1e-6 * (1.0 + w.norm())) {
            detail = fmt::format("trial {}: gradient norm {}", trial, grad.norm());
            return false;
        }
    }
    return true;
}

bool gradient_check(std::string& detail) {
    std::mt19937_64 rng(14);
    for (const auto family : {ModelFamily::linear, ModelFamily::quadratic, ModelFamily::mlp}) {
        const ModelSpec spec{family, 3, 5};
        for (int t = 0; t < 10; ++t) {
            const ParamVector w = gaussian(static_cast<Eigen::Index>(spec.param_dim()), rng);
            const Vector x = gaussian(3, rng);
            const Vector g = grad(spec, w, x);
            Vector fd(w.size());
            for (Eigen::Index j = 0; j < w.size(); ++j) {
                ParamVector wp = w;
                ParamVector wm = w;
                wp[j] += 1e-5;
                wm[j] -= 1e-5;
                fd[j] = (eval(spec, wp, x) - eval(spec, wm, x)) / 2e-5;
            }
            const double rel = (g - fd).norm() / std::max({g.norm(), fd.norm(), 1e-8});
            if (rel > 1e-4) {
                detail = fmt::format("{} relative error {}", to_string(family), rel);
                return false;
            }
        }
    }
    return true;
}

bool qme_contract(std::string& detail) {
    const Task task = Task::rastrigin();
    QuantumMeanEstimator qme(QmeConfig{1.0, QmeMode::deterministic_bounded, 15});
    QueryLedger ledger;
    std::mt19937_64 rng(15);
    std::uniform_real_distribution<double> eps_dist(1e-3, 1.0);
    for (int i = 0; i < 10000; ++i) {
        const Vector x = sample_uniform(task.domain(), rng);
        const double eps = eps_dist(rng);
        const auto before = ledger.quantum_queries();
        const double y = qme.estimate_bounded(task, x, eps, 0.01, ledger);
        if (!(std::abs(y - task.eval_true(x)) <= eps) ||
            ledger.quantum_queries() - before != qme_query_cost(eps, 0.01, 1.0)) {
            detail = fmt::format("call {} broke the contract", i);
            return false;
        }
    }
    return true;
}

bool short_run(std::string& detail) {
    const Task task = Task::rastrigin();
    RunConfig cfg;
    cfg.model = ModelSpec{ModelFamily::quadratic, 3, 25};
    cfg.bandit.horizon = 60;
    cfg.bandit.ascent_iters = 100;
    cfg.regression.sgd_iters = 200;
    cfg.regression.learning_rate = 1e-4;
    QueryLedger ledger;
    const auto record = run(task, cfg, ledger);
    const auto bad = check_run(task, cfg, record);
    if (!bad.empty()) {
        detail = bad.front();
        return false;
    }
    if (record.rows.size() != 60) {
        detail = fmt::format("{} rounds recorded", record.rows.size());
        return false;
    }
    return true;
}

}  // namespace

int run_invariant_suite(std::ostream& out) {
    const std::vector<Check> checks{
        {"determinant doubling", determinant_doubling}, {"inverse fidelity", inverse_fidelity},
        {"wls stationarity", wls_stationarity},         {"gradient check", gradient_check},
        {"qme contract", qme_contract},                 {"run invariants", short_run},
    };
    int failures = 0;
    for (const auto& c : checks) {
        std::string detail;
        bool ok = false;
        try {
            ok = c.body(detail);
        } catch (const std::exception& e) {
            detail = e.what();
        }
        failures += ok ? 0 : 1;
        out << fmt::format("[{}] {}{}\n", ok ? "PASS" : "FAIL", c.name, detail.empty() ? "" : " (" + detail + ")");
    }
    return failures == 0 ? 0 : 1;
}

}  // namespace qnlb
