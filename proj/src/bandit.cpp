#include "qnlb/bandit.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace qnlb {

std::string_view to_string(BetaMode mode) { return mode == BetaMode::practical ? "practical" : "theoretical"; }

BetaMode parse_beta_mode(std::string_view name) {
    if (name == "practical") return BetaMode::practical;
    if (name == "theoretical") return BetaMode::theoretical;
    throw std::invalid_argument(fmt::format("unknown beta mode '{}'", name));
}

double ball_radius(const BetaSchedule& schedule, std::size_t s) {
    if (s < 1) {
        throw std::invalid_argument("stage index must be at least 1");
    }
    const double sd = static_cast<double>(s);
    if (schedule.mode == BetaMode::practical) {
        return schedule.c * std::log(sd + 1.0);
    }
    const double d_w = static_cast<double>(schedule.d_w);
    const double t0_2 = schedule.t0 * schedule.t0;
    const double c0_2 = schedule.c0 * schedule.c0;
    return 3.0 * d_w * sd + 3.0 * schedule.lambda * c0_2 / t0_2 +
           3.0 * schedule.c_h * schedule.c_h * c0_2 * sd * schedule.horizon * schedule.horizon / (4.0 * t0_2 * t0_2);
}

double ConfidenceBall::distance_sq(const ParamVector& w) const {
    const Vector diff = w - center;
    return diff.dot((*sigma) * diff);
}

bool ConfidenceBall::contains(const ParamVector& w, double slack) const {
    return distance_sq(w) <= radius + slack * std::max(1.0, radius);
}

ParamVector project_to_ball(const ParamVector& w, const ConfidenceBall& ball) {
    if (!(ball.radius >= 0.0)) {
        throw std::invalid_argument("ball radius must be non-negative");
    }
    const Vector diff = w - ball.center;
    const double d2 = diff.dot((*ball.sigma) * diff);
    if (d2 <= ball.radius) {
        return w;
    }
    if (ball.radius == 0.0 || !std::isfinite(d2)) {
        return ball.center;
    }
    double scale = std::sqrt(ball.radius / d2);
    ParamVector out = ball.center + scale * diff;
    while (ball.distance_sq(out) > ball.radius) {
        scale *= 1.0 - 1e-13;
        out = ball.center + scale * diff;
    }
    return out;
}

double BanditConfig::resolved_lambda() const { return lambda.value_or(static_cast<double>(horizon)); }

std::size_t BanditConfig::resolved_t0() const {
    if (t0) return *t0;
    return static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(horizon))));
}

void BanditConfig::validate() const {
    if (horizon < 1) throw std::invalid_argument("horizon T must be at least 1");
    if (!(resolved_lambda() > 0.0)) throw std::invalid_argument("lambda must be positive");
    if (resolved_t0() < 1) throw std::invalid_argument("t0 must be at least 1");
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
    if (!(c1 > 0.0)) throw std::invalid_argument("C1 must be positive");
    if (restarts < 1) throw std::invalid_argument("action selection needs at least one restart");
    if (!(eps_min > 0.0)) throw std::invalid_argument("eps_min must be positive");
    if (!(lr_x >= 0.0) || !(lr_w >= 0.0)) throw std::invalid_argument("ascent step sizes must be non-negative");
}

RunConfig qlinucb_preset(RunConfig cfg) {
    cfg.model.family = ModelFamily::linear;
    cfg.bandit.skip_regression = true;
    return cfg;
}

BetaSchedule make_beta_schedule(const RunConfig& cfg) {
    BetaSchedule b;
    b.mode = cfg.bandit.beta_mode;
    b.c = cfg.bandit.beta_c;
    b.d_w = cfg.model.param_dim();
    b.lambda = cfg.bandit.resolved_lambda();
    b.horizon = static_cast<double>(cfg.bandit.horizon);
    b.t0 = static_cast<double>(cfg.bandit.resolved_t0());
    b.c0 = cfg.bandit.beta_c0;
    b.c_h = cfg.bounds.c_h;
    return b;
}

ParamVector solve_wls(std::span<const StageRecord> history, const ParamVector& w0_hat, double lambda,
                      const CovarianceState& state) {
    if (state.update_count() != history.size()) {
        throw BanditError(fmt::format("covariance holds {} updates but history has {} stages",
                                      state.update_count(), history.size()));
    }
    if (static_cast<std::size_t>(w0_hat.size()) != state.dim()) {
        throw DimensionError("w0_hat dimension does not match covariance");
    }
    Vector rhs = lambda * w0_hat;
    for (const auto& rec : history) {
        const double weight = 1.0 / (rec.eps * rec.eps);
        rhs += weight * (w0_hat.dot(rec.g) + rec.y - rec.f_w0) * rec.g;
    }
    ParamVector w = state.sigma_inv() * rhs;
    // one step of iterative refinement against Sigma itself
    w += state.sigma_inv() * (rhs - state.sigma() * w);
    return w;
}

ActionChoice select_action(const ModelSpec& spec, const ConfidenceBall& ball, const BoxDomain& domain,
                           const BanditConfig& cfg, std::mt19937_64& rng) {
    if (domain.dim() != spec.input_dim) {
        throw DimensionError("action domain does not match model input dimension");
    }
    const auto d = static_cast<Eigen::Index>(domain.dim());
    const Vector h = 1e-6 * (domain.hi - domain.lo);

    ActionChoice best;
    best.value = -std::numeric_limits<double>::infinity();
    bool any = false;
    Vector gx(d);
    Vector gw;
    for (std::size_t r = 0; r < cfg.restarts; ++r) {
        Vector x = sample_uniform(domain, rng);
        ParamVector w = ball.center;
        ActionChoice local{x, w, eval(spec, w, x)};
        bool failed = !std::isfinite(local.value);
        for (std::size_t it = 0; it < cfg.ascent_iters && !failed; ++it) {
            for (Eigen::Index i = 0; i < d; ++i) {
                Vector xp = x;
                Vector xm = x;
                xp[i] += h[i];
                xm[i] -= h[i];
                gx[i] = (eval(spec, w, xp) - eval(spec, w, xm)) / (2.0 * h[i]);
            }
            x = domain.clip(x + cfg.lr_x * gx);
            eval_grad(spec, w, x, gw);
            w = project_to_ball(w + cfg.lr_w * gw, ball);
            const double v = eval(spec, w, x);
            if (!std::isfinite(v) || !x.allFinite() || !w.allFinite()) {
                failed = true;
            } else if (v > local.value) {
                local = ActionChoice{x, w, v};
            }
        }
        if (failed) continue;
        if (!any || local.value > best.value) {
            best = std::move(local);
            any = true;
        }
    }
    if (!any) {
        throw BanditError("action selection failed: every ascent restart produced non-finite values");
    }
    return best;
}

std::size_t stage_length(double eps, std::size_t m, double delta, double c1) {
    if (!(eps > 0.0)) throw std::invalid_argument("stage length needs eps > 0");
    if (m < 1) throw std::invalid_argument("stage count m must be at least 1");
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
    const double n = (c1 / eps) * std::log(static_cast<double>(m) / delta);
    if (!(n < 1e18)) return std::numeric_limits<std::size_t>::max() / 2;
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(n)));
}

std::size_t max_stages(std::size_t d_w, double c_g, double horizon, double lambda) {
    const double d = static_cast<double>(d_w);
    return static_cast<std::size_t>(std::ceil(d * std::log(c_g * c_g * horizon * horizon / (d * lambda) + 1.0)));
}

RunRecord run(const Task& task, const RunConfig& cfg, QueryLedger& ledger, const StageObserver& observer) {
    const auto started = std::chrono::steady_clock::now();
    const auto& spec = cfg.model;
    const auto& bc = cfg.bandit;
    spec.validate();
    bc.validate();
    cfg.bounds.validate();
    if (task.input_dim() != spec.input_dim) {
        throw DimensionError(fmt::format("task has input dimension {}, model expects {}", task.input_dim(),
                                         spec.input_dim));
    }

    const std::size_t d_w = spec.param_dim();
    const std::size_t horizon = bc.horizon;
    const double lambda = bc.resolved_lambda();

    RunRecord record;
    ParamVector w0;
    if (bc.skip_regression) {
        w0 = init_params(spec, cfg.regression.seed);
    } else {
        RegressionConfig rc = cfg.regression;
        rc.t0 = bc.resolved_t0();
        w0 = quantum_regression_oracle(task, spec, rc, cfg.noise, ledger);
    }
    if (cfg.clamp_params) w0 = clamp_to_unit_box(w0);
    record.w0_hat = w0;

    const std::size_t m = max_stages(d_w, cfg.bounds.c_g, static_cast<double>(horizon), lambda);
    record.max_stages = m;
    const BetaSchedule beta = make_beta_schedule(cfg);
    const double f_star = task.optimum().f_star;
    const auto* tabular = std::get_if<TabularTask>(&task.variant());

    QmeConfig qcfg = cfg.qme;
    qcfg.c1 = bc.c1;
    QuantumMeanEstimator qme(qcfg);
    std::mt19937_64 rng(bc.seed);
    CovarianceState state = CovarianceState::init(d_w, lambda);

    std::size_t rounds = 0;
    double cum = 0.0;
    Vector g;
    for (std::size_t s = 1; s <= m && rounds < horizon; ++s) {
        if (s >= 2) {
            const auto& prev = record.stages.back();
            state.update(prev.g, prev.eps);
        }
        ParamVector center = solve_wls(record.stages, w0, lambda, state);
        if (cfg.clamp_params) center = clamp_to_unit_box(center);
        const ConfidenceBall ball{std::move(center), ball_radius(beta, s), &state.sigma()};
        if (observer) observer(StageSnapshot{s, ball, state, w0});

        ActionChoice choice = select_action(spec, ball, task.domain(), bc, rng);
        Vector x = tabular != nullptr ? snap_to_grid(*tabular, choice.x) : std::move(choice.x);

        StageRecord rec;
        rec.s = s;
        rec.f_w0 = eval_grad(spec, w0, x, g);
        rec.g = g;
        const double eps = compute_eps(state, g);
        rec.eps_floored = !(eps >= bc.eps_min);
        rec.eps = rec.eps_floored ? bc.eps_min : eps;
        rec.rounds = stage_length(rec.eps, m, bc.delta, bc.c1);
        if (rounds + rec.rounds > horizon) {
            rec.rounds = horizon - rounds;
            rec.truncated = true;
        }
        rec.y = qme.estimate_bounded(task, x, rec.eps, bc.delta / static_cast<double>(m), ledger);
        ledger.consume_rounds(rec.rounds);

        const double regret = f_star - task.eval_true(x);
        for (std::size_t k = 0; k < rec.rounds; ++k) {
            cum += regret;
            ++rounds;
            record.rows.push_back(TraceRow{rounds, s, x, rec.y, regret, cum, ledger.quantum_queries(),
                                           ledger.classical_queries()});
        }
        rec.x = std::move(x);
        record.stages.push_back(std::move(rec));
    }

    if (!record.rows.empty()) {
        std::uniform_int_distribution<std::size_t> pick(0, record.rows.size() - 1);
        record.recommendation = record.rows[pick(rng)].x;
        const auto best = std::max_element(record.stages.begin(), record.stages.end(),
                                           [](const auto& a, const auto& b) { return a.y < b.y; });
        record.best_observed = best->x;
    }
    record.covariance_rebuilds = state.rebuild_count();
    record.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return record;
}

}  // namespace qnlb
