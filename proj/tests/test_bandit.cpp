#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "qnlb/bandit.hpp"
#include "qnlb/harness.hpp"

using namespace qnlb;

namespace {

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double e : v) out[i++] = e;
    return out;
}

Vector gaussian(Eigen::Index n, std::mt19937_64& rng) {
    std::normal_distribution<double> nd(0.0, 1.0);
    Vector v(n);
    for (auto& e : v) e = nd(rng);
    return v;
}

RunConfig quick_config(ModelFamily family, std::size_t horizon) {
    RunConfig cfg;
    cfg.model = ModelSpec{family, 3, 25};
    cfg.bandit.horizon = horizon;
    cfg.bandit.ascent_iters = 50;
    cfg.bandit.restarts = 2;
    cfg.regression.sgd_iters = 100;
    cfg.regression.learning_rate = 1e-4;
    return cfg;
}

}  // namespace

TEST_CASE("beta schedules") {
    BetaSchedule b;
    CHECK(ball_radius(b, 1) == doctest::Approx(std::log(2.0)));
    b.c = 2.0;
    CHECK(ball_radius(b, 3) == doctest::Approx(2.0 * std::log(4.0)));

    BetaSchedule t;
    t.mode = BetaMode::theoretical;
    t.d_w = 3;
    t.lambda = 300.0;
    t.horizon = 300.0;
    t.t0 = 18.0;
    t.c0 = 1.0;
    t.c_h = 0.0;
    CHECK(ball_radius(t, 2) == doctest::Approx(18.0 + 900.0 / 324.0));
    t.c_h = 1.0;
    CHECK(ball_radius(t, 2) == doctest::Approx(18.0 + 900.0 / 324.0 + 6.0 * 90000.0 / (4.0 * 18.0 * 18.0 * 18.0 * 18.0)));
    CHECK_THROWS(ball_radius(t, 0));
    CHECK(parse_beta_mode("theoretical") == BetaMode::theoretical);
    CHECK_THROWS(parse_beta_mode("optimistic"));
}

TEST_CASE("stage counts") {
    CHECK(stage_length(0.5, 10, 0.01, 1.0) == 14);
    CHECK(stage_length(100.0, 1, 0.5, 1.0) == 1);
    CHECK(max_stages(3, 18.0, 300.0, 300.0) == 32);
    const double d = 126.0;
    CHECK(max_stages(126, 18.0, 300.0, 300.0) ==
          static_cast<std::size_t>(std::ceil(d * std::log(324.0 * 90000.0 / (d * 300.0) + 1.0))));
    CHECK_THROWS(stage_length(0.0, 10, 0.01, 1.0));
}

TEST_CASE("projection onto the ellipsoid") {
    const Matrix eye = Matrix::Identity(2, 2);
    const ConfidenceBall unit{vec({0, 0}), 1.0, &eye};
    CHECK(project_to_ball(vec({0.3, 0.4}), unit) == vec({0.3, 0.4}));
    const ParamVector p = project_to_ball(vec({3, 4}), unit);
    CHECK(p[0] == doctest::Approx(0.6));
    CHECK(p[1] == doctest::Approx(0.8));
    CHECK(unit.contains(p, 0.0));

    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 200; ++trial) {
        const Matrix a = Matrix::Random(4, 4);
        const Matrix sigma = a * a.transpose() + 0.1 * Matrix::Identity(4, 4);
        const ConfidenceBall ball{gaussian(4, rng), 0.5, &sigma};
        const ParamVector w = ball.center + 10.0 * gaussian(4, rng);
        const ParamVector q = project_to_ball(w, ball);
        CHECK(ball.contains(q, 0.0));
        CHECK(ball.distance_sq(q) >= 0.5 * (1.0 - 1e-9));
    }

    const ConfidenceBall point{vec({1, 2}), 0.0, &eye};
    CHECK(project_to_ball(vec({5, 5}), point) == vec({1, 2}));
}

TEST_CASE("solve_wls agrees with a dense normal-equation solve") {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 30; ++trial) {
        const Eigen::Index d = 2 + trial % 10;
        const double lambda = 0.5 + trial;
        auto state = CovarianceState::init(static_cast<std::size_t>(d), lambda);
        const ParamVector w0 = gaussian(d, rng);
        std::vector<StageRecord> hist;
        Matrix a = lambda * Matrix::Identity(d, d);
        Vector b = lambda * w0;
        for (int s = 0; s < 1 + trial % 12; ++s) {
            StageRecord r;
            r.g = gaussian(d, rng);
            r.eps = std::max(compute_eps(state, r.g), 1e-6);
            r.f_w0 = gaussian(1, rng)[0];
            r.y = gaussian(1, rng)[0];
            state.update(r.g, r.eps);
            const double wgt = 1.0 / (r.eps * r.eps);
            a += wgt * r.g * r.g.transpose();
            b += wgt * (w0.dot(r.g) + r.y - r.f_w0) * r.g;
            hist.push_back(r);
        }
        const Vector ref = a.ldlt().solve(b);
        const ParamVector w = solve_wls(hist, w0, lambda, state);
        CHECK((w - ref).norm() <= 1e-8 * (1.0 + ref.norm()));
    }
}

TEST_CASE("solve_wls with no history returns the anchor") {
    const auto state = CovarianceState::init(3, 5.0);
    const ParamVector w0 = vec({1, -2, 3});
    const ParamVector w = solve_wls(std::vector<StageRecord>{}, w0, 5.0, state);
    CHECK((w - w0).norm() <= 1e-14);

    std::vector<StageRecord> one(1);
    one[0].g = vec({1, 0, 0});
    one[0].eps = 1.0;
    CHECK_THROWS_AS(solve_wls(one, w0, 5.0, state), BanditError);
}

TEST_CASE("select_action finds the optimistic corner of a linear model") {
    const ModelSpec spec{ModelFamily::linear, 2};
    const Matrix eye = Matrix::Identity(2, 2);
    const ConfidenceBall ball{vec({0, 0}), 1.0, &eye};
    const BoxDomain box = BoxDomain::cube(2, -1, 1);
    BanditConfig cfg;
    cfg.ascent_iters = 500;
    cfg.lr_x = 0.05;
    cfg.lr_w = 0.05;
    std::mt19937_64 rng(43);
    const auto choice = select_action(spec, ball, box, cfg, rng);

    // brute force: max over x of sqrt(radius) * ||x|| on a grid
    double oracle = 0.0;
    for (int i = 0; i <= 200; ++i) {
        for (int j = 0; j <= 200; ++j) {
            const Vector x = vec({-1.0 + i / 100.0, -1.0 + j / 100.0});
            oracle = std::max(oracle, x.norm());
        }
    }
    CHECK(oracle == doctest::Approx(std::sqrt(2.0)));
    CHECK(choice.value >= oracle - 0.05);
    CHECK(choice.value <= oracle + 1e-9);
    CHECK(box.contains(choice.x, 0.0));
    CHECK(ball.contains(choice.w));
    CHECK(choice.value == doctest::Approx(eval(spec, choice.w, choice.x)));
}

TEST_CASE("select_action rejects a mismatched domain") {
    const ModelSpec spec{ModelFamily::linear, 2};
    const Matrix eye = Matrix::Identity(2, 2);
    const ConfidenceBall ball{vec({0, 0}), 1.0, &eye};
    std::mt19937_64 rng(1);
    CHECK_THROWS_AS(select_action(spec, ball, BoxDomain::cube(3, -1, 1), BanditConfig{}, rng), DimensionError);
}

TEST_CASE("short run satisfies the run invariants") {
    const Task task = Task::rastrigin();
    const RunConfig cfg = quick_config(ModelFamily::quadratic, 80);
    QueryLedger ledger;
    std::size_t observed = 0;
    const auto record = run(task, cfg, ledger, [&](const StageSnapshot& snap) {
        ++observed;
        CHECK(snap.s == observed);
        CHECK(snap.state.update_count() == snap.s - 1);
    });
    CHECK(record.rows.size() == 80);
    CHECK(observed == record.stages.size());
    CHECK(check_run(task, cfg, record).empty());
    CHECK(ledger.rounds_consumed() == 80);
    CHECK(ledger.classical_queries() == 9);  // t0 = ceil(sqrt(80))

    double cum = 0.0;
    for (std::size_t i = 0; i < record.rows.size(); ++i) {
        const auto& row = record.rows[i];
        CHECK(row.round == i + 1);
        CHECK(row.inst_regret >= 0.0);
        cum += row.inst_regret;
        CHECK(row.cum_regret == cum);
    }
    std::size_t total = 0;
    for (const auto& st : record.stages) total += st.rounds;
    CHECK(total == 80);
}

TEST_CASE("runs are reproducible from the seed") {
    const Task task = Task::styblinski_tang();
    RunConfig cfg = quick_config(ModelFamily::quadratic, 40);
    cfg.bandit.lr_x = cfg.bandit.lr_w = 1e-5;
    QueryLedger a;
    QueryLedger b;
    const auto r1 = run(task, cfg, a);
    const auto r2 = run(task, cfg, b);
    CHECK(r1.rows == r2.rows);
    cfg.bandit.seed = 99;
    QueryLedger c;
    const auto r3 = run(task, cfg, c);
    CHECK_FALSE(r1.rows == r3.rows);
}

TEST_CASE("horizon of one round") {
    const Task task = Task::rastrigin();
    QueryLedger ledger;
    const RunConfig cfg = quick_config(ModelFamily::linear, 1);
    const auto record = run(task, cfg, ledger);
    CHECK(record.rows.size() == 1);
    CHECK(record.stages.size() == 1);
    CHECK(record.stages[0].rounds == 1);
}

TEST_CASE("tabular runs only play grid rows") {
    const Task task(load_tabular(std::filesystem::path(QNLB_TEST_DATA) / "grid16.csv"));
    RunConfig cfg = quick_config(ModelFamily::mlp, 30);
    cfg.model = ModelSpec{ModelFamily::mlp, 4, 5};
    QueryLedger ledger;
    const auto record = run(task, cfg, ledger);
    const auto& tab = std::get<TabularTask>(task.variant());
    for (const auto& row : record.rows) {
        const auto idx = tab.nearest_row(row.x);
        CHECK(row.x == tab.grid.row(static_cast<Eigen::Index>(idx)).transpose());
    }
    CHECK(check_run(task, cfg, record).empty());
}

TEST_CASE("qlinucb preset skips regression") {
    const Task task = Task::rastrigin();
    const RunConfig cfg = qlinucb_preset(quick_config(ModelFamily::mlp, 30));
    CHECK(cfg.model.family == ModelFamily::linear);
    QueryLedger ledger;
    const auto record = run(task, cfg, ledger);
    CHECK(ledger.classical_queries() == 0);
    CHECK(record.w0_hat.isZero());
    CHECK(record.rows.size() == 30);
}

TEST_CASE("configuration errors") {
    const Task task = Task::rastrigin();
    QueryLedger ledger;
    RunConfig cfg = quick_config(ModelFamily::linear, 10);
    cfg.model.input_dim = 2;
    CHECK_THROWS_AS(run(task, cfg, ledger), DimensionError);

    BanditConfig bc;
    bc.delta = 1.5;
    CHECK_THROWS(bc.validate());
    bc = BanditConfig{};
    bc.lambda = 0.0;
    CHECK_THROWS(bc.validate());
    bc = BanditConfig{};
    bc.horizon = 0;
    CHECK_THROWS(bc.validate());
    CHECK(BanditConfig{}.resolved_t0() == 18);
    CHECK(BanditConfig{}.resolved_lambda() == 300.0);
}
