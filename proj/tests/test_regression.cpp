#include <doctest.h>

#include <cmath>
#include <random>

#include "qnlb/regression.hpp"

using namespace qnlb;

namespace {

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double e : v) out[i++] = e;
    return out;
}

}  // namespace

TEST_CASE("empirical risk") {
    const ModelSpec spec{ModelFamily::linear, 1};
    const std::vector<Sample> samples{{vec({1.0}), 1.0}, {vec({2.0}), 2.0}};
    CHECK(empirical_risk(samples, spec, vec({1.0})) == 0.0);
    CHECK(empirical_risk(samples, spec, vec({0.0})) == doctest::Approx(2.5));
}

TEST_CASE("sgd recovers a noiseless linear fit") {
    const ModelSpec spec{ModelFamily::linear, 1};
    const std::vector<Sample> samples{{vec({1.0}), 2.0}, {vec({2.0}), 4.0}, {vec({-1.0}), -2.0}};
    RegressionConfig cfg;
    cfg.sgd_iters = 2000;
    cfg.learning_rate = 1e-2;
    const auto fit = sgd_erm(samples, spec, cfg);
    CHECK(fit.w[0] == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(fit.risk < 1e-10);
}

TEST_CASE("sgd matches the least-squares oracle on a noisy quadratic") {
    std::mt19937_64 rng(6);
    std::normal_distribution<double> noise(0.0, 0.1);
    const ModelSpec spec{ModelFamily::quadratic, 2};
    const ParamVector truth = vec({0.5, -1.0, 0.25, 0.8, -0.3});
    std::vector<Sample> samples;
    for (int i = 0; i < 40; ++i) {
        const Vector x = sample_uniform(BoxDomain::cube(2, -1, 1), rng);
        samples.push_back({x, eval(spec, truth, x) + noise(rng)});
    }
    // the model is linear in w, so the minimizer solves the normal equations
    Matrix phi(40, 5);
    Vector y(40);
    for (int i = 0; i < 40; ++i) {
        phi.row(i) = grad(spec, ParamVector::Zero(5), samples[static_cast<std::size_t>(i)].x).transpose();
        y[i] = samples[static_cast<std::size_t>(i)].y;
    }
    const Vector ls = (phi.transpose() * phi).ldlt().solve(phi.transpose() * y);

    RegressionConfig cfg;
    cfg.sgd_iters = 5000;
    cfg.learning_rate = 5e-3;
    const auto fit = sgd_erm(samples, spec, cfg);
    CHECK(fit.risk <= empirical_risk(samples, spec, ls) * 1.02);
    CHECK((fit.w - ls).norm() <= 0.05);
}

TEST_CASE("the returned iterate never has higher risk than the start") {
    std::mt19937_64 rng(10);
    const ModelSpec spec{ModelFamily::mlp, 3, 8};
    std::vector<Sample> samples;
    for (int i = 0; i < 18; ++i) {
        const Vector x = sample_uniform(BoxDomain::cube(3, -5.12, 5.12), rng);
        samples.push_back({x, rastrigin(x)});
    }
    RegressionConfig cfg;
    cfg.sgd_iters = 50;
    cfg.learning_rate = 1e-6;
    const auto fit = sgd_erm(samples, spec, cfg);
    CHECK(fit.risk <= fit.init_risk);
    CHECK(fit.risk == empirical_risk(samples, spec, fit.w));
}

TEST_CASE("divergent learning rate is reported") {
    const ModelSpec spec{ModelFamily::linear, 1};
    const std::vector<Sample> samples{{vec({100.0}), 1.0}, {vec({-100.0}), 2.0}};
    RegressionConfig cfg;
    cfg.learning_rate = 10.0;
    cfg.sgd_iters = 200;
    CHECK_THROWS_AS(sgd_erm(samples, spec, cfg), RegressionError);
}

TEST_CASE("bad inputs") {
    const ModelSpec spec{ModelFamily::linear, 1};
    CHECK_THROWS_AS(sgd_erm(std::vector<Sample>{}, spec, RegressionConfig{}), RegressionError);
    RegressionConfig cfg;
    cfg.init = vec({1.0, 2.0});
    CHECK_THROWS_AS(sgd_erm(std::vector<Sample>{{vec({1.0}), 1.0}}, spec, cfg), DimensionError);
}

TEST_CASE("regression charge") {
    CHECK(regression_quantum_cost(100) == 47);
    CHECK(regression_quantum_cost(1) == 1);  // ln(max(1, 2))
    CHECK(regression_quantum_cost(18) == static_cast<std::uint64_t>(std::ceil(std::sqrt(18.0) * std::log(18.0))));
}

TEST_CASE("oracle charges both ledgers and is seed deterministic") {
    const Task task = Task::rastrigin();
    const ModelSpec spec{ModelFamily::quadratic, 3};
    RegressionConfig cfg;
    cfg.t0 = 18;
    cfg.sgd_iters = 100;
    cfg.learning_rate = 1e-4;
    cfg.seed = 21;
    QueryLedger a;
    QueryLedger b;
    const ParamVector w1 = quantum_regression_oracle(task, spec, cfg, NoiseModel{}, a);
    const ParamVector w2 = quantum_regression_oracle(task, spec, cfg, NoiseModel{}, b);
    CHECK(w1 == w2);
    CHECK(a.classical_queries() == 18);
    CHECK(a.quantum_queries() == regression_quantum_cost(18));

    QueryLedger c;
    CHECK_THROWS_AS(quantum_regression_oracle(task, ModelSpec{ModelFamily::linear, 2}, cfg, NoiseModel{}, c),
                    DimensionError);
}
