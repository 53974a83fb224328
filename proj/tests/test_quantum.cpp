#include <doctest.h>

#include <cmath>
#include <random>

#include "qnlb/quantum.hpp"

using namespace qnlb;

namespace {

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double e : v) out[i++] = e;
    return out;
}

// extended precision reference for the query count
std::uint64_t cost_oracle(double eps, double delta, double c1) {
    const long double v = static_cast<long double>(c1) / eps * std::log(1.0L / delta);
    return static_cast<std::uint64_t>(std::ceil(v));
}

}  // namespace

TEST_CASE("query cost examples") {
    CHECK(qme_query_cost(0.1, 0.01, 1.0) == 47);
    CHECK(qme_query_cost(0.5, 0.01, 1.0) == 10);
    CHECK(qme_query_cost(1.0, std::exp(-3.0), 1.0) == 3);
    CHECK(qme_query_cost(0.5, 0.01, 2.0) == 19);
}

TEST_CASE("query cost matches the extended precision oracle") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> log_eps(std::log(1e-4), 0.0);
    std::uniform_real_distribution<double> delta_dist(1e-6, 0.5);
    for (int i = 0; i < 1000; ++i) {
        const double eps = std::exp(log_eps(rng));
        const double delta = delta_dist(rng);
        CHECK(qme_query_cost(eps, delta, 1.0) == cost_oracle(eps, delta, 1.0));
    }
}

TEST_CASE("query cost is monotone") {
    CHECK(qme_query_cost(0.05, 0.01, 1.0) >= qme_query_cost(0.1, 0.01, 1.0));
    CHECK(qme_query_cost(0.1, 0.001, 1.0) >= qme_query_cost(0.1, 0.01, 1.0));
}

TEST_CASE("invalid precision or failure probability") {
    CHECK_THROWS_AS(qme_query_cost(0.0, 0.01, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(qme_query_cost(-1.0, 0.01, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(qme_query_cost(0.1, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(qme_query_cost(0.1, 1.0, 1.0), std::invalid_argument);

    const Task task = Task::rastrigin();
    QuantumMeanEstimator qme(QmeConfig{});
    QueryLedger ledger;
    CHECK_THROWS_AS(qme.estimate_bounded(task, vec({0, 0, 0}), 0.0, 0.01, ledger), std::invalid_argument);
    CHECK(ledger.quantum_queries() == 0);
}

TEST_CASE("deterministic mode honours the bound and charges the cost") {
    const Task task = Task::rastrigin();
    QuantumMeanEstimator qme(QmeConfig{1.0, QmeMode::deterministic_bounded, 7});
    QueryLedger ledger;
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> eps_dist(1e-6, 2.0);
    std::uint64_t expected = 0;
    for (int i = 0; i < 20000; ++i) {
        const Vector x = sample_uniform(task.domain(), rng);
        const double eps = eps_dist(rng);
        const double y = qme.estimate_bounded(task, x, eps, 0.01, ledger);
        CHECK(std::abs(y - task.eval_true(x)) <= eps);
        expected += cost_oracle(eps, 0.01, 1.0);
    }
    CHECK(ledger.quantum_queries() == expected);
    CHECK(ledger.classical_queries() == 0);
}

TEST_CASE("example call on rastrigin") {
    const Task task = Task::rastrigin();
    QuantumMeanEstimator qme(QmeConfig{});
    QueryLedger ledger;
    const double y = qme.estimate_bounded(task, vec({0, 0, 0}), 0.1, 0.01, ledger);
    CHECK(y >= -170.1);
    CHECK(y <= -169.9);
    CHECK(ledger.quantum_queries() == 47);
}

TEST_CASE("failure injection rate") {
    const Task task = Task::rastrigin();
    QuantumMeanEstimator qme(QmeConfig{1.0, QmeMode::failure_injection, 3});
    QueryLedger ledger;
    const Vector x = vec({0.3, -1.2, 2.0});
    const double truth = task.eval_true(x);
    const int n = 100000;
    int failures = 0;
    for (int i = 0; i < n; ++i) {
        const double y = qme.estimate_bounded(task, x, 0.01, 0.05, ledger);
        const double dev = std::abs(y - truth);
        if (dev > 0.01) {
            ++failures;
            CHECK(dev == doctest::Approx(0.1).epsilon(1e-9));
        }
    }
    const double rate = static_cast<double>(failures) / n;
    CHECK(rate >= 0.04);
    CHECK(rate <= 0.06);
}

TEST_CASE("same seed reproduces the same estimates") {
    const Task task = Task::styblinski_tang();
    QuantumMeanEstimator a(QmeConfig{1.0, QmeMode::failure_injection, 11});
    QuantumMeanEstimator b(QmeConfig{1.0, QmeMode::failure_injection, 11});
    QueryLedger la;
    QueryLedger lb;
    for (int i = 0; i < 50; ++i) {
        const Vector x = vec({0.1 * i - 2.5, 1.0, -1.0});
        CHECK(a.estimate_bounded(task, x, 0.2, 0.1, la) == b.estimate_bounded(task, x, 0.2, 0.1, lb));
    }
}

TEST_CASE("bounded variance estimator") {
    CHECK(qme2_query_cost(0.1, std::exp(-4.0), 1.0, 0.1) == 8);
    CHECK(qme2_query_cost(0.01, 0.01, 1.0, 0.1) > qme2_query_cost(0.1, 0.01, 1.0, 0.1));

    const Task task = Task::rastrigin();
    QuantumMeanEstimator qme(QmeConfig{});
    QueryLedger ledger;
    const Vector x = vec({1, 1, 1});
    const double y = qme.estimate_bounded_variance(task, x, 0.05, 0.01, 1.0, 0.1, ledger);
    CHECK(std::abs(y - task.eval_true(x)) <= 0.05);
    CHECK(ledger.quantum_queries() == qme2_query_cost(0.05, 0.01, 1.0, 0.1));
}

TEST_CASE("classical samples") {
    const Task task = Task::rastrigin();
    const Vector x = vec({0.5, 0.5, 0.5});
    const double truth = task.eval_true(x);
    QueryLedger ledger;
    std::mt19937_64 rng(4);
    const int n = 20000;
    double sum = 0.0;
    double sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double y = classical_sample(task, x, NoiseModel{0.01}, rng, ledger);
        sum += y - truth;
        sq += (y - truth) * (y - truth);
    }
    CHECK(ledger.classical_queries() == n);
    CHECK(std::abs(sum / n) <= 4.0 * 0.1 / std::sqrt(n));
    CHECK(sq / n == doctest::Approx(0.01).epsilon(0.05));
    CHECK(classical_sample(task, x, NoiseModel{0.0}, rng, ledger) == truth);
}

TEST_CASE("mode names") {
    CHECK(parse_qme_mode("det") == QmeMode::deterministic_bounded);
    CHECK(parse_qme_mode("inject") == QmeMode::failure_injection);
    CHECK(to_string(QmeMode::failure_injection) == "inject");
    CHECK_THROWS(parse_qme_mode("quantum"));
}
