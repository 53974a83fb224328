#include "qnlb/quantum.hpp"

#include <cmath>

#include <fmt/format.h>

namespace qnlb {
namespace {

void check_eps_delta(double eps, double delta) {
    if (!(eps > 0.0) || !std::isfinite(eps)) {
        throw std::invalid_argument(fmt::format("QME precision must be positive, got {}", eps));
    }
    if (!(delta > 0.0 && delta < 1.0)) {
        throw std::invalid_argument(fmt::format("QME failure probability must lie in (0, 1), got {}", delta));
    }
}

std::uint64_t ceil_count(double v) {
    // guard against 46.999999999 style round-off pushing a count up by one
    const double r = std::round(v);
    if (std::abs(v - r) <= 1e-9 * std::max(1.0, std::abs(v))) {
        return static_cast<std::uint64_t>(r);
    }
    return static_cast<std::uint64_t>(std::ceil(v));
}

}  // namespace

std::string_view to_string(QmeMode mode) {
    return mode == QmeMode::deterministic_bounded ? "det" : "inject";
}

QmeMode parse_qme_mode(std::string_view name) {
    if (name == "det" || name == "deterministic_bounded") return QmeMode::deterministic_bounded;
    if (name == "inject" || name == "failure_injection") return QmeMode::failure_injection;
    throw std::invalid_argument(fmt::format("unknown QME mode '{}'", name));
}

std::uint64_t qme_query_cost(double eps, double delta, double c1) {
    check_eps_delta(eps, delta);
    if (!(c1 > 0.0)) {
        throw std::invalid_argument("QME constant C1 must be positive");
    }
    return std::max<std::uint64_t>(1, ceil_count((c1 / eps) * std::log(1.0 / delta)));
}

std::uint64_t qme2_query_cost(double eps, double delta, double c2, double sigma) {
    check_eps_delta(eps, delta);
    if (!(c2 > 0.0) || !(sigma >= 0.0)) {
        throw std::invalid_argument("QME2 needs C2 > 0 and sigma >= 0");
    }
    return std::max<std::uint64_t>(1, ceil_count((c2 * sigma / eps) * std::pow(std::log(1.0 / delta), 1.5)));
}

QuantumMeanEstimator::QuantumMeanEstimator(QmeConfig cfg) : cfg_(cfg), rng_(cfg.seed) {
    if (!(cfg_.c1 > 0.0)) {
        throw std::invalid_argument("QME constant C1 must be positive");
    }
}

double QuantumMeanEstimator::draw(double truth, double eps, double delta) {
    if (cfg_.mode == QmeMode::failure_injection) {
        std::bernoulli_distribution fail(delta);
        if (fail(rng_)) {
            std::bernoulli_distribution sign(0.5);
            return truth + (sign(rng_) ? 10.0 : -10.0) * eps;
        }
    }
    std::uniform_real_distribution<double> noise(-eps, eps);
    double y = truth + noise(rng_);
    // rounding in truth + u may overshoot the bound by an ulp
    while (std::abs(y - truth) > eps) {
        y = std::nextafter(y, truth);
    }
    return y;
}

double QuantumMeanEstimator::estimate_bounded(const Task& task, const Vector& x, double eps, double delta,
                                              QueryLedger& ledger) {
    const auto cost = qme_query_cost(eps, delta, cfg_.c1);
    const double truth = task.eval_true(x);
    ledger.charge_quantum(cost);
    return draw(truth, eps, delta);
}

double QuantumMeanEstimator::estimate_bounded_variance(const Task& task, const Vector& x, double eps,
                                                       double delta, double c2, double sigma,
                                                       QueryLedger& ledger) {
    const auto cost = qme2_query_cost(eps, delta, c2, sigma);
    const double truth = task.eval_true(x);
    ledger.charge_quantum(cost);
    return draw(truth, eps, delta);
}

double classical_sample(const Task& task, const Vector& x, const NoiseModel& noise, std::mt19937_64& rng,
                        QueryLedger& ledger) {
    if (!(noise.sigma2 >= 0.0)) {
        throw std::invalid_argument("noise variance must be non-negative");
    }
    const double truth = task.eval_true(x);
    ledger.charge_classical(1);
    if (noise.sigma2 == 0.0) {
        return truth;
    }
    std::normal_distribution<double> eta(0.0, std::sqrt(noise.sigma2));
    return truth + eta(rng);
}

}  // namespace qnlb
