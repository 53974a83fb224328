#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string_view>

#include "qnlb/tasks.hpp"

namespace qnlb {

// Counts simulated oracle usage. Counters only move forward.
class QueryLedger {
public:
    std::uint64_t quantum_queries() const { return quantum_; }
    std::uint64_t classical_queries() const { return classical_; }
    std::uint64_t rounds_consumed() const { return rounds_; }

    void charge_quantum(std::uint64_t n) { quantum_ += n; }
    void charge_classical(std::uint64_t n) { classical_ += n; }
    void consume_rounds(std::uint64_t n) { rounds_ += n; }

private:
    std::uint64_t quantum_ = 0;
    std::uint64_t classical_ = 0;
    std::uint64_t rounds_ = 0;
};

enum class QmeMode { deterministic_bounded, failure_injection };

std::string_view to_string(QmeMode mode);
QmeMode parse_qme_mode(std::string_view name);

struct QmeConfig {
    double c1 = 1.0;
    QmeMode mode = QmeMode::deterministic_bounded;
    std::uint64_t seed = 0;
};

struct NoiseModel {
    double sigma2 = 0.01;
};

// ceil((c1 / eps) * ln(1 / delta)).
std::uint64_t qme_query_cost(double eps, double delta, double c1);

// Cost model for the bounded-variance estimator:
// ceil((c2 * sigma / eps) * ln(1 / delta)^{3/2}). Assumed form, see README.
std::uint64_t qme2_query_cost(double eps, double delta, double c2, double sigma);

// Contract-level simulator of quantum Monte Carlo mean estimation. Returns an
// estimate within +-eps of f0(x); in failure_injection mode an estimate is off
// by exactly 10 eps with probability delta.
class QuantumMeanEstimator {
public:
    explicit QuantumMeanEstimator(QmeConfig cfg);

    const QmeConfig& config() const { return cfg_; }

    double estimate_bounded(const Task& task, const Vector& x, double eps, double delta,
                            QueryLedger& ledger);

    double estimate_bounded_variance(const Task& task, const Vector& x, double eps, double delta,
                                     double c2, double sigma, QueryLedger& ledger);

private:
    double draw(double truth, double eps, double delta);

    QmeConfig cfg_;
    std::mt19937_64 rng_;
};

// Classical noisy observation f0(x) + N(0, sigma2).
double classical_sample(const Task& task, const Vector& x, const NoiseModel& noise,
                        std::mt19937_64& rng, QueryLedger& ledger);

}  // namespace qnlb
