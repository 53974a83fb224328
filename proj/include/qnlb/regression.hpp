#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "qnlb/models.hpp"
#include "qnlb/quantum.hpp"
#include "qnlb/tasks.hpp"

namespace qnlb {

class RegressionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RegressionConfig {
    std::size_t t0 = 18;
    std::size_t sgd_iters = 2000;
    double learning_rate = 1e-3;
    std::uint64_t seed = 0;
    bool shuffle = true;
    // Start point for SGD; init_params(spec, seed) when empty.
    ParamVector init;
};

struct Sample {
    Vector x;
    double y = 0.0;
};

struct ErmResult {
    ParamVector w;
    double risk = 0.0;       // empirical risk of w
    double init_risk = 0.0;  // empirical risk of the starting point
    std::size_t best_epoch = 0;  // 0 means the starting point was never beaten
};

// Mean squared error over the sample set.
double empirical_risk(std::span<const Sample> samples, const ModelSpec& spec, const ParamVector& w);

// Per-sample SGD on squared loss for sgd_iters epochs; returns the epoch-end
// iterate (or the start) with the lowest empirical risk.
ErmResult sgd_erm(std::span<const Sample> samples, const ModelSpec& spec, const RegressionConfig& cfg);

// Quantum charge of the regression oracle: ceil(sqrt(t0) * ln(max(t0, 2))).
std::uint64_t regression_quantum_cost(std::size_t t0);

// Estimates w0 from t0 uniformly drawn inputs with classical noisy labels.
// Charges t0 classical queries and regression_quantum_cost(t0) quantum queries.
ParamVector quantum_regression_oracle(const Task& task, const ModelSpec& spec,
                                      const RegressionConfig& cfg, const NoiseModel& noise,
                                      QueryLedger& ledger);

}  // namespace qnlb
