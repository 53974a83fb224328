#include "qnlb/regression.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <fmt/format.h>

namespace qnlb {

double empirical_risk(std::span<const Sample> samples, const ModelSpec& spec, const ParamVector& w) {
    double total = 0.0;
    for (const auto& s : samples) {
        const double r = eval(spec, w, s.x) - s.y;
        total += r * r;
    }
    return total / static_cast<double>(samples.size());
}

ErmResult sgd_erm(std::span<const Sample> samples, const ModelSpec& spec, const RegressionConfig& cfg) {
    if (samples.empty()) {
        throw RegressionError("sgd_erm needs at least one sample");
    }
    if (cfg.sgd_iters < 1 || !(cfg.learning_rate > 0.0)) {
        throw RegressionError("sgd_erm needs sgd_iters >= 1 and a positive learning rate");
    }
    ParamVector w = cfg.init.size() > 0 ? cfg.init : init_params(spec, cfg.seed);
    if (static_cast<std::size_t>(w.size()) != spec.param_dim()) {
        throw DimensionError("initial parameter vector has the wrong dimension");
    }

    ErmResult result;
    result.w = w;
    result.init_risk = empirical_risk(samples, spec, w);
    result.risk = result.init_risk;

    std::mt19937_64 rng(cfg.seed ^ 0x5eedf00dULL);
    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Vector g;
    for (std::size_t epoch = 1; epoch <= cfg.sgd_iters; ++epoch) {
        if (cfg.shuffle) {
            std::shuffle(order.begin(), order.end(), rng);
        }
        for (const auto idx : order) {
            const auto& s = samples[idx];
            const double residual = eval_grad(spec, w, s.x, g) - s.y;
            w -= cfg.learning_rate * 2.0 * residual * g;
        }
        const double risk = empirical_risk(samples, spec, w);
        if (!std::isfinite(risk) || !w.allFinite()) {
            throw RegressionError(fmt::format(
                "non-finite loss at epoch {} (learning rate {} too high?)", epoch, cfg.learning_rate));
        }
        if (risk < result.risk) {
            result.risk = risk;
            result.w = w;
            result.best_epoch = epoch;
        }
    }
    return result;
}

std::uint64_t regression_quantum_cost(std::size_t t0) {
    if (t0 < 1) {
        throw std::invalid_argument("regression budget t0 must be at least 1");
    }
    const double n = static_cast<double>(t0);
    return static_cast<std::uint64_t>(std::ceil(std::sqrt(n) * std::log(std::max(n, 2.0))));
}

ParamVector quantum_regression_oracle(const Task& task, const ModelSpec& spec, const RegressionConfig& cfg,
                                      const NoiseModel& noise, QueryLedger& ledger) {
    if (task.input_dim() != spec.input_dim) {
        throw DimensionError("regression oracle: model input dimension does not match the task");
    }
    const auto charge = regression_quantum_cost(cfg.t0);
    std::mt19937_64 rng(cfg.seed);
    std::vector<Sample> samples;
    samples.reserve(cfg.t0);
    for (std::size_t j = 0; j < cfg.t0; ++j) {
        Vector x = sample_uniform(task.domain(), rng);
        const double y = classical_sample(task, x, noise, rng, ledger);
        samples.push_back(Sample{std::move(x), y});
    }
    auto fit = sgd_erm(samples, spec, cfg);
    ledger.charge_quantum(charge);
    return std::move(fit.w);
}

}  // namespace qnlb
