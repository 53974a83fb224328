#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "qnlb/covariance.hpp"
#include "qnlb/models.hpp"
#include "qnlb/quantum.hpp"
#include "qnlb/record.hpp"
#include "qnlb/regression.hpp"
#include "qnlb/tasks.hpp"

namespace qnlb {

class BanditError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class BetaMode { practical, theoretical };

std::string_view to_string(BetaMode mode);
BetaMode parse_beta_mode(std::string_view name);

struct BetaSchedule {
    BetaMode mode = BetaMode::practical;
    // practical: beta_s = c ln(s + 1)
    double c = 1.0;
    // theoretical: beta_s = 3 d_w s + 3 lambda c0^2 / t0^2 + 3 c_h^2 c0^2 s T^2 / (4 t0^4)
    std::size_t d_w = 1;
    double lambda = 1.0;
    double horizon = 1.0;
    double t0 = 1.0;
    double c0 = 1.0;
    double c_h = 1.0;
};

double ball_radius(const BetaSchedule& schedule, std::size_t s);

// {w : ||w - center||^2_Sigma <= radius}. Does not own Sigma.
struct ConfidenceBall {
    ParamVector center;
    double radius = 0.0;
    const Matrix* sigma = nullptr;

    double distance_sq(const ParamVector& w) const;
    bool contains(const ParamVector& w, double slack = 1e-12) const;
};

ParamVector project_to_ball(const ParamVector& w, const ConfidenceBall& ball);

struct BanditConfig {
    std::size_t horizon = 300;
    std::optional<double> lambda;   // defaults to horizon
    std::optional<std::size_t> t0;  // defaults to ceil(sqrt(horizon))
    double delta = 0.01;
    double c1 = 1.0;
    std::size_t ascent_iters = 2000;
    double lr_x = 1e-2;
    double lr_w = 1e-2;
    std::size_t restarts = 8;
    double eps_min = 1e-6;
    BetaMode beta_mode = BetaMode::practical;
    double beta_c = 1.0;
    double beta_c0 = 1.0;
    bool skip_regression = false;
    std::uint64_t seed = 0;

    double resolved_lambda() const;
    std::size_t resolved_t0() const;
    void validate() const;
};

// Everything one run needs.
struct RunConfig {
    ModelSpec model;
    BanditConfig bandit;
    RegressionConfig regression;
    QmeConfig qme;
    NoiseModel noise;
    ModelBounds bounds = default_bounds();
    bool clamp_params = false;  // keep w inside [0, 1]^{d_w}
};

// QLinUCB baseline: linear surrogate started at the origin, no regression step.
RunConfig qlinucb_preset(RunConfig cfg);

BetaSchedule make_beta_schedule(const RunConfig& cfg);

// Closed-form minimizer of the stage regression objective
//   lambda/2 ||w - w0||^2 + 1/2 sum_i ((w - w0)^T g_i + f_i(w0) - y_i)^2 / eps_i^2
// evaluated with the maintained inverse plus one refinement step.
ParamVector solve_wls(std::span<const StageRecord> history, const ParamVector& w0_hat, double lambda,
                      const CovarianceState& state);

struct ActionChoice {
    Vector x;
    ParamVector w;
    double value = 0.0;
};

// Alternating projected gradient ascent of f_x(w) over x in the box and w in
// the ball, from cfg.restarts uniform starting actions with w at the center.
ActionChoice select_action(const ModelSpec& spec, const ConfidenceBall& ball, const BoxDomain& domain,
                           const BanditConfig& cfg, std::mt19937_64& rng);

// max(1, ceil((c1 / eps) ln(m / delta)))
std::size_t stage_length(double eps, std::size_t m, double delta, double c1);

// ceil(d_w ln(C_g^2 T^2 / (d_w lambda) + 1))
std::size_t max_stages(std::size_t d_w, double c_g, double horizon, double lambda);

struct StageSnapshot {
    std::size_t s = 0;
    const ConfidenceBall& ball;
    const CovarianceState& state;
    const ParamVector& w0_hat;
};

using StageObserver = std::function<void(const StageSnapshot&)>;

RunRecord run(const Task& task, const RunConfig& cfg, QueryLedger& ledger,
              const StageObserver& observer = {});

}  // namespace qnlb
