#pragma once

#include <cstddef>

#include "qnlb/models.hpp"

namespace qnlb {

// Sigma = lambda I + sum_i g_i g_i^T / eps_i^2 with an incrementally
// maintained inverse and log-determinant.
class CovarianceState {
public:
    static CovarianceState init(std::size_t d_w, double lambda);

    std::size_t dim() const { return static_cast<std::size_t>(sigma_.rows()); }
    double lambda() const { return lambda_; }
    const Matrix& sigma() const { return sigma_; }
    const Matrix& sigma_inv() const { return sigma_inv_; }
    double logdet() const { return logdet_; }
    std::size_t update_count() const { return updates_; }
    // Number of times the inverse was rebuilt by dense factorization.
    std::size_t rebuild_count() const { return rebuilds_; }

    // ||g||_{Sigma^{-1}}
    double eps_for(const Vector& g) const;

    // Rank-1 update Sigma += g g^T / eps^2 via Sherman-Morrison.
    void update(const Vector& g, double eps);

    // max |Sigma Sigma^{-1} - I|
    double inverse_residual() const;

    double norm_sq(const Vector& v) const { return v.dot(sigma_ * v); }

private:
    CovarianceState(std::size_t d_w, double lambda);
    void rebuild();

    Matrix sigma_;
    Matrix sigma_inv_;
    double lambda_ = 1.0;
    double logdet_ = 0.0;
    std::size_t updates_ = 0;
    std::size_t rebuilds_ = 0;
};

inline CovarianceState init_state(std::size_t d_w, double lambda) {
    return CovarianceState::init(d_w, lambda);
}

double compute_eps(const CovarianceState& state, const Vector& g);

CovarianceState update_covariance(CovarianceState state, const Vector& g, double eps);

}  // namespace qnlb
