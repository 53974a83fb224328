#include "qnlb/covariance.hpp"

#include <cmath>
#include <stdexcept>

namespace qnlb {
namespace {

constexpr std::size_t kRevalidateEvery = 8;
constexpr double kInverseTolerance = 1e-10;

}  // namespace

CovarianceState::CovarianceState(std::size_t d_w, double lambda) : lambda_(lambda) {
    const auto n = static_cast<Eigen::Index>(d_w);
    sigma_ = lambda * Matrix::Identity(n, n);
    sigma_inv_ = (1.0 / lambda) * Matrix::Identity(n, n);
    logdet_ = static_cast<double>(d_w) * std::log(lambda);
}

CovarianceState CovarianceState::init(std::size_t d_w, double lambda) {
    if (d_w < 1) {
        throw std::invalid_argument("covariance dimension must be at least 1");
    }
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw std::invalid_argument("regularizer lambda must be positive");
    }
    return CovarianceState(d_w, lambda);
}

double CovarianceState::eps_for(const Vector& g) const {
    if (g.size() != sigma_.rows()) {
        throw DimensionError("gradient dimension does not match covariance");
    }
    return std::sqrt(std::max(0.0, g.dot(sigma_inv_ * g)));
}

void CovarianceState::update(const Vector& g, double eps) {
    if (!(eps > 0.0) || !std::isfinite(eps)) {
        throw std::invalid_argument("covariance update needs eps > 0");
    }
    if (g.size() != sigma_.rows()) {
        throw DimensionError("gradient dimension does not match covariance");
    }
    if (!g.allFinite()) {
        throw std::invalid_argument("covariance update needs a finite gradient");
    }
    const double eps2 = eps * eps;
    const Vector u = sigma_inv_ * g;
    const double q = g.dot(u);
    const double denom = eps2 + q;

    sigma_.noalias() += (g * g.transpose()) / eps2;
    ++updates_;
    if (!(q >= 0.0) || !std::isfinite(denom)) {
        rebuild();
        return;
    }
    sigma_inv_.noalias() -= (u * u.transpose()) / denom;
    sigma_inv_ = 0.5 * (sigma_inv_ + sigma_inv_.transpose()).eval();
    logdet_ += std::log1p(q / eps2);

    if (updates_ % kRevalidateEvery == 0 && inverse_residual() > kInverseTolerance) {
        rebuild();
    }
}

double CovarianceState::inverse_residual() const {
    const auto n = sigma_.rows();
    return (sigma_ * sigma_inv_ - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
}

void CovarianceState::rebuild() {
    Eigen::LLT<Matrix> llt(sigma_);
    if (llt.info() != Eigen::Success) {
        throw std::runtime_error("covariance lost positive definiteness");
    }
    const auto n = sigma_.rows();
    sigma_inv_ = llt.solve(Matrix::Identity(n, n));
    sigma_inv_ = 0.5 * (sigma_inv_ + sigma_inv_.transpose()).eval();
    logdet_ = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    ++rebuilds_;
}

double compute_eps(const CovarianceState& state, const Vector& g) { return state.eps_for(g); }

CovarianceState update_covariance(CovarianceState state, const Vector& g, double eps) {
    state.update(g, eps);
    return state;
}

}  // namespace qnlb
