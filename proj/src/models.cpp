#include "qnlb/models.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "qnlb/tasks.hpp"

namespace qnlb {
namespace {

double sigmoid(double a) {
    if (a >= 0.0) {
        return 1.0 / (1.0 + std::exp(-a));
    }
    const double e = std::exp(a);
    return e / (1.0 + e);
}

void check_dims(const ModelSpec& spec, const ParamVector& w, const Vector& x) {
    spec.validate();
    if (static_cast<std::size_t>(x.size()) != spec.input_dim) {
        throw DimensionError(fmt::format("input has dimension {}, model expects {}", x.size(), spec.input_dim));
    }
    if (static_cast<std::size_t>(w.size()) != spec.param_dim()) {
        throw DimensionError(
            fmt::format("parameter vector has dimension {}, model expects {}", w.size(), spec.param_dim()));
    }
}

double mlp_forward(const ModelSpec& spec, const ParamVector& w, const Vector& x, Vector* hidden) {
    const auto d = static_cast<Eigen::Index>(spec.input_dim);
    const auto h = static_cast<Eigen::Index>(spec.hidden_dim);
    const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> w1(
        w.data(), h, d);
    const auto b1 = w.segment(h * d, h);
    const auto w2 = w.segment(h * d + h, h);
    const double b2 = w[h * d + 2 * h];

    Vector act = w1 * x + b1;
    for (Eigen::Index j = 0; j < h; ++j) {
        act[j] = sigmoid(act[j]);
    }
    const double out = w2.dot(act) + b2;
    if (hidden != nullptr) {
        *hidden = std::move(act);
    }
    return out;
}

}  // namespace

std::string_view to_string(ModelFamily family) {
    switch (family) {
        case ModelFamily::linear: return "linear";
        case ModelFamily::quadratic: return "quadratic";
        case ModelFamily::mlp: return "mlp";
    }
    return "unknown";
}

ModelFamily parse_model_family(std::string_view name) {
    if (name == "linear") return ModelFamily::linear;
    if (name == "quadratic") return ModelFamily::quadratic;
    if (name == "mlp" || name == "two-layer-mlp") return ModelFamily::mlp;
    throw std::invalid_argument(fmt::format("unknown model family '{}'", name));
}

std::size_t ModelSpec::param_dim() const {
    switch (family) {
        case ModelFamily::linear: return input_dim;
        case ModelFamily::quadratic: return 2 * input_dim + 1;
        case ModelFamily::mlp: return hidden_dim * (input_dim + 1) + hidden_dim + 1;
    }
    return 0;
}

void ModelSpec::validate() const {
    if (input_dim < 1) {
        throw DimensionError("model input_dim must be at least 1");
    }
    if (family == ModelFamily::mlp && hidden_dim < 1) {
        throw DimensionError("mlp hidden_dim must be at least 1");
    }
}

void ModelBounds::validate() const {
    if (!(c_f > 0.0) || !(c_g > 0.0) || !(c_h > 0.0)) {
        throw std::invalid_argument("model bounds must be strictly positive");
    }
}

ModelBounds default_bounds() { return ModelBounds{1.0, 18.0, 1.0}; }

double eval(const ModelSpec& spec, const ParamVector& w, const Vector& x) {
    check_dims(spec, w, x);
    switch (spec.family) {
        case ModelFamily::linear: return w.dot(x);
        case ModelFamily::quadratic: {
            const auto d = x.size();
            return w[0] + w.segment(1, d).dot(x) + w.segment(1 + d, d).dot(x.cwiseProduct(x));
        }
        case ModelFamily::mlp: return mlp_forward(spec, w, x, nullptr);
    }
    return 0.0;
}

double eval_grad(const ModelSpec& spec, const ParamVector& w, const Vector& x, Vector& g) {
    check_dims(spec, w, x);
    g.resize(w.size());
    switch (spec.family) {
        case ModelFamily::linear:
            g = x;
            return w.dot(x);
        case ModelFamily::quadratic: {
            const auto d = x.size();
            g[0] = 1.0;
            g.segment(1, d) = x;
            g.segment(1 + d, d) = x.cwiseProduct(x);
            return w.dot(g);
        }
        case ModelFamily::mlp: {
            const auto d = static_cast<Eigen::Index>(spec.input_dim);
            const auto h = static_cast<Eigen::Index>(spec.hidden_dim);
            Vector hidden;
            const double out = mlp_forward(spec, w, x, &hidden);
            const auto w2 = w.segment(h * d + h, h);
            // backprop through the hidden layer
            for (Eigen::Index j = 0; j < h; ++j) {
                const double delta = w2[j] * hidden[j] * (1.0 - hidden[j]);
                g.segment(j * d, d) = delta * x;
                g[h * d + j] = delta;
            }
            g.segment(h * d + h, h) = hidden;
            g[h * d + 2 * h] = 1.0;
            return out;
        }
    }
    return 0.0;
}

Vector grad(const ModelSpec& spec, const ParamVector& w, const Vector& x) {
    Vector g;
    eval_grad(spec, w, x, g);
    return g;
}

ParamVector init_params(const ModelSpec& spec, std::uint64_t seed) {
    spec.validate();
    ParamVector w = ParamVector::Zero(static_cast<Eigen::Index>(spec.param_dim()));
    if (spec.family != ModelFamily::mlp) {
        return w;
    }
    std::mt19937_64 rng(seed);
    const auto d = static_cast<Eigen::Index>(spec.input_dim);
    const auto h = static_cast<Eigen::Index>(spec.hidden_dim);
    std::uniform_real_distribution<double> first(-1.0 / std::sqrt(static_cast<double>(d)),
                                                  1.0 / std::sqrt(static_cast<double>(d)));
    std::uniform_real_distribution<double> second(-1.0 / std::sqrt(static_cast<double>(h)),
                                                   1.0 / std::sqrt(static_cast<double>(h)));
    for (Eigen::Index i = 0; i < h * d; ++i) {
        w[i] = first(rng);
    }
    for (Eigen::Index j = 0; j < h; ++j) {
        w[h * d + h + j] = second(rng);
    }
    return w;
}

ParamVector clamp_to_unit_box(const ParamVector& w) { return w.cwiseMax(0.0).cwiseMin(1.0); }

ModelBounds estimate_bounds(const ModelSpec& spec, const ParamVector& w, const BoxDomain& domain,
                            std::size_t n_samples, std::uint64_t seed, const ModelBounds& floors) {
    if (domain.dim() == 0) {
        throw DomainError("cannot estimate bounds over an empty domain");
    }
    if (domain.dim() != spec.input_dim) {
        throw DimensionError("domain dimension does not match model input dimension");
    }
    if (n_samples < 1) {
        throw std::invalid_argument("estimate_bounds needs at least one sample");
    }
    constexpr double kSafety = 1.1;
    std::mt19937_64 rng(seed);
    const auto n = w.size();
    double max_f = 0.0;
    double max_g = 0.0;
    double max_h = 0.0;
    Vector g;
    Matrix hess(n, n);
    for (std::size_t k = 0; k < n_samples; ++k) {
        const Vector x = sample_uniform(domain, rng);
        max_f = std::max(max_f, std::abs(eval_grad(spec, w, x, g)));
        max_g = std::max(max_g, g.norm());
        for (Eigen::Index j = 0; j < n; ++j) {
            const double step = 1e-5 * std::max(1.0, std::abs(w[j]));
            ParamVector wp = w;
            ParamVector wm = w;
            wp[j] += step;
            wm[j] -= step;
            hess.col(j) = (grad(spec, wp, x) - grad(spec, wm, x)) / (2.0 * step);
        }
        const Matrix sym = 0.5 * (hess + hess.transpose());
        Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
        max_h = std::max(max_h, eig.eigenvalues().cwiseAbs().maxCoeff());
    }
    return ModelBounds{std::max(floors.c_f, kSafety * max_f), std::max(floors.c_g, kSafety * max_g),
                       std::max(floors.c_h, kSafety * max_h)};
}

}  // namespace qnlb
