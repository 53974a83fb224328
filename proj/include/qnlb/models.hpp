#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace qnlb {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Parameter vector w of a parametric surrogate f_w.
using ParamVector = Eigen::VectorXd;

class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class ModelFamily { linear, quadratic, mlp };

std::string_view to_string(ModelFamily family);
ModelFamily parse_model_family(std::string_view name);

// Shape of a parametric family.
//
//   linear     f_w(x) = w^T x                            d_w = d_x
//   quadratic  f_w(x) = b + l^T x + x^T diag(q) x         d_w = 2 d_x + 1, w = (b, l, q)
//   mlp        f_w(x) = W2 sigmoid(W1 x + b1) + b2        d_w = h (d_x + 1) + h + 1
//
// MLP parameters are packed as [W1 (row-major, h x d_x), b1 (h), W2 (h), b2].
struct ModelSpec {
    ModelFamily family = ModelFamily::mlp;
    std::size_t input_dim = 1;
    std::size_t hidden_dim = 25;

    std::size_t param_dim() const;
    void validate() const;

    friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

struct ModelBounds {
    double c_f = 1.0;
    double c_g = 18.0;
    double c_h = 1.0;

    void validate() const;
};

// Bounds used when nothing is sampled.
ModelBounds default_bounds();

double eval(const ModelSpec& spec, const ParamVector& w, const Vector& x);

// Analytic gradient with respect to w.
Vector grad(const ModelSpec& spec, const ParamVector& w, const Vector& x);

// Value and gradient in one pass.
double eval_grad(const ModelSpec& spec, const ParamVector& w, const Vector& x, Vector& g);

ParamVector init_params(const ModelSpec& spec, std::uint64_t seed);

// Clamp into the theoretical parameter box [0, 1]^{d_w}.
ParamVector clamp_to_unit_box(const ParamVector& w);

struct BoxDomain;

// Empirical surrogate for the (C_f, C_g, C_h) constants over a box. Each
// sampled maximum is inflated by 1.1 and then raised to the matching floor.
// C_h uses the operator norm of a finite-difference Hessian of f_x(w).
ModelBounds estimate_bounds(const ModelSpec& spec, const ParamVector& w, const BoxDomain& domain,
                            std::size_t n_samples, std::uint64_t seed,
                            const ModelBounds& floors = ModelBounds{1e-8, 1e-8, 1e-8});

}  // namespace qnlb
