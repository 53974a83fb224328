#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "qnlb/models.hpp"

namespace qnlb {

class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class TabularLoadError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct BoxDomain {
    Vector lo;
    Vector hi;

    BoxDomain() = default;
    BoxDomain(Vector lo, Vector hi);

    static BoxDomain cube(std::size_t dim, double lo, double hi);

    std::size_t dim() const { return static_cast<std::size_t>(lo.size()); }
    bool contains(const Vector& x, double rel_tol = 1e-12) const;
    Vector clip(const Vector& x) const;
    Vector midpoint() const { return 0.5 * (lo + hi); }
};

Vector sample_uniform(const BoxDomain& domain, std::mt19937_64& rng);
Vector sample_uniform(const BoxDomain& domain, std::uint64_t seed);

struct Optimum {
    Vector x_star;
    double f_star = 0.0;
    bool approximate = false;
};

enum class SyntheticKind { rastrigin3, styblinski_tang3 };

struct SyntheticTask {
    SyntheticKind kind = SyntheticKind::rastrigin3;
    BoxDomain domain = BoxDomain::cube(3, -5.0, 5.0);
};

struct PlantedTask {
    ModelSpec spec;
    ParamVector w_star;
    BoxDomain domain;
};

struct TabularTask {
    Matrix grid;    // n_points x d_x
    Vector values;  // n_points
    BoxDomain domain;

    std::size_t size() const { return static_cast<std::size_t>(grid.rows()); }
    // Index of the nearest grid row; ties go to the lowest index.
    std::size_t nearest_row(const Vector& x) const;
};

TabularTask make_tabular(Matrix grid, Vector values);
TabularTask load_tabular(const std::filesystem::path& path);

// A black-box objective f0 to be maximized. Immutable once built.
class Task {
public:
    using Variant = std::variant<SyntheticTask, PlantedTask, TabularTask>;

    explicit Task(SyntheticTask t);
    explicit Task(PlantedTask t, std::size_t search_samples = 200000, std::uint64_t search_seed = 1);
    explicit Task(TabularTask t);

    static Task rastrigin();
    static Task styblinski_tang();

    const BoxDomain& domain() const;
    std::size_t input_dim() const { return domain().dim(); }
    bool is_tabular() const { return std::holds_alternative<TabularTask>(task_); }
    const Variant& variant() const { return task_; }
    const Optimum& optimum() const { return optimum_; }
    std::string name() const;

    // Exact f0(x). Tabular tasks snap x to the grid first.
    double eval_true(const Vector& x) const;

private:
    Variant task_;
    Optimum optimum_;
};

Vector snap_to_grid(const TabularTask& task, const Vector& x);

double rastrigin(const Vector& x);
double styblinski_tang(const Vector& x);

// Coordinate of the Styblinski-Tang maximizer (root of 4x^3 - 32x + 5 = 0).
inline constexpr double kStyblinskiArgmax = -2.903534027771177;

}  // namespace qnlb
