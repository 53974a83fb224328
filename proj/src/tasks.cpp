#include "qnlb/tasks.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>
#include <string_view>

#include <fmt/format.h>

namespace qnlb {
namespace {

constexpr double kRastriginMax = -170.0;
constexpr double kStyblinskiMax = 117.49849711131425;

Optimum planted_optimum(const PlantedTask& t, std::size_t search_samples, std::uint64_t seed) {
    const auto d = static_cast<Eigen::Index>(t.domain.dim());
    const Vector& lo = t.domain.lo;
    const Vector& hi = t.domain.hi;
    Optimum opt;
    switch (t.spec.family) {
        case ModelFamily::linear: {
            opt.x_star = Vector(d);
            for (Eigen::Index i = 0; i < d; ++i) {
                opt.x_star[i] = t.w_star[i] > 0.0 ? hi[i] : lo[i];
            }
            break;
        }
        case ModelFamily::quadratic: {
            // separable: maximize l_i x + q_i x^2 per coordinate
            opt.x_star = Vector(d);
            for (Eigen::Index i = 0; i < d; ++i) {
                const double l = t.w_star[1 + i];
                const double q = t.w_star[1 + d + i];
                auto term = [&](double v) { return l * v + q * v * v; };
                double best = lo[i];
                if (term(hi[i]) > term(best)) best = hi[i];
                if (q < 0.0) {
                    const double v = -l / (2.0 * q);
                    if (v > lo[i] && v < hi[i] && term(v) > term(best)) best = v;
                }
                opt.x_star[i] = best;
            }
            break;
        }
        case ModelFamily::mlp: {
            std::mt19937_64 rng(seed);
            opt.x_star = t.domain.midpoint();
            double best = eval(t.spec, t.w_star, opt.x_star);
            for (std::size_t k = 0; k < search_samples; ++k) {
                Vector x = sample_uniform(t.domain, rng);
                const double v = eval(t.spec, t.w_star, x);
                if (v > best) {
                    best = v;
                    opt.x_star = std::move(x);
                }
            }
            // pattern-search polish around the best sample
            Vector step = 0.01 * (hi - lo);
            for (int it = 0; it < 60; ++it) {
                bool moved = false;
                for (Eigen::Index i = 0; i < d; ++i) {
                    for (double sign : {1.0, -1.0}) {
                        Vector x = opt.x_star;
                        x[i] = std::clamp(x[i] + sign * step[i], lo[i], hi[i]);
                        const double v = eval(t.spec, t.w_star, x);
                        if (v > best) {
                            best = v;
                            opt.x_star = std::move(x);
                            moved = true;
                        }
                    }
                }
                if (!moved) step *= 0.5;
            }
            opt.approximate = true;
            break;
        }
    }
    opt.f_star = eval(t.spec, t.w_star, opt.x_star);
    return opt;
}

double parse_cell(std::string_view cell, std::size_t line) {
    double v = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    if (!cell.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (cell.empty() || ec != std::errc() || ptr != last) {
        throw TabularLoadError(fmt::format("row {}: non-numeric cell '{}'", line, cell));
    }
    return v;
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            cells.push_back(line.substr(start));
            return cells;
        }
        cells.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

}  // namespace

BoxDomain::BoxDomain(Vector lo_, Vector hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
    if (lo.size() != hi.size()) {
        throw DomainError("domain bounds have different dimensions");
    }
    for (Eigen::Index i = 0; i < lo.size(); ++i) {
        if (!(lo[i] < hi[i])) {
            throw DomainError(fmt::format("domain coordinate {} has lo >= hi", i));
        }
    }
}

BoxDomain BoxDomain::cube(std::size_t dim, double lo, double hi) {
    const auto n = static_cast<Eigen::Index>(dim);
    return BoxDomain(Vector::Constant(n, lo), Vector::Constant(n, hi));
}

bool BoxDomain::contains(const Vector& x, double rel_tol) const {
    if (x.size() != lo.size()) return false;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double slack = rel_tol * (hi[i] - lo[i]);
        if (!(x[i] >= lo[i] - slack && x[i] <= hi[i] + slack)) return false;
    }
    return true;
}

Vector BoxDomain::clip(const Vector& x) const { return x.cwiseMax(lo).cwiseMin(hi); }

Vector sample_uniform(const BoxDomain& domain, std::mt19937_64& rng) {
    Vector x(domain.lo.size());
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        x[i] = std::min(domain.hi[i], domain.lo[i] + unit(rng) * (domain.hi[i] - domain.lo[i]));
    }
    return x;
}

Vector sample_uniform(const BoxDomain& domain, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return sample_uniform(domain, rng);
}

double rastrigin(const Vector& x) {
    double f = -200.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        f += 10.0 * std::cos(2.0 * std::numbers::pi * x[i]) - x[i] * x[i];
    }
    return f;
}

double styblinski_tang(const Vector& x) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double v = x[i];
        const double v2 = v * v;
        s += v2 * v2 - 16.0 * v2 + 5.0 * v;
    }
    return -0.5 * s;
}

std::size_t TabularTask::nearest_row(const Vector& x) const {
    if (x.size() != grid.cols()) {
        throw DimensionError("query dimension does not match tabular grid");
    }
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index r = 0; r < grid.rows(); ++r) {
        const double d = (grid.row(r).transpose() - x).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = static_cast<std::size_t>(r);
        }
    }
    return best;
}

Vector snap_to_grid(const TabularTask& task, const Vector& x) {
    return task.grid.row(static_cast<Eigen::Index>(task.nearest_row(x))).transpose();
}

TabularTask make_tabular(Matrix grid, Vector values) {
    if (grid.rows() < 1 || grid.cols() < 1) {
        throw TabularLoadError("tabular task needs at least one row and one input column");
    }
    if (values.size() != grid.rows()) {
        throw TabularLoadError("tabular values length differs from grid row count");
    }
    std::set<std::vector<double>> seen;
    for (Eigen::Index r = 0; r < grid.rows(); ++r) {
        if (!std::isfinite(values[r]) || !grid.row(r).allFinite()) {
            throw TabularLoadError(fmt::format("grid row {} is not finite", r));
        }
        std::vector<double> key(static_cast<std::size_t>(grid.cols()));
        for (Eigen::Index c = 0; c < grid.cols(); ++c) key[static_cast<std::size_t>(c)] = grid(r, c);
        if (!seen.insert(std::move(key)).second) {
            throw TabularLoadError(fmt::format("duplicate grid row {}", r));
        }
    }
    Vector lo = grid.colwise().minCoeff().transpose();
    Vector hi = grid.colwise().maxCoeff().transpose();
    for (Eigen::Index c = 0; c < lo.size(); ++c) {
        if (!(lo[c] < hi[c])) {
            // constant column: widen so the box is non-degenerate
            const double pad = 1e-6 * std::max(1.0, std::abs(lo[c]));
            lo[c] -= pad;
            hi[c] += pad;
        }
    }
    TabularTask t;
    t.grid = std::move(grid);
    t.values = std::move(values);
    t.domain = BoxDomain(std::move(lo), std::move(hi));
    return t;
}

TabularTask load_tabular(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw TabularLoadError(fmt::format("cannot open tabular file '{}'", path.string()));
    }
    std::string line;
    std::size_t line_no = 0;
    std::size_t dims = 0;
    std::vector<std::vector<double>> rows;
    std::vector<std::size_t> row_lines;
    std::set<std::vector<double>> seen;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1) {
            const auto cells = split_commas(line);
            if (cells.size() < 2 || cells.back() != "value") {
                throw TabularLoadError("row 1: header must be x1,...,xd,value");
            }
            for (std::size_t i = 0; i + 1 < cells.size(); ++i) {
                if (cells[i] != fmt::format("x{}", i + 1)) {
                    throw TabularLoadError(fmt::format("row 1: expected header column 'x{}', got '{}'", i + 1, cells[i]));
                }
            }
            dims = cells.size() - 1;
            continue;
        }
        if (line.empty()) continue;
        const auto cells = split_commas(line);
        if (cells.size() != dims + 1) {
            throw TabularLoadError(
                fmt::format("row {}: expected {} cells, found {}", line_no, dims + 1, cells.size()));
        }
        std::vector<double> row;
        row.reserve(cells.size());
        for (auto cell : cells) row.push_back(parse_cell(cell, line_no));
        if (!std::all_of(row.begin(), row.end(), [](double v) { return std::isfinite(v); })) {
            throw TabularLoadError(fmt::format("row {}: non-finite value", line_no));
        }
        std::vector<double> key(row.begin(), row.end() - 1);
        if (!seen.insert(key).second) {
            const auto first = std::find_if(rows.begin(), rows.end(), [&](const auto& r) {
                return std::equal(key.begin(), key.end(), r.begin());
            });
            throw TabularLoadError(fmt::format("row {}: duplicate grid point (first seen at row {})", line_no,
                                               row_lines[static_cast<std::size_t>(first - rows.begin())]));
        }
        rows.push_back(std::move(row));
        row_lines.push_back(line_no);
    }
    if (line_no == 0) {
        throw TabularLoadError("row 1: empty file");
    }
    if (rows.empty()) {
        throw TabularLoadError("row 2: no data rows");
    }
    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto d = static_cast<Eigen::Index>(dims);
    Matrix grid(n, d);
    Vector values(n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto& row = rows[static_cast<std::size_t>(r)];
        for (Eigen::Index c = 0; c < d; ++c) grid(r, c) = row[static_cast<std::size_t>(c)];
        values[r] = row.back();
    }
    return make_tabular(std::move(grid), std::move(values));
}

Task::Task(SyntheticTask t) : task_(std::move(t)) {
    const auto& s = std::get<SyntheticTask>(task_);
    if (s.domain.dim() != 3) {
        throw DimensionError("built-in synthetic tasks are three-dimensional");
    }
    if (s.kind == SyntheticKind::rastrigin3) {
        optimum_ = Optimum{Vector::Zero(3), kRastriginMax, false};
    } else {
        optimum_ = Optimum{Vector::Constant(3, kStyblinskiArgmax), kStyblinskiMax, false};
    }
    if (std::abs(eval_true(optimum_.x_star) - optimum_.f_star) > 1e-9) {
        throw std::logic_error("synthetic optimum constant failed verification");
    }
}

Task::Task(PlantedTask t, std::size_t search_samples, std::uint64_t search_seed) : task_(std::move(t)) {
    const auto& p = std::get<PlantedTask>(task_);
    if (p.domain.dim() != p.spec.input_dim) {
        throw DimensionError("planted task domain does not match model input dimension");
    }
    if (static_cast<std::size_t>(p.w_star.size()) != p.spec.param_dim()) {
        throw DimensionError("planted parameter vector has the wrong dimension");
    }
    optimum_ = planted_optimum(p, search_samples, search_seed);
}

Task::Task(TabularTask t) : task_(std::move(t)) {
    const auto& tab = std::get<TabularTask>(task_);
    Eigen::Index best = 0;
    tab.values.maxCoeff(&best);
    optimum_ = Optimum{tab.grid.row(best).transpose(), tab.values[best], false};
}

Task Task::rastrigin() { return Task(SyntheticTask{SyntheticKind::rastrigin3, BoxDomain::cube(3, -5.0, 5.0)}); }

Task Task::styblinski_tang() {
    return Task(SyntheticTask{SyntheticKind::styblinski_tang3, BoxDomain::cube(3, -5.0, 5.0)});
}

const BoxDomain& Task::domain() const {
    return std::visit([](const auto& t) -> const BoxDomain& { return t.domain; }, task_);
}

std::string Task::name() const {
    struct {
        std::string operator()(const SyntheticTask& t) const {
            return t.kind == SyntheticKind::rastrigin3 ? "rastrigin" : "styblinski";
        }
        std::string operator()(const PlantedTask& t) const {
            return fmt::format("planted-{}", to_string(t.spec.family));
        }
        std::string operator()(const TabularTask&) const { return "tabular"; }
    } namer;
    return std::visit(namer, task_);
}

double Task::eval_true(const Vector& x) const {
    if (const auto* tab = std::get_if<TabularTask>(&task_)) {
        return tab->values[static_cast<Eigen::Index>(tab->nearest_row(x))];
    }
    if (static_cast<std::size_t>(x.size()) != input_dim()) {
        throw DimensionError(fmt::format("input has dimension {}, task expects {}", x.size(), input_dim()));
    }
    if (!domain().contains(x, 1e-9)) {
        throw DomainError("query point lies outside the task domain");
    }
    if (const auto* syn = std::get_if<SyntheticTask>(&task_)) {
        return syn->kind == SyntheticKind::rastrigin3 ? qnlb::rastrigin(x) : qnlb::styblinski_tang(x);
    }
    const auto& p = std::get<PlantedTask>(task_);
    return eval(p.spec, p.w_star, x);
}

}  // namespace qnlb
