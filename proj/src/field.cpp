#include "warpgraph/field.hpp"

#include "warpgraph/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace warpgraph {

Tensor identity_tensor(int dim) {
    Tensor t{};
    for (int i = 0; i < dim; ++i) {
        at(t, i, i) = 1.0;
    }
    return t;
}

ScalarField::ScalarField(GridPtr grid, double fill)
    : grid_(std::move(grid)), values_(grid_->size(), fill) {}

ScalarField::ScalarField(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_->size()) {
        throw ValidationError("scalar field length " + std::to_string(values_.size()) +
                              " does not match node count " + std::to_string(grid_->size()));
    }
}

double ScalarField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double ScalarField::max() const { return *std::max_element(values_.begin(), values_.end()); }

double ScalarField::max_abs() const {
    double m = 0.0;
    for (double v : values_) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

bool ScalarField::all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

VectorField::VectorField(GridPtr grid)
    : grid_(std::move(grid)), dim_(grid_->dim()),
      comps_(grid_->size() * static_cast<std::size_t>(grid_->dim()), 0.0) {}

bool VectorField::all_finite() const {
    return std::all_of(comps_.begin(), comps_.end(), [](double v) { return std::isfinite(v); });
}

double determinant(const Tensor& t, int dim) {
    if (dim == 2) {
        return at(t, 0, 0) * at(t, 1, 1) - at(t, 0, 1) * at(t, 1, 0);
    }
    return at(t, 0, 0) * (at(t, 1, 1) * at(t, 2, 2) - at(t, 1, 2) * at(t, 2, 1)) -
           at(t, 0, 1) * (at(t, 1, 0) * at(t, 2, 2) - at(t, 1, 2) * at(t, 2, 0)) +
           at(t, 0, 2) * (at(t, 1, 0) * at(t, 2, 1) - at(t, 1, 1) * at(t, 2, 0));
}

Tensor inverse(const Tensor& t, int dim) {
    Tensor r{};
    const double det = determinant(t, dim);
    if (dim == 2) {
        at(r, 0, 0) = at(t, 1, 1) / det;
        at(r, 1, 1) = at(t, 0, 0) / det;
        at(r, 0, 1) = -at(t, 0, 1) / det;
        at(r, 1, 0) = -at(t, 1, 0) / det;
        return r;
    }
    at(r, 0, 0) = (at(t, 1, 1) * at(t, 2, 2) - at(t, 1, 2) * at(t, 2, 1)) / det;
    at(r, 0, 1) = (at(t, 0, 2) * at(t, 2, 1) - at(t, 0, 1) * at(t, 2, 2)) / det;
    at(r, 0, 2) = (at(t, 0, 1) * at(t, 1, 2) - at(t, 0, 2) * at(t, 1, 1)) / det;
    at(r, 1, 0) = (at(t, 1, 2) * at(t, 2, 0) - at(t, 1, 0) * at(t, 2, 2)) / det;
    at(r, 1, 1) = (at(t, 0, 0) * at(t, 2, 2) - at(t, 0, 2) * at(t, 2, 0)) / det;
    at(r, 1, 2) = (at(t, 0, 2) * at(t, 1, 0) - at(t, 0, 0) * at(t, 1, 2)) / det;
    at(r, 2, 0) = (at(t, 1, 0) * at(t, 2, 1) - at(t, 1, 1) * at(t, 2, 0)) / det;
    at(r, 2, 1) = (at(t, 0, 1) * at(t, 2, 0) - at(t, 0, 0) * at(t, 2, 1)) / det;
    at(r, 2, 2) = (at(t, 0, 0) * at(t, 1, 1) - at(t, 0, 1) * at(t, 1, 0)) / det;
    return r;
}

namespace {

std::string describe_node(const FiberGrid& grid, std::size_t p) {
    const auto idx = grid.multi_index(p);
    const auto x = grid.coords(p);
    std::ostringstream os;
    os << "node " << p << " (i=" << idx[0] << ", j=" << idx[1];
    if (grid.dim() > 2) {
        os << ", k=" << idx[2];
    }
    os << "; coords " << x[0] << ", " << x[1];
    if (grid.dim() > 2) {
        os << ", " << x[2];
    }
    os << ")";
    return os.str();
}

// Sylvester's criterion on the leading minors.
bool is_spd(const Tensor& t, int dim) {
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < i; ++j) {
            const double a = at(t, i, j);
            const double b = at(t, j, i);
            if (std::abs(a - b) > 1e-12 * (std::abs(a) + std::abs(b) + 1e-300)) {
                return false;
            }
        }
    }
    if (!(at(t, 0, 0) > 0.0)) {
        return false;
    }
    if (!(at(t, 0, 0) * at(t, 1, 1) - at(t, 0, 1) * at(t, 1, 0) > 0.0)) {
        return false;
    }
    return dim == 2 || determinant(t, 3) > 0.0;
}

}  // namespace

MetricField::MetricField(GridPtr grid, std::vector<Tensor> covariant)
    : grid_(std::move(grid)), cov_(std::move(covariant)) {
    const int d = grid_->dim();
    if (cov_.size() != grid_->size()) {
        throw ValidationError("metric has " + std::to_string(cov_.size()) +
                              " nodes, grid has " + std::to_string(grid_->size()));
    }
    inv_.resize(cov_.size());
    sqrt_det_.resize(cov_.size());
    for (std::size_t p = 0; p < cov_.size(); ++p) {
        for (double v : cov_[p]) {
            if (!std::isfinite(v)) {
                throw ValidationError("metric is not finite at " + describe_node(*grid_, p));
            }
        }
        if (!is_spd(cov_[p], d)) {
            throw ValidationError("metric is not symmetric positive-definite at " +
                                  describe_node(*grid_, p));
        }
        inv_[p] = inverse(cov_[p], d);
        sqrt_det_[p] = std::sqrt(determinant(cov_[p], d));
    }
}

MetricField MetricField::flat(GridPtr grid) {
    const Tensor id = identity_tensor(grid->dim());
    std::vector<Tensor> cov(grid->size(), id);
    if (grid->kind() == GridKind::disk_polar) {
        for (std::size_t p = 0; p < grid->size(); ++p) {
            const double rho = grid->coords(p)[0];
            at(cov[p], 1, 1) = rho * rho;
        }
    }
    return MetricField(std::move(grid), std::move(cov));
}

MetricField MetricField::from_function(GridPtr grid, const NodeFn& fn) {
    std::vector<Tensor> cov(grid->size());
    for (std::size_t p = 0; p < grid->size(); ++p) {
        cov[p] = fn(*grid, p);
    }
    return MetricField(std::move(grid), std::move(cov));
}

}  // namespace warpgraph
