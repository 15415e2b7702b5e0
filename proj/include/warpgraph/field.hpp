#pragma once

#include "warpgraph/grid.hpp"

#include <array>
#include <functional>
#include <span>
#include <vector>

namespace warpgraph {

/// Row-major 3x3 storage; only the leading dim x dim block is meaningful.
using Tensor = std::array<double, 9>;

inline double& at(Tensor& t, int i, int j) { return t[static_cast<std::size_t>(3 * i + j)]; }
inline double at(const Tensor& t, int i, int j) { return t[static_cast<std::size_t>(3 * i + j)]; }

Tensor identity_tensor(int dim);

/// Per-node real values on a grid.
class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(GridPtr grid, double fill = 0.0);
    ScalarField(GridPtr grid, std::vector<double> values);

    template <class Fn>
    static ScalarField from_function(GridPtr grid, Fn&& fn) {
        ScalarField f(grid);
        for (std::size_t p = 0; p < grid->size(); ++p) {
            f.values_[p] = fn(*grid, p);
        }
        return f;
    }

    const GridPtr& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t p) const { return values_[p]; }
    double& operator[](std::size_t p) { return values_[p]; }
    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }

    double min() const;
    double max() const;
    double max_abs() const;
    bool all_finite() const;

private:
    GridPtr grid_;
    std::vector<double> values_;
};

/// Per-node contravariant components v^i, node-major.
class VectorField {
public:
    VectorField() = default;
    explicit VectorField(GridPtr grid);

    const GridPtr& grid() const { return grid_; }
    int dim() const { return dim_; }
    std::size_t size() const { return grid_ ? grid_->size() : 0; }
    double operator()(std::size_t p, int i) const {
        return comps_[p * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(i)];
    }
    double& operator()(std::size_t p, int i) {
        return comps_[p * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(i)];
    }
    std::span<const double> data() const { return comps_; }
    bool all_finite() const;

private:
    GridPtr grid_;
    int dim_ = 0;
    std::vector<double> comps_;
};

/// Symmetric positive-definite metric sigma_ij per node, with cached inverse
/// and sqrt(det sigma).
class MetricField {
public:
    using NodeFn = std::function<Tensor(const FiberGrid&, std::size_t)>;

    MetricField() = default;
    /// Validates symmetry and positive-definiteness at every node; throws
    /// ValidationError naming the first offending node.
    MetricField(GridPtr grid, std::vector<Tensor> covariant);

    static MetricField flat(GridPtr grid);
    static MetricField from_function(GridPtr grid, const NodeFn& fn);

    const GridPtr& grid() const { return grid_; }
    int dim() const { return grid_->dim(); }
    const Tensor& cov(std::size_t p) const { return cov_[p]; }
    const Tensor& inv(std::size_t p) const { return inv_[p]; }
    double sqrt_det(std::size_t p) const { return sqrt_det_[p]; }
    std::span<const double> sqrt_dets() const { return sqrt_det_; }

private:
    GridPtr grid_;
    std::vector<Tensor> cov_;
    std::vector<Tensor> inv_;
    std::vector<double> sqrt_det_;
};

/// Determinant of the leading dim x dim block.
double determinant(const Tensor& t, int dim);
/// Inverse of the leading dim x dim block (caller guarantees invertibility).
Tensor inverse(const Tensor& t, int dim);

}  // namespace warpgraph
