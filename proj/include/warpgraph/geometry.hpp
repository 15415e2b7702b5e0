#pragma once

#include "warpgraph/field.hpp"
#include "warpgraph/parallel.hpp"

#include <functional>
#include <span>

namespace warpgraph::geometry {

/// A fiber grid together with its metric.
struct Fiber {
    GridPtr grid;
    MetricField metric;
};

/// Node-wise metric formula in axis coordinates. An empty function means flat.
using MetricSpec = std::function<Tensor(const Point&)>;

/// Conformal factor c(rho, theta) multiplying the Euclidean polar metric.
using ConformalSpec = std::function<double(double rho, double theta)>;

Fiber build_torus(std::span<const int> dims, std::span<const double> extents,
                  const MetricSpec& metric = {}, std::span<const double> origin = {});

Fiber build_box(std::span<const int> dims, std::span<const double> extents,
                std::span<const double> origin, const MetricSpec& metric = {});

/// Polar disk of Euclidean radius R with metric c(rho, theta) (d rho^2 + rho^2 d theta^2).
Fiber build_disk(int n_r, int n_theta, double R, const ConformalSpec& conformal = {});

/// Poincare disk model truncated at Euclidean radius R < 1:
/// sigma = 4 / (1 - rho^2)^2 (d rho^2 + rho^2 d theta^2).
Fiber build_hyperbolic_disk(int n_r, int n_theta, double R);

double hyperbolic_conformal_factor(double rho);

/// v^i = sigma^{ij} d_j f.
VectorField gradient(const ScalarField& f, const MetricField& metric, Exec exec = Exec::parallel);

/// Flux-form divergence (1/sqrt g) d_i (sqrt g X^i). Face fluxes use the
/// arithmetic face averages of sqrt g and of X^i; the face at the polar centre
/// carries no flux. Pinned nodes receive 0.
ScalarField divergence(const VectorField& x, const MetricField& metric,
                       Exec exec = Exec::parallel);

ScalarField laplace_beltrami(const ScalarField& f, const MetricField& metric,
                             Exec exec = Exec::parallel);

ScalarField inner(const VectorField& x, const VectorField& y, const MetricField& metric);
ScalarField norm_sq(const VectorField& x, const MetricField& metric);

/// Sum of f sqrt(det sigma) times the node quadrature weight, accumulated in
/// node order so the result does not depend on the thread count.
double integrate(const ScalarField& f, const MetricField& metric);

/// Product P x S^1 with metric sigma + d theta^2. Fields on the base lift as
/// theta-independent functions.
class CircleLift {
public:
    CircleLift(const Fiber& base, const ScalarField& h, int n_theta);

    const GridPtr& grid() const { return grid_; }
    const MetricField& metric() const { return metric_; }
    const ScalarField& warping() const { return h_; }
    const GridPtr& base_grid() const { return base_; }

    ScalarField lift(const ScalarField& f) const;
    MetricField lift(const MetricField& m) const;
    /// Restriction of a theta-independent lifted field to the base (takes the theta = 0 slice).
    ScalarField restrict(const ScalarField& f) const;

private:
    GridPtr base_;
    GridPtr grid_;
    MetricField metric_;
    ScalarField h_;
};

CircleLift lift_to_circle(const Fiber& base, const ScalarField& h, int n_theta);

}  // namespace warpgraph::geometry
