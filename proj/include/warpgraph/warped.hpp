#pragma once

#include "warpgraph/geometry.hpp"

#include <vector>

namespace warpgraph {

/// Face data shared by every residual evaluation: arithmetic averages of
/// sqrt(det sigma), h^2 and sigma^{ij} over the two nodes adjacent to a face.
struct FaceGeometry {
    struct Face {
        double sqrt_det = 0.0;
        double h2 = 0.0;
        Tensor inv{};
    };
    /// faces[axis][node] describes the face between node and its +axis neighbour.
    std::vector<std::vector<Face>> faces;
};

/// P x_h R: a fiber with metric sigma and a positive warping function h.
class WarpedProduct {
public:
    /// Throws ValidationError when h is not strictly positive and finite at every node.
    WarpedProduct(geometry::Fiber fiber, ScalarField h);

    const geometry::Fiber& fiber() const { return fiber_; }
    const FiberGrid& grid() const { return *fiber_.grid; }
    const GridPtr& grid_ptr() const { return fiber_.grid; }
    const MetricField& metric() const { return fiber_.metric; }
    const ScalarField& warping() const { return h_; }
    double h_inf() const { return h_inf_; }
    double h_sup() const { return h_sup_; }
    bool h_constant() const { return h_sup_ - h_inf_ <= 1e-14 * h_sup_; }
    int n() const { return grid().dim(); }
    const FaceGeometry& faces() const { return faces_; }

private:
    geometry::Fiber fiber_;
    ScalarField h_;
    double h_inf_ = 0.0;
    double h_sup_ = 0.0;
    FaceGeometry faces_;
};

/// W = sqrt(1 + h^2 |grad u|^2_sigma), node-wise with centred differences.
ScalarField area_factor(const WarpedProduct& wp, const ScalarField& u);

/// Prescribed-mean-curvature residual
///   F(u) = div(h grad u / W) + sigma(grad h, grad u) / W - n H_target,
/// discretised in conservative form as (1/h) div(h^2 grad u / W) - n H_target
/// with compact face gradients. Pinned nodes carry 0.
ScalarField mean_curvature_residual(const WarpedProduct& wp, const ScalarField& u,
                                    const ScalarField& H_target, Exec exec = Exec::parallel);

/// Exact directional derivative dF(u)[v] by forward-mode differentiation of the
/// discrete residual. Used as the reference for the matrix-free Jacobian.
ScalarField residual_directional_derivative(const WarpedProduct& wp, const ScalarField& u,
                                            const ScalarField& v, Exec exec = Exec::parallel);

/// Candidate graph with cached W, residual and sup |grad u|_sigma.
struct GraphState {
    ScalarField u;
    ScalarField W;
    ScalarField residual;
    ScalarField H_target;
    double grad_sup = 0.0;
};

GraphState make_graph_state(const WarpedProduct& wp, ScalarField u, ScalarField H_target);

/// Theta = g(d_r, N); satisfies 0 < Theta <= h.
struct AngleFunction {
    ScalarField theta;
};

struct UnitNormal {
    VectorField fiber_part;  ///< -(h / W) grad u
    ScalarField r_part;      ///< 1 / (h W)
    AngleFunction angle;     ///< h / W
};

UnitNormal unit_normal(const WarpedProduct& wp, const ScalarField& u);

/// sigma' = sigma + h^2 du (x) du, the metric the graph inherits from P x_h R.
MetricField induced_metric(const WarpedProduct& wp, const ScalarField& u);

struct QuasiIsometry {
    double lambda_min = 1.0;
    double lambda_max = 1.0;
    double B = 0.0;  ///< sup h |grad u|_sigma; contract: lambda_max <= 1 + B^2
};

/// Range of the node-wise generalized eigenvalues of sigma' against sigma.
QuasiIsometry quasi_isometry_constants(const WarpedProduct& wp, const ScalarField& u);

/// sigma~ = phi sigma; phi must be positive.
MetricField conformal_scale(const MetricField& metric, const ScalarField& phi);

/// Lap~ f - (1/phi)(Lap f + (n-2)/2 sigma(grad f, grad ln phi)) with Lap~ taken
/// in conformal_scale(metric, phi). Requires a 3-D grid.
ScalarField check_conformal_laplacian(const MetricField& metric, const ScalarField& phi,
                                      const ScalarField& f);

/// Height-function identity on the graph, written on (P, sigma'):
///   Lap' u + 2 sigma'(grad' u, grad' ln h) - n H Theta / h^2.
/// Pinned nodes carry 0. Throws PreconditionError when u does not solve the
/// residual to `tol_solve`.
ScalarField check_identity_eq7(const WarpedProduct& wp, const ScalarField& u,
                               const ScalarField& H_target, double tol_solve = 1e-8);

struct SuperharmonicCheck {
    double max_value = 0.0;      ///< max over free nodes of Lap~ u on the lifted conformal graph
    double max_positive_violation = 0.0;  ///< max(0, max_value)
};

/// Lifts the graph to P x S^1, applies the conformal factor h^4 to the induced
/// metric and evaluates its Laplacian of the height. Requires H_target <= 0.
SuperharmonicCheck check_superharmonic(const WarpedProduct& wp, const ScalarField& u,
                                       const ScalarField& H_target, int n_theta = 8,
                                       double tol_solve = 1e-8);

/// Ric(d_r, d_r) = -h Lap_sigma h.
ScalarField radial_ricci(const WarpedProduct& wp);

/// integral of sigma(grad h, grad u)/W - n H_target over a closed fiber.
double compatibility_integral(const WarpedProduct& wp, const ScalarField& u,
                              const ScalarField& H_target);

/// -n integral of h H_target over a closed fiber. The conservative residual
/// satisfies integral(h F(u)) = this value for every u, so a non-zero value
/// rules out discrete solutions for any h.
double weighted_compatibility(const WarpedProduct& wp, const ScalarField& H_target);

}  // namespace warpgraph
